"""Uniformity synthesis and the reduction of families to simple families."""
from .driver import (
    ComplexityTriple,
    ReductionTrace,
    annotate,
    check_uniform,
    complexity,
    deconstruct_at,
    decompose_at,
    lift_configuration,
    reduce_to_simple,
    replay,
    theorem_exponent,
    verify_certificates,
)
from .parametric import FlatFamily, HalfFlatFamily
from .synthesis import synth_essential_approx, synth_uniform_closure
from .windows import WindowCertificate, verify_window, window_flat, window_halfflat
