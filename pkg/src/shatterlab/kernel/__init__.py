"""Exact semilinear-set kernel over the rationals."""
from .geometry import (
    EMPTY_DIM,
    Flat,
    HalfFlat,
    affine_hull,
    boundary_in_flat,
    cell_decompose,
    closure,
    dimension,
    essential_approximation,
    essential_boundary,
    flat_closure,
    flat_closure_set,
    halfflat_witness_set,
    is_essential_halfflat,
    local_dimension,
    open_pieces,
    single_flat,
    top_closure,
)
from .io import dumps_set, loads_set, set_from_json, set_to_json
from .linear import EQ, LE, LT, Atom, as_fraction, as_point
from .sets import BasicCell, SemilinearSet, cube_cell


def contains(s, point):
    return s.contains(point)


def is_empty(s):
    return s.is_empty()


def eliminate(s, var):
    return s.eliminate(var)


def complement(s):
    return s.complement()


def intersect(s, t):
    return s.intersect(t)


def union(s, t):
    return s.union(t)


def sample_point(s):
    return s.sample_point()


def atom(coeffs, const, rel):
    return Atom.make(coeffs, const, rel)


def cell(dim, eq=(), lt=(), le=()):
    """Cell from coefficient vectors ``[a1..am, b]`` grouped by relation."""
    atoms = [Atom.make(v[:-1], v[-1], EQ) for v in eq]
    atoms += [Atom.make(v[:-1], v[-1], LT) for v in lt]
    atoms += [Atom.make(v[:-1], v[-1], LE) for v in le]
    return BasicCell.make(dim, atoms)


def semilinear(dim, cells):
    return SemilinearSet(dim, tuple(cells))
