from fractions import Fraction as F
from math import comb

import pytest
from hypothesis import given, settings

from conftest import random_config, random_family, random_set, rng_of, seeds
from shatterlab import corpus
from shatterlab.errors import DimensionMismatch, EmptyRestriction, ParamOutsideY, ParseError
from shatterlab.families import (
    IndexedPointSet,
    ParamFamily,
    boolean_extend,
    clone,
    component_restrict,
    config_from_json,
    config_to_json,
    exact_hit_partition,
    family_from_json,
    family_to_json,
    forced_trace_set,
    restrict_params,
    sauer_shelah_check,
    trace_count,
    trace_set,
)
from shatterlab.kernel import SemilinearSet, cell
from shatterlab.search import balanced_split, diagonal_config


def relabel(config, fn):
    return IndexedPointSet.of(sorted({(fn(l), c) for l, c in config.points}))


def pattern_at(family, config, b):
    return sum(1 << j for j, (l, c) in enumerate(config.points) if family.member(l, b).contains(c))


def masks(family, config):
    return {tr.mask for tr in trace_set(family, config)}


# property checks, shared with the acceptance suite

def check_trace_soundness(seed):
    rng = rng_of(seed)
    fam = random_family(rng)
    cfg = random_config(rng, fam)
    for tr in trace_set(fam, cfg):
        b = tr.witness_region.sample_point()
        assert b is not None and fam.param_set.contains(b)
        assert pattern_at(fam, cfg, b) == tr.mask


def check_clone(seed):
    rng = rng_of(seed)
    fam = random_family(rng)
    ell = rng.randint(1, 3)
    cl = clone(fam, ell)
    a = random_config(rng, cl)
    merged = relabel(a, lambda l: l.rsplit(":", 1)[0])
    assert trace_count(cl, a) <= trace_count(fam, merged)
    b = random_config(rng, fam)
    assert trace_count(cl, relabel(b, lambda l: f"{l}:1")) == trace_count(fam, b)


def _extension(rng, fam):
    by_dim = {}
    for l, m in zip(fam.labels, fam.dims):
        by_dim.setdefault(m, []).append(l)
    group = max(by_dim.values(), key=len)
    k = len(group)
    table = [rng.random() < 0.5 for _ in range(1 << k)]
    return group, boolean_extend(fam, group, table, "new")


def check_boolean_sandwich(seed):
    rng = rng_of(seed)
    fam = random_family(rng)
    group, ext = _extension(rng, fam)
    a = random_config(rng, fam)
    assert trace_count(fam, a) <= trace_count(ext, a)
    a2 = random_config(rng, ext)
    merged = IndexedPointSet.of(sorted({(l, c) for l0, c in a2.points for l in (group if l0 == "new" else [l0])}))
    assert len(merged) <= len(group) * len(a2)
    assert trace_count(ext, a2) <= trace_count(fam, merged)


def check_restriction(seed):
    rng = rng_of(seed)
    fam = random_family(rng)
    cfg = random_config(rng, fam)
    region = random_set(rng, fam.param_dim, max_cells=2, max_atoms=2, bound=3)
    try:
        sub = restrict_params(fam, region)
    except EmptyRestriction:
        assert fam.param_set.intersect(region).is_empty()
        return
    assert masks(sub, cfg) <= masks(fam, cfg)
    lbl = rng.choice(fam.labels)
    assert len(forced_trace_set(fam, cfg, [lbl])) <= trace_count(fam, cfg)
    only = component_restrict(fam, [lbl])
    part = IndexedPointSet.of(p for p in cfg.points if p[0] == lbl)
    keep = [j for j, p in enumerate(cfg.points) if p[0] == lbl]
    projected = {sum(1 << i for i, j in enumerate(keep) if m >> j & 1) for m in masks(fam, cfg)}
    assert masks(only, part) == projected


def check_sauer_shelah(seed):
    rng = rng_of(seed)
    fam = random_family(rng)
    cfg = random_config(rng, fam, max_points=6)
    vc, ok = sauer_shelah_check(trace_set(fam, cfg), cfg)
    assert ok and 0 <= vc <= len(cfg)


def check_product_bound(seed):
    rng = rng_of(seed)
    fam = random_family(rng, max_components=3)
    cfg = random_config(rng, fam)
    labels = list(fam.labels)
    # a cover I1 u I2 = I, overlap allowed
    i1 = [l for l in labels if rng.random() < 0.6] or labels[:1]
    i2 = [l for l in labels if l not in i1 or rng.random() < 0.3] or labels[-1:]
    lhs = trace_count(fam, cfg)
    rhs = 1
    for part in (i1, i2):
        sub = IndexedPointSet.of(p for p in cfg.points if p[0] in part)
        rhs *= trace_count(component_restrict(fam, part), sub)
    assert lhs <= rhs


def check_forced_decomposition(seed):
    rng = rng_of(seed)
    fam = random_family(rng, max_components=3)
    cfg = random_config(rng, fam)
    traces = trace_set(fam, cfg)
    groups = exact_hit_partition(traces, cfg, fam.labels)
    assert sum(len(g) for g in groups.values()) == len(traces)
    total = 0
    for hit, ms in groups.items():
        forced = {tr.mask for tr in forced_trace_set(fam, cfg, sorted(hit))}
        assert set(ms) <= forced
        total += len(forced)
    assert len(traces) <= total


PROPERTY_CHECKS = {
    "trace soundness": check_trace_soundness,
    "clone equality": check_clone,
    "boolean extension sandwich": check_boolean_sandwich,
    "restriction monotonicity": check_restriction,
    "sauer-shelah": check_sauer_shelah,
    "product bound": check_product_bound,
    "forced decomposition": check_forced_decomposition,
}


@pytest.mark.parametrize("name", sorted(PROPERTY_CHECKS))
@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_family_properties(name, seed):
    PROPERTY_CHECKS[name](seed)


def test_trace_completeness_against_dense_sampling():
    # integer data: every realizable pattern has a witness on the half-integer grid
    grid = [(F(i, 2), F(j, 2)) for i in range(-24, 25) for j in range(-24, 25)]
    for fam in (corpus.s1_pairs(), corpus.s2_crosses(), corpus.s4_halflines(), corpus.quadrant_pq()):
        for pts in ([(0, 0), (2, -2), (1, 3)], [(1, 1), (2, 2), (3, 3), (1, 3)], [(0, 0), (1, 1), (2, 0)]):
            cfg = IndexedPointSet.of(("1", p) for p in pts)
            sampled = {pattern_at(fam, cfg, b) for b in grid}
            assert sampled == masks(fam, cfg)


def test_fiber_examples():
    s2 = corpus.s2_crosses().fiber([0, 0])["1"]
    assert s2.equals(SemilinearSet(2, (cell(2, eq=[[1, 0, 0]]), cell(2, eq=[[0, 1, 0]]))))
    s1 = corpus.s1_pairs().fiber([0, 0])["1"]
    assert s1.contains([-1, 1]) and s1.contains([1, -1]) and not s1.contains([0, 0])
    fam = restrict_params(corpus.s1_pairs(), SemilinearSet(2, (cell(2, lt=[[-1, 0, 0]]),)))
    with pytest.raises(ParamOutsideY):
        fam.fiber([-1, 0])
    with pytest.raises(DimensionMismatch):
        fam.fiber([1])


def test_trace_set_examples():
    diag = IndexedPointSet.of(("1", (k, k)) for k in range(1, 4))
    assert trace_count(corpus.s2_crosses(), diag) == 7
    assert trace_count(corpus.s1_pairs(), diag) == 4
    assert [tr.mask for tr in trace_set(corpus.s2_crosses(), IndexedPointSet.of([]))] == [0]


def test_trace_enumeration_order_is_in_before_out():
    diag = IndexedPointSet.of(("1", (k, k)) for k in range(1, 3))
    first = trace_set(corpus.s2_crosses(), diag)
    again = trace_set(corpus.s2_crosses(), diag)
    assert [t.mask for t in first] == [t.mask for t in again]
    assert first[0].mask == 0b11


def test_forced_examples():
    fam = corpus.forced_example()
    counts = []
    for t in range(2, 7):
        cfg = diagonal_config(fam, balanced_split(fam, t))
        counts.append(len(forced_trace_set(fam, cfg, ["1", "3"])))
    # a pattern hits {k} and {(k, k, k)} for each k up to the third block size
    assert counts == [t // 3 for t in range(2, 7)]
    cfg = IndexedPointSet.of([("1", (1,)), ("2", (1,))])
    assert forced_trace_set(fam, cfg, list(fam.labels)) == []
    assert len(forced_trace_set(fam, cfg, [])) == trace_count(fam, cfg)


def test_clone_examples():
    s2 = corpus.s2_crosses()
    one = clone(s2, 1)
    assert one.labels == ("1:1",)
    two = clone(s2, 2)
    assert two.labels == ("1:1", "1:2") and two.relations[0].equals(two.relations[1])
    cfg = IndexedPointSet.of([("1:1", (1, 1)), ("1:2", (2, 2)), ("1:2", (1, 2))])
    merged = relabel(cfg, lambda l: "1")
    assert trace_count(two, cfg) <= trace_count(s2, merged)


def test_boolean_extension_examples():
    s2, s4 = corpus.s2_crosses(), corpus.s4_halflines()
    fam = ParamFamily.build(s2.components() + [("2", 2, s4.relations[0])], 2)
    proj = boolean_extend(fam, ["1", "2"], lambda v: v[0], "p")
    assert proj.relation("p").equals(fam.relation("1"))
    both = boolean_extend(fam, ["1", "2"], lambda v: v[0] and v[1], "and")
    xor = boolean_extend(fam, ["1", "2"], lambda v: v[0] != v[1], "xor")
    rng = rng_of(7)
    for _ in range(60):
        p = [F(rng.randint(-6, 6), 2) for _ in range(4)]
        a, b = fam.relation("1").contains(p), fam.relation("2").contains(p)
        assert both.relation("and").contains(p) == (a and b)
        assert xor.relation("xor").contains(p) == (a != b)
    lines = ParamFamily.build([("1", 2, fam.relation("1")), ("3", 1, SemilinearSet.universe(3))], 2)
    with pytest.raises(DimensionMismatch):
        boolean_extend(lines, ["1", "3"], lambda v: v[0], "bad")


def test_restriction_examples():
    s2 = corpus.s2_crosses()
    same = restrict_params(s2, SemilinearSet.universe(2))
    assert same.param_set.equals(s2.param_set)
    box = SemilinearSet(2, (cell(2, lt=[[-1, 0, 0], [1, 0, -1], [0, -1, 0], [0, 1, -1]]),))
    sub = restrict_params(s2, box)
    assert sub.param_set.equals(box)
    with pytest.raises(EmptyRestriction):
        restrict_params(sub, SemilinearSet(2, (cell(2, lt=[[1, 0, 5]]),)))
    with pytest.raises(ParseError):
        component_restrict(s2, ["9"])


def test_sauer_shelah_on_shattered_pair():
    cfg = IndexedPointSet.of([("1", (1, 1)), ("1", (2, 2))])
    vc, ok = sauer_shelah_check(trace_set(corpus.s2_crosses(), cfg), cfg)
    assert (vc, ok) == (2, True)


def test_family_and_config_json_round_trip():
    fam = corpus.quadrant_pq()
    again = family_from_json(family_to_json(fam))
    assert family_to_json(again) == family_to_json(fam)
    cfg = IndexedPointSet.of([("1", (F(1, 2), 3)), ("1", (0, 0))])
    assert config_from_json(config_to_json(cfg)) == cfg
    assert config_to_json(cfg)[0]["coords"] == ["0/1", "0/1"]


def test_duplicate_points_within_component_rejected():
    with pytest.raises(ParseError):
        IndexedPointSet.of([("1", (1, 1)), ("1", (1, 1))])
    both = IndexedPointSet.of([("1", (1, 1)), ("2", (1, 1))])
    assert len(both) == 2


def test_diagonal_counts_match_closed_forms():
    s1, s2 = corpus.s1_pairs(), corpus.s2_crosses()
    for t in range(2, 7):
        cfg = IndexedPointSet.of(("1", (k, k)) for k in range(1, t + 1))
        assert trace_count(s1, cfg) == t + 1
        assert trace_count(s2, cfg) == 1 + t + comb(t, 2)
