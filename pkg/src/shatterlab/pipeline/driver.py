"""Reduction driver: from a parametrized semilinear family to simple families.

The parameter set is first cut into relatively open cells, each rewritten as
an open cell of its own dimension. On an open cell the driver annotates every
component with its uniform closure (and, for single-flat closures, its
essential approximation). When an annotation is not uniform over the cell,
the cell is split and each part is solved separately. Otherwise the component
of largest complexity is decomposed (several closure flats) or deconstructed
(one closure flat), until only flat and half-flat families remain, which are
rewritten as simple families.
"""
import hashlib
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import AnnotationInvalid, BudgetExceeded, NotUniform
from ..families import ParamFamily, family_to_json
from ..kernel import LT, SemilinearSet, affine_hull, cell_decompose, set_to_json
from ..kernel.linear import fraction_str
from ..simple import HALFLINES, POINTS, SimpleFamily, exponent, simple_to_json
from .parametric import project
from . import synthesis
from .synthesis import cell_of, restrict_total, synth_essential_approx, synth_uniform_closure
from .windows import WINDOW_DEPTH, verify_window, window_flat, window_halfflat

MAX_SPLIT_DEPTH = 24
MAX_STEPS = 200

FLAT = "flat"
HALFFLAT = "halfflat"
GENERAL = "general"
EMPTY = "empty"


@dataclass(frozen=True, order=True)
class ComplexityTriple:
    alpha: int
    beta: int
    gamma: int

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)


DONE = ComplexityTriple(0, 0, 0)


@dataclass
class ComponentState:
    label: str
    m: int
    total: SemilinearSet
    kind: str
    closure: object = None
    approx: object = None
    flat: object = None
    halfflat: object = None

    @property
    def key(self):
        """Per-index complexity; flat and half-flat families are the exceptional (0, 0)."""
        if self.kind != GENERAL:
            return (0, 0)
        return (self.closure.alpha, self.closure.beta)


@dataclass
class Step:
    kind: str
    label: str
    before: ComplexityTriple
    r1: int
    s: int
    new_labels: tuple
    region: SemilinearSet
    certificates: list = field(default_factory=list)
    family_hash: str = ""
    after: ComplexityTriple = None

    def to_json(self):
        return {
            "kind": self.kind,
            "index": self.label,
            "complexity_before": list(self.before.as_tuple()),
            "complexity_after": list(self.after.as_tuple()) if self.after else None,
            "r1": self.r1,
            "s": self.s,
            "new_indices": list(self.new_labels),
            "cell": set_to_json(self.region),
            "certificates": [c.to_json() for c in self.certificates],
            "family_hash": self.family_hash,
        }


@dataclass
class Branch:
    """One parameter cell of the reduction, in its own coordinates."""

    region: SemilinearSet
    chart: tuple = None           # (matrix, offset) mapping local to parent parameters
    steps: list = field(default_factory=list)
    children: list = field(default_factory=list)
    simple: SimpleFamily = None
    exponent: int = 0
    note: str = ""

    def leaves(self):
        if not self.children:
            return [self]
        return [leaf for c in self.children for leaf in c.leaves()]

    def all_steps(self):
        out = list(self.steps)
        for c in self.children:
            out.extend(c.all_steps())
        return out

    def to_json(self):
        obj = {
            "cell": set_to_json(self.region),
            "exponent": self.exponent,
            "steps": [s.to_json() for s in self.steps],
        }
        if self.chart is not None:
            mat, off = self.chart
            obj["chart"] = {
                "matrix": [[fraction_str(v) for v in row] for row in mat],
                "offset": [fraction_str(v) for v in off],
            }
        if self.note:
            obj["note"] = self.note
        if self.simple is not None:
            obj["simple"] = simple_to_json(self.simple)
        if self.children:
            obj["children"] = [c.to_json() for c in self.children]
        return obj


@dataclass
class ReductionTrace:
    root: Branch
    exponent: int

    def leaves(self):
        return self.root.leaves()

    def steps(self):
        return self.root.all_steps()

    def certificates(self):
        return [c for s in self.steps() for c in s.certificates]

    def to_json(self):
        return {"exponent": self.exponent, "root": self.root.to_json()}


def family_hash(family):
    blob = json.dumps(family_to_json(family), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# annotation

class _Split(Exception):
    def __init__(self, label, parts):
        super().__init__(label)
        self.label = label
        self.parts = parts


def annotate_component(label, m, relation, region):
    """Uniform annotation of one component over ``region``; raises _Split if none exists."""
    total = restrict_total(relation, m, region).simplified()
    if project(total, m).is_empty():
        return ComponentState(label, m, total, EMPTY)
    parts = synth_uniform_closure(total, m, region)
    if len(parts) > 1:
        raise _Split(label, [p.region for p in parts])
    cp = parts[0]
    if cp.beta == 0:
        return ComponentState(label, m, total, EMPTY, closure=cp)
    if cp.beta > 1:
        return ComponentState(label, m, total, GENERAL, closure=cp)
    z = cp.flats[0]
    if total.symmetric_difference(restrict_total(z.total(), m, region)).is_empty():
        return ComponentState(label, m, total, FLAT, closure=cp, flat=z)
    aps = synth_essential_approx(total, z, region)
    if len(aps) > 1:
        raise _Split(label, [p.region for p in aps])
    ap = aps[0]
    if len(ap.halfflats) == 1:
        h = ap.halfflats[0]
        if total.symmetric_difference(restrict_total(h.total(), m, region)).is_empty():
            return ComponentState(label, m, total, HALFFLAT, closure=cp, approx=ap, halfflat=h)
    return ComponentState(label, m, total, GENERAL, closure=cp, approx=ap)


def annotate(family):
    region = family.param_set
    return [annotate_component(lbl, m, rel, region) for lbl, m, rel in family.components()]


def complexity(states):
    general = [s.key for s in states if s.kind == GENERAL]
    if not general:
        return DONE
    top = max(general)
    return ComplexityTriple(top[0], top[1], general.count(top))


def _pick(states):
    general = [s for s in states if s.kind == GENERAL]
    top = max(s.key for s in general)
    return min((s for s in general if s.key == top), key=lambda s: s.label)


# transforms

def _replace(family, label, new_components):
    comps = []
    for lbl, m, rel in family.components():
        if lbl == label:
            comps.extend(new_components)
        else:
            comps.append((lbl, m, rel))
    return ParamFamily.build(comps, family.param_dim, family.param_set)


def _nonempty(rel, m, region):
    return not project(restrict_total(rel, m, region), m).is_empty()


def decompose_at(family, state, certify=True, depth=WINDOW_DEPTH):
    """Split a component whose closure has several flats.

    New components are the parts inside each top-dimensional closure flat and
    the residue off those flats."""
    cp = state.closure
    if cp is None or not cp.flats:
        raise AnnotationInvalid("decomposition needs a nonempty uniform closure")
    region = family.param_set
    m = state.m
    top = [f for f in cp.flats if f.fiber_dim == cp.alpha]
    ell_p = len(top)
    new = []
    covered = SemilinearSet.empty(m + family.param_dim)
    for j, z in enumerate(top, 1):
        new.append((f"{state.label}.{j}", m, state.total.intersect(z.total()).simplified()))
        covered = covered.union(z.total())
    residue = state.total.difference(covered).simplified()
    if _nonempty(residue, m, region):
        new.append((f"{state.label}.r", m, residue))
    certs = []
    if certify:
        for j, z in enumerate(top, 1):
            others = [w for w in cp.flats if w is not z]
            certs.append(window_flat(state.total, z, others, region, m, f"{state.label}.{j}", depth))
    step = Step("decomposition", state.label, None, ell_p + 1, (1 << ell_p) * (ell_p + 1),
                tuple(c[0] for c in new), region, certs)
    return _replace(family, state.label, new), step


def _subset_name(J, ell):
    return "".join("1" if j in J else "0" for j in range(ell)) or "e"


def deconstruct_at(family, state, certify=True, depth=WINDOW_DEPTH):
    """Replace a component with a single closure flat Z by its essential
    half-flats, Z itself, and per cell P_J the part of lower dimension."""
    ap = state.approx
    if ap is None or state.closure is None or state.closure.beta != 1:
        raise AnnotationInvalid("deconstruction needs a single-flat closure and an essential approximation")
    region = family.param_set
    m = state.m
    z = ap.ambient
    d = z.fiber_dim
    hs = ap.halfflats
    ell = len(hs)
    if 1 << ell > synthesis.SUBSET_BUDGET:
        raise BudgetExceeded(f"{1 << ell} cells exceed the subset budget {synthesis.SUBSET_BUDGET}")
    new = [(f"{state.label}.h{j + 1}", m, h.total()) for j, h in enumerate(hs)]
    new.append((f"{state.label}.z", m, z.total()))
    for r in range(ell + 1):
        for J in itertools.combinations(range(ell), r):
            J = frozenset(J)
            din, dout = ap.dims[J]
            pj = cell_of(hs, J) if ell else z.total()
            if din < d:
                if din < 0:
                    continue
                part = pj.intersect(state.total)
            elif dout < d:
                if dout < 0:
                    continue
                part = pj.difference(state.total)
            else:
                raise AnnotationInvalid(
                    f"cell {_subset_name(J, ell)} of {state.label} is full-dimensional both inside and outside")
            new.append((f"{state.label}.p{_subset_name(J, ell)}", m, part.simplified()))
    certs = []
    if certify:
        for j, h in enumerate(hs):
            others = [g for g in hs if g is not h]
            certs.append(window_halfflat(state.total, h, others, region, m, f"{state.label}.h{j + 1}", depth))
    step = Step("deconstruction", state.label, None, ell + 1 + (1 << ell),
                (1 << (ell + 1)) * (ell + 1 + (1 << ell)), tuple(c[0] for c in new), region, certs)
    return _replace(family, state.label, new), step


def lift_configuration(step, config):
    """Copy each point of the transformed index into every new index.

    The old member is a fixed Boolean combination of the new members at the
    same point, so the trace count can only grow."""
    from ..families import IndexedPointSet
    pts = []
    for lbl, c in config.points:
        if lbl == step.label:
            pts.extend((new, c) for new in step.new_labels)
        else:
            pts.append((lbl, c))
    return IndexedPointSet.of(pts)


def verify_certificates(family, step):
    """Re-check the windows of a step from the family before the step."""
    state = next(s for s in annotate(family) if s.label == step.label)
    m = state.m
    ok = []
    for cert in step.certificates:
        if step.kind == "decomposition":
            j = int(cert.label.rsplit(".", 1)[1]) - 1
            top = [f for f in state.closure.flats if f.fiber_dim == state.closure.alpha]
            z = top[j]
            others = [w for w in state.closure.flats if w is not z]
            ok.append(verify_window(cert, state.total, z, others, m, family.param_set))
        else:
            j = int(cert.label.rsplit(".h", 1)[1]) - 1
            hs = state.approx.halfflats
            others = [g for g in hs if g is not hs[j]]
            ok.append(verify_window(cert, state.total, hs[j], others, m, family.param_set))
    return all(ok)


# conversion to simple families

def _split_rows(flat, m):
    rows = []
    for r in flat.rows:
        if not any(r.coeffs[:m]):
            raise AnnotationInvalid("flat family with a parameter-only equation on an open cell")
        rows.append(r)
    return rows


def flat_to_simple(state, n):
    """Indices of a simple family with the same traces as a flat or half-flat family.

    Fibers {x : A x + B b + c = 0} are mapped by x -> A x onto points
    f(b) = -(B b + c); a cut tau.x + sigma.b + kappa <= 0 becomes an extra
    coordinate y = -tau'.x with tau' the part of tau off the pivot columns."""
    m = state.m
    z = state.flat if state.kind == FLAT else state.halfflat.ambient
    rows = _split_rows(z.flat, m)
    polys = []
    for r in rows:
        polys.append(tuple(-Fraction(c) for c in r.coeffs[m:]) + (-Fraction(r.const),))
    if state.kind == FLAT:
        if not rows:
            return []
        return [(state.label, POINTS, polys)]
    cut = state.halfflat.cut
    tau = [Fraction(c) for c in cut.coeffs[:m]]
    g = [Fraction(c) for c in cut.coeffs[m:]] + [Fraction(cut.const)]
    for r in rows:
        p = next(i for i in range(m) if r.coeffs[i])
        lam = tau[p] / r.coeffs[p]
        if not lam:
            continue
        tau = [a - lam * c for a, c in zip(tau, r.coeffs[:m])]
        rest = [Fraction(c) for c in r.coeffs[m:]] + [Fraction(r.const)]
        g = [a - lam * c for a, c in zip(g, rest)]
    if not any(tau):
        raise AnnotationInvalid(f"cut of {state.label} is constant on its fibers")
    if cut.rel == LT:
        neg = [-v for v in g]
        out = [(state.label + "#hl", HALFLINES, polys + [tuple(neg)])]
        if rows:
            out.insert(0, (state.label + "#pt", POINTS, polys))
        return out
    return [(state.label, HALFLINES, polys + [tuple(g)])]


def to_simple(states, n):
    specs = []
    for s in states:
        if s.kind == EMPTY:
            continue
        if s.kind not in (FLAT, HALFFLAT):
            raise AnnotationInvalid(f"component {s.label} is neither flat nor half-flat")
        specs.extend(flat_to_simple(s, n))
    return SimpleFamily.build(n, specs)


# front end and loop

def _chart(cell, n):
    """Affine chart b = D u + p0 of a relatively open cell; returns (D, p0, k)."""
    hull = affine_hull(cell)
    p0 = hull.point
    basis = hull.direction
    k = len(basis)
    mat = [[basis[j][i] for j in range(k)] for i in range(n)]
    return mat, p0, k


def reparametrize(family, cell):
    """Family restricted to a relatively open cell, in coordinates of the cell's hull."""
    n = family.param_dim
    if not cell.eqs and affine_hull(cell).affine_dim == n:
        region = SemilinearSet(n, (cell,))
        return family.replace(param_set=region), None
    mat, p0, k = _chart(cell, n)
    region = SemilinearSet(n, (cell,)).affine_substitute(mat, p0).simplified()
    comps = []
    for lbl, m, rel in family.components():
        big = [[Fraction(int(i == j)) for j in range(m)] + [Fraction(0)] * k for i in range(m)]
        big += [[Fraction(0)] * m + list(row) for row in mat]
        off = [Fraction(0)] * m + list(p0)
        comps.append((lbl, m, rel.affine_substitute(big, off).simplified()))
    return ParamFamily.build(comps, k, region), (tuple(map(tuple, mat)), tuple(p0))


def _solve(family, prev, depth, certify, window_depth):
    if depth > MAX_SPLIT_DEPTH:
        raise BudgetExceeded(f"parameter splitting deeper than {MAX_SPLIT_DEPTH}")
    branch = Branch(family.param_set)
    cells = cell_decompose(family.param_set)
    for c in cells:
        sub, chart = reparametrize(family, c)
        child = _solve_open(sub, prev, depth, certify, window_depth)
        child.chart = chart
        branch.children.append(child)
    branch.exponent = max((c.exponent for c in branch.children), default=0)
    if not cells:
        branch.note = "empty parameter set"
    return branch


def _solve_open(family, prev, depth, certify, window_depth):
    branch = Branch(family.param_set)
    if family.param_dim == 0:
        branch.simple = SimpleFamily(0, ())
        branch.note = "single member"
        return branch
    for _ in range(MAX_STEPS):
        try:
            states = annotate(family)
        except _Split as split:
            branch.note = f"split on {split.label}"
            for part in split.parts:
                child = _solve(family.replace(param_set=part.simplified()), prev, depth + 1, certify, window_depth)
                branch.children.append(child)
            branch.exponent = max(c.exponent for c in branch.children)
            return branch
        live = [s for s in states if s.kind != EMPTY]
        if len(live) != len(states):
            keep = {s.label for s in live}
            family = ParamFamily.build([c for c in family.components() if c[0] in keep],
                                       family.param_dim, family.param_set)
            states = live
        cx = complexity(states)
        if branch.steps:
            branch.steps[-1].after = cx
        if prev is not None and not cx < prev:
            raise AnnotationInvalid(f"complexity {cx.as_tuple()} did not drop below {prev.as_tuple()}")
        if cx == DONE:
            branch.simple = to_simple(states, family.param_dim)
            branch.exponent = exponent(branch.simple).exponent
            return branch
        state = _pick(states)
        if state.closure.beta > 1:
            family, step = decompose_at(family, state, certify, window_depth)
        else:
            family, step = deconstruct_at(family, state, certify, window_depth)
        step.before = cx
        step.family_hash = family_hash(family)
        branch.steps.append(step)
        prev = cx
    raise BudgetExceeded(f"reduction did not finish in {MAX_STEPS} steps")


def reduce_to_simple(family, certify=True, window_depth=WINDOW_DEPTH):
    """Reduction trace whose leaves carry simple families with matching exponents."""
    if family.param_set.is_empty():
        return ReductionTrace(Branch(family.param_set, note="empty parameter set"), 0)
    root = _solve(family, None, 0, certify, window_depth)
    return ReductionTrace(root, root.exponent)


def theorem_exponent(family, certify=True, window_depth=WINDOW_DEPTH):
    return reduce_to_simple(family, certify, window_depth).exponent


def replay(family, branch):
    """Apply the recorded steps of a single open branch and return the final family."""
    for step in branch.steps:
        states = {s.label: s for s in annotate(family)}
        live = [lbl for lbl in family.labels if states[lbl].kind != EMPTY]
        if len(live) != len(family.labels):
            family = ParamFamily.build([c for c in family.components() if c[0] in live],
                                       family.param_dim, family.param_set)
        state = states[step.label]
        fn = decompose_at if step.kind == "decomposition" else deconstruct_at
        family, _ = fn(family, state, certify=False)
    return family


# uniformity check

@dataclass
class UniformNode:
    label: str
    case: str
    ok: bool
    clause: str = ""
    children: list = field(default_factory=list)

    def to_json(self):
        obj = {"index": self.label, "case": self.case, "ok": self.ok}
        if self.clause:
            obj["clause"] = self.clause
        if self.children:
            obj["children"] = [c.to_json() for c in self.children]
        return obj


def _check_component(label, m, rel, region, depth):
    if depth > MAX_SPLIT_DEPTH:
        raise BudgetExceeded("uniformity recursion too deep")
    try:
        st = annotate_component(label, m, rel, region)
    except _Split as split:
        return UniformNode(label, "none", False,
                           f"annotation of {split.label} needs {len(split.parts)} parameter parts")
    if st.kind in (EMPTY, FLAT, HALFFLAT):
        return UniformNode(label, "flat" if st.kind != HALFFLAT else "half-flat", True)
    node = UniformNode(label, "", True)
    if st.closure.beta > 1:
        node.case = "several flats"
        top = [f for f in st.closure.flats if f.fiber_dim == st.closure.alpha]
        covered = SemilinearSet.empty(rel.dim)
        subs = []
        for j, z in enumerate(top, 1):
            subs.append((f"{label}.{j}", st.total.intersect(z.total())))
            covered = covered.union(z.total())
        subs.append((f"{label}.r", st.total.difference(covered)))
    else:
        node.case = "single flat"
        ap = st.approx
        hs = ap.halfflats
        d = ap.ambient.fiber_dim
        subs = []
        for J, (din, dout) in ap.dims.items():
            if din == d and dout == d:
                node.ok = False
                node.clause = f"cell {sorted(J)} full-dimensional inside and outside"
                return node
            if 0 <= din < d:
                pj = cell_of(hs, J) if hs else ap.ambient.total()
                subs.append((f"{label}.p{_subset_name(J, len(hs))}", pj.intersect(st.total)))
    for lbl, s in subs:
        if not _nonempty(s, m, region):
            continue
        child = _check_component(lbl, m, s, region, depth + 1)
        node.children.append(child)
        if not child.ok:
            node.ok = False
            node.clause = node.clause or f"sub-family {lbl} is not uniform"
    return node


def check_uniform(family, strict=False):
    """Recursive uniformity check over the whole parameter set, without splitting it."""
    nodes = [_check_component(lbl, m, rel, family.param_set, 0) for lbl, m, rel in family.components()]
    ok = all(n.ok for n in nodes)
    if strict and not ok:
        bad = next(n for n in nodes if not n.ok)
        raise NotUniform(f"component {bad.label} is not uniform", bad.clause)
    return ok, nodes
