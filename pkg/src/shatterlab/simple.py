"""Simple families (points and vertical half-lines given by affine maps).

The exponent of a simple family is read off from its critical relations:
each is decomposed into relatively open pieces, dependent blocks are
projected away, and the largest surviving independent block set wins.
"""
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ArityMismatch, DimensionMismatch, NotSimple, ParseError
from .families import IndexedPointSet, ParamFamily
from .kernel import EQ, LE, LT, Atom, BasicCell, SemilinearSet, affine_hull, as_fraction, cell_decompose
from .kernel.linear import fraction_str, rank

POINTS = "points"
HALFLINES = "halflines"


@dataclass(frozen=True)
class SimpleIndex:
    label: str
    kind: str
    polys: tuple

    def __post_init__(self):
        if self.kind not in (POINTS, HALFLINES):
            raise NotSimple(f"unknown kind {self.kind!r}")
        if self.kind == HALFLINES and not self.polys:
            raise NotSimple("half-line component needs at least one coordinate")
        object.__setattr__(self, "polys", tuple(tuple(as_fraction(v) for v in p) for p in self.polys))

    @property
    def dim(self):
        return len(self.polys)

    def block_size(self, in_endpoint_set):
        return self.dim if in_endpoint_set else self.dim - 1

    def endpoint(self, b):
        return tuple(p[-1] + sum(c * x for c, x in zip(p[:-1], b)) for p in self.polys)


@dataclass(frozen=True)
class SimpleFamily:
    param_dim: int
    indices: tuple

    def __post_init__(self):
        labels = [ix.label for ix in self.indices]
        if len(set(labels)) != len(labels):
            raise NotSimple("duplicate labels")
        for ix in self.indices:
            for p in ix.polys:
                if len(p) != self.param_dim + 1:
                    raise DimensionMismatch(f"polynomial {p} needs {self.param_dim + 1} entries")

    @staticmethod
    def build(param_dim, specs):
        """``specs`` is a list of ``(label, kind, polys)``."""
        return SimpleFamily(param_dim, tuple(SimpleIndex(str(l), k, tuple(p)) for l, k, p in specs))

    @property
    def labels(self):
        return tuple(ix.label for ix in self.indices)

    def index(self, label):
        for ix in self.indices:
            if ix.label == label:
                return ix
        raise KeyError(label)

    def member_contains(self, label, b, point):
        ix = self.index(label)
        f = ix.endpoint(b)
        if ix.kind == POINTS:
            return tuple(point) == f
        return tuple(point[:-1]) == f[:-1] and point[-1] >= f[-1]


def as_param_family(simple):
    n = simple.param_dim
    comps = []
    for ix in simple.indices:
        m = ix.dim
        atoms = []
        for k, p in enumerate(ix.polys):
            coeffs = [Fraction(0)] * (m + n)
            coeffs[k] = Fraction(1)
            for j in range(n):
                coeffs[m + j] = -p[j]
            rel = EQ
            const = -p[-1]
            if ix.kind == HALFLINES and k == m - 1:
                coeffs = [-c for c in coeffs]
                const = p[-1]
                rel = LE
            atoms.append(Atom.make(coeffs, const, rel))
        comps.append((ix.label, m, SemilinearSet.from_atoms(m + n, atoms)))
    return ParamFamily.build(comps, n)


@dataclass
class BlockRelation:
    """Relation on a product of coordinate blocks, as used by the grid functions."""

    blocks: tuple          # (label, size) in coordinate order
    relation: SemilinearSet

    @property
    def dim(self):
        return sum(size for _, size in self.blocks)

    def block_ranges(self):
        out = []
        o = 0
        for lbl, size in self.blocks:
            out.append((lbl, o, o + size))
            o += size
        return out

    def contains(self, xbar):
        return self.relation.contains(xbar)


@dataclass
class CriticalRelation(BlockRelation):
    J: tuple = ()
    Jp: frozenset = frozenset()
    lifted: BasicCell = None   # (xbar, alpha, b) before elimination
    param_dim: int = 0

    def witness(self, xbar):
        """(alpha, b) making P(xbar, alpha) critical, by back-substitution."""
        fixed = {i: as_fraction(v) for i, v in enumerate(xbar)}
        p = self.lifted.substitute(fixed)
        sample = SemilinearSet(p.dim, (p,)).sample_point()
        if sample is None:
            return None
        return sample[0], sample[1:]


def _ordered(simple, labels):
    order = {lbl: i for i, lbl in enumerate(simple.labels)}
    return tuple(sorted(labels, key=order.__getitem__))


def build_critical_relation(simple, J, Jp):
    J = _ordered(simple, J)
    Jp = frozenset(Jp)
    if not Jp <= set(J):
        raise ValueError("J' must be a subset of J")
    n = simple.param_dim
    blocks = tuple((lbl, simple.index(lbl).block_size(lbl in Jp)) for lbl in J)
    u = sum(s for _, s in blocks)
    total = u + 1 + n
    alpha = u
    atoms = []
    feasible = True
    o = 0
    for lbl, size in blocks:
        ix = simple.index(lbl)
        if ix.kind == POINTS and lbl not in Jp:
            feasible = False
        for k, p in enumerate(ix.polys):
            coeffs = [Fraction(0)] * total
            for j in range(n):
                coeffs[alpha + 1 + j] = p[j]
            const = p[-1]
            if k < size:
                coeffs[o + k] = Fraction(-1)
                atoms.append(Atom.make(coeffs, const, EQ))
            elif ix.kind == HALFLINES:
                # endpoint strictly below alpha
                coeffs[alpha] = Fraction(-1)
                atoms.append(Atom.make(coeffs, const, LT))
        o += size
    lifted = BasicCell.make(total, atoms) if feasible else BasicCell.false(total)
    relation = SemilinearSet(total, (lifted,)).project_out(range(u, total)).pruned()
    return CriticalRelation(blocks, relation, J=J, Jp=Jp, lifted=lifted, param_dim=n)


def is_critical(simple, J, Jp, xbar, alpha, b):
    """Direct check that P(xbar, alpha) is critical for parameter b."""
    crit_blocks = []
    o = 0
    for lbl in _ordered(simple, J):
        size = simple.index(lbl).block_size(lbl in Jp)
        crit_blocks.append((lbl, tuple(xbar[o:o + size])))
        o += size
    P = {}
    for lbl, x in crit_blocks:
        P[lbl] = x if lbl in Jp else x + (alpha,)
    for ix in simple.indices:
        f = ix.endpoint(b)
        pt = P.get(ix.label)
        hit = pt is not None and simple.member_contains(ix.label, b, pt)
        if ix.label in P and not hit:
            return False
        endpoint_in = pt is not None and f == pt
        if endpoint_in != (ix.label in Jp):
            return False
    return True


@dataclass
class Piece:
    blocks: tuple
    cell: BasicCell
    flat: object

    @property
    def labels(self):
        return tuple(lbl for lbl, _ in self.blocks)


def piece_decompose(crit):
    return [Piece(crit.blocks, c, affine_hull(c)) for c in cell_decompose(crit.relation)]


def injective_block(piece):
    """Least block whose deletion is one-to-one on the piece's affine hull, else None."""
    direction = piece.flat.direction
    o = 0
    for idx, (lbl, size) in enumerate(piece.blocks):
        keep = [c for c in range(piece.cell.dim) if not o <= c < o + size]
        restricted = [[d[c] for c in keep] for d in direction]
        if rank(restricted) == len(direction):
            return idx
        o += size
    return None


def is_dependent(piece):
    idx = injective_block(piece)
    return None if idx is None else piece.blocks[idx][0]


def drop_block(piece, idx):
    o = sum(size for _, size in piece.blocks[:idx])
    size = piece.blocks[idx][1]
    s = SemilinearSet(piece.cell.dim, (piece.cell,)).project_out(range(o, o + size))
    cell = s.cells[0]
    blocks = piece.blocks[:idx] + piece.blocks[idx + 1:]
    return Piece(blocks, cell, affine_hull(cell))


def reduce_piece(piece):
    """Drop dependent blocks until independent. Returns (final piece, dropped labels)."""
    dropped = []
    while True:
        idx = injective_block(piece)
        if idx is None:
            return piece, dropped
        dropped.append(piece.blocks[idx][0])
        piece = drop_block(piece, idx)


@dataclass
class ExponentResult:
    exponent: int
    certificate: list = field(default_factory=list)

    def to_json(self):
        return {"exponent": self.exponent, "pieces": self.certificate}


def exponent(simple):
    """Exponent s with shatter function Theta(t^s)."""
    labels = simple.labels
    best = 0
    cert = []
    for r in range(len(labels) + 1):
        for J in itertools.combinations(labels, r):
            for rp in range(len(J) + 1):
                for Jp in itertools.combinations(J, rp):
                    if any(simple.index(l).kind == POINTS for l in J if l not in Jp):
                        continue
                    crit = build_critical_relation(simple, J, Jp)
                    if crit.relation.is_empty():
                        continue
                    for k, piece in enumerate(piece_decompose(crit)):
                        final, dropped = reduce_piece(piece)
                        size = len(final.blocks)
                        best = max(best, size)
                        cert.append({
                            "J": list(J), "Jp": list(Jp), "piece": k,
                            "piece_dim": piece.flat.affine_dim,
                            "dropped": dropped, "independent": list(final.labels), "size": size,
                        })
    return ExponentResult(best, cert)


def _integer_grid(parts):
    den = 1
    for part in parts:
        for p in part:
            for v in p:
                den = den * v.denominator // np.gcd(den, v.denominator)
    return den


def delta_on_grid(crit, grid):
    """|E intersect W| for a grid W given as one point list per block."""
    if len(grid) != len(crit.blocks):
        raise ArityMismatch("grid needs one part per block")
    parts = [[tuple(as_fraction(v) for v in p) for p in part] for part in grid]
    for (lbl, size), part in zip(crit.blocks, parts):
        for p in part:
            if len(p) != size:
                raise ArityMismatch(f"grid point {p} has wrong size for block {lbl}")
    if any(not part for part in parts):
        return 0
    den = _integer_grid(parts)
    ranges = [(o, e) for _, o, e in crit.block_ranges()]
    shape = tuple(len(p) for p in parts)
    total = np.zeros(shape, dtype=bool)
    for cell in crit.relation.cells:
        ok = np.ones(shape, dtype=bool)
        for a in cell.atoms:
            acc = np.full(shape, a.const * den, dtype=object)
            for axis, ((o, e), part) in enumerate(zip(ranges, parts)):
                contrib = np.array([int(sum(a.coeffs[o + j] * v * den for j, v in enumerate(p))) for p in part],
                                   dtype=object)
                view = [1] * len(shape)
                view[axis] = len(part)
                acc = acc + contrib.reshape(view)
            if a.rel == EQ:
                ok &= acc == 0
            elif a.rel == LT:
                ok &= acc < 0
            else:
                ok &= acc <= 0
        total |= ok
    return int(total.sum())


def _box(shape):
    return [tuple(Fraction(v) for v in p) for p in itertools.product(*(range(1, a + 1) for a in shape))]


def _box_shapes(size, limit=4):
    if size == 0:
        return [()]
    return list(itertools.product(range(1, limit + 1), repeat=size))


def delta_search(crit, t, seed=0, iterations=200):
    """Lower bound on delta_E(t) with the grid achieving it."""
    sizes = [s for _, s in crit.blocks]
    best = (-1, None)
    if not sizes:
        return (1 if not crit.relation.is_empty() else 0), []
    shapes = []
    for s in sizes:
        opts = []
        for sh in _box_shapes(s):
            cnt = 1
            for a in sh:
                cnt *= a
            opts.append((cnt, sh))
        shapes.append(opts)
    combos = itertools.product(*shapes)
    candidates = []
    for combo in combos:
        tot = sum(c for c, _ in combo)
        if tot <= t:
            candidates.append((tot, combo))
    if not candidates:
        # fewer points than blocks: some part stays empty, so no tuple fits
        return 0, [[] for _ in sizes]
    if t <= 12:
        for tot, combo in candidates:
            grid = [_box(sh) for _, sh in combo]
            val = delta_on_grid(crit, grid)
            if val > best[0]:
                best = (val, grid)
        if best[1] is not None:
            return best
    rng = random.Random(f"delta:{seed}:{t}")
    # start from the largest box combination that fits, then hill-climb
    tot, combo = max(candidates, key=lambda x: (x[0], x[1]))
    grid = [_box(sh) for _, sh in combo]
    g = max(2, int(round(t ** 0.5)) + 1)
    used = sum(len(p) for p in grid)
    while used < t:
        i = rng.randrange(len(sizes))
        if sizes[i] == 0:
            if all(s == 0 for s in sizes):
                break
            continue
        p = tuple(Fraction(rng.randint(1, g)) for _ in range(sizes[i]))
        if p not in grid[i]:
            grid[i].append(p)
            used += 1
    val = delta_on_grid(crit, grid)
    best = (val, [list(p) for p in grid])
    movable = [i for i, s in enumerate(sizes) if s]
    for _ in range(iterations if movable else 0):
        i = rng.choice(movable)
        if not best[1][i]:
            continue
        cand = [list(p) for p in best[1]]
        j = rng.randrange(len(cand[i]))
        p = tuple(Fraction(rng.randint(0, g + 1)) for _ in range(sizes[i]))
        if p in cand[i]:
            continue
        cand[i][j] = p
        val = delta_on_grid(crit, cand)
        if val > best[0]:
            best = (val, cand)
    return best


def configuration_from_grid(simple, crit, grid):
    """Configuration whose J-forced traces include one per edge of E on the grid."""
    parts = [[tuple(as_fraction(v) for v in p) for p in part] for part in grid]
    ranges = crit.block_ranges()
    edges = [x for x in itertools.product(*parts) if crit.contains(sum(x, ()))]
    beta = {}
    for x in edges:
        alpha, _ = crit.witness(sum(x, ()))
        for (lbl, _, _), w in zip(ranges, x):
            key = (lbl, w)
            if key not in beta or alpha > beta[key]:
                beta[key] = alpha
    pts = []
    for (lbl, _, _), part in zip(ranges, parts):
        for w in part:
            if lbl in crit.Jp:
                pts.append((lbl, w))
            else:
                pts.append((lbl, w + (beta.get((lbl, w), Fraction(0)),)))
    return IndexedPointSet.of(pts), len(edges)


def simple_to_json(simple):
    return {
        "param_dim": simple.param_dim,
        "indices": [{"label": ix.label, "kind": ix.kind,
                     "polys": [[fraction_str(v) for v in p] for p in ix.polys]} for ix in simple.indices],
    }


def simple_from_json(obj):
    try:
        return SimpleFamily.build(obj["param_dim"], [(ix["label"], ix["kind"], ix["polys"]) for ix in obj["indices"]])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed simple family: {exc}") from exc
