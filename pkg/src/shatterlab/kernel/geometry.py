"""Flats, closures, boundaries and decompositions of semilinear sets."""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from ..errors import ClosureMismatch, ClosureNotAFlat, DimensionMismatch, EmptyInput, NotASubset
from .linear import EQ, LE, LT, Atom, as_point, dot, in_row_space, integerize, nullspace, rref, solve_affine
from .sets import BasicCell, SemilinearSet, cell_is_empty, cell_sample

EMPTY_DIM = -1


@dataclass(frozen=True)
class Flat:
    """Nonempty affine subspace of R^dim, stored as canonical RREF equations."""

    dim: int
    rows: tuple = ()

    @staticmethod
    def from_equations(dim, atoms):
        vectors = [a.vector() for a in atoms if a.dim == dim]
        if len(vectors) != len(atoms):
            raise DimensionMismatch("equation of the wrong dimension")
        red, pivots = rref(vectors) if vectors else ([], [])
        if dim in pivots:
            raise EmptyInput("inconsistent equations define an empty flat")
        rows = []
        for r in red:
            ints = integerize(r)
            rows.append(Atom(tuple(ints[:-1]), ints[-1], EQ))
        return Flat(dim, tuple(rows))

    @staticmethod
    def universe(dim):
        return Flat(dim, ())

    @property
    def affine_dim(self):
        return self.dim - len(self.rows)

    @property
    def direction(self):
        return _flat_direction(self)

    @property
    def point(self):
        return _flat_point(self)

    def contains(self, p):
        p = as_point(p)
        return all(r.value(p) == 0 for r in self.rows)

    def contains_flat(self, other):
        if other.dim != self.dim:
            raise DimensionMismatch("flats live in different spaces")
        p = other.point
        for r in self.rows:
            if r.value(p) != 0:
                return False
            for d in other.direction:
                if dot(r.coeffs, d) != 0:
                    return False
        return True

    def as_cell(self):
        return BasicCell.make(self.dim, self.rows)

    def as_set(self):
        return SemilinearSet(self.dim, (self.as_cell(),))

    def intersect_equation(self, atom):
        return Flat.from_equations(self.dim, self.rows + (atom,))


@lru_cache(maxsize=20000)
def _flat_direction(flat):
    return tuple(nullspace([list(map(Fraction, r.coeffs)) for r in flat.rows], flat.dim))


@lru_cache(maxsize=20000)
def _flat_point(flat):
    return solve_affine([r.vector() for r in flat.rows], flat.dim)


@dataclass(frozen=True)
class HalfFlat:
    """Intersection of a flat with one strict or weak half-space.

    The cut atom must be nonconstant on the flat so the result is a proper
    nonempty subset whose boundary is a flat of one lower dimension."""

    flat: Flat
    cut: Atom

    def __post_init__(self):
        if self.cut.rel not in (LT, LE):
            raise ValueError("half-flat cut must be an inequality")
        if self.cut.dim != self.flat.dim:
            raise DimensionMismatch("cut and flat dimensions differ")
        if all(dot(self.cut.coeffs, d) == 0 for d in self.flat.direction):
            raise EmptyInput("cut is constant on the flat")

    @property
    def dim(self):
        return self.flat.dim

    def as_set(self):
        return SemilinearSet(self.dim, (BasicCell.make(self.dim, self.flat.rows + (self.cut,)),))

    def boundary_flat(self):
        return self.flat.intersect_equation(Atom.make(self.cut.coeffs, self.cut.const, EQ))

    def contains(self, p):
        return self.flat.contains(p) and self.cut.holds(as_point(p))


def dimension_of_cell(cell):
    if cell_is_empty(cell):
        return EMPTY_DIM
    return affine_hull(cell).affine_dim


@lru_cache(maxsize=50000)
def affine_hull(cell):
    """Affine hull of a nonempty cell: its equalities plus implicit ones."""
    if cell_is_empty(cell):
        raise EmptyInput("affine hull of an empty cell")
    eqs = list(cell.eqs)
    weak = list(cell.les)
    changed = True
    current = cell
    while changed:
        changed = False
        for w in list(weak):
            strict = Atom(w.coeffs, w.const, LT)
            if cell_is_empty(current.with_atoms([strict])):
                eqs.append(Atom.make(w.coeffs, w.const, EQ))
                weak.remove(w)
                current = current.with_atoms([eqs[-1]])
                changed = True
    return Flat.from_equations(cell.dim, eqs)


def dimension(s):
    best = EMPTY_DIM
    for c in s.cells:
        if not cell_is_empty(c):
            best = max(best, affine_hull(c).affine_dim)
    return best


def local_dimension(s, point):
    p = as_point(point)
    best = EMPTY_DIM
    for c in s.cells:
        if cell_is_empty(c):
            continue
        if c.relaxed().contains(p):
            best = max(best, affine_hull(c).affine_dim)
    return best


def flat_closure(s):
    """Non-redundant flats whose union is the flat closure, largest first."""
    hulls = []
    for c in s.cells:
        if not cell_is_empty(c):
            h = affine_hull(c)
            if h not in hulls:
                hulls.append(h)
    keep = []
    for h in hulls:
        if any(o is not h and o.affine_dim > h.affine_dim and o.contains_flat(h) for o in hulls):
            continue
        keep.append(h)
    keep.sort(key=lambda f: (-f.affine_dim, f.rows))
    return keep


def flat_closure_set(s):
    out = SemilinearSet.empty(s.dim)
    for f in flat_closure(s):
        out = out.union(f.as_set())
    return out


def single_flat(s):
    flats = flat_closure(s)
    if len(flats) != 1:
        raise ClosureNotAFlat(f"flat closure has {len(flats)} components")
    return flats[0]


def closure(s):
    return s.relaxed_closure()


def _as_set(z):
    if isinstance(z, (Flat, HalfFlat)):
        return z.as_set()
    return z


def boundary_in_flat(s, z):
    zs = _as_set(z)
    if not s.is_subset(zs):
        raise NotASubset("set is not contained in the ambient flat")
    return closure(s).intersect(closure(zs.difference(s)))


def top_closure(s, d):
    """Union of closures of the d-dimensional cells of s."""
    cells = []
    for c in s.cells:
        if not cell_is_empty(c) and affine_hull(c).affine_dim == d:
            cells.append(c.relaxed())
    return SemilinearSet(s.dim, tuple(cells))


def essential_boundary(s):
    z = single_flat(s)
    d = z.affine_dim
    rest = z.as_set().difference(s)
    return top_closure(s, d).intersect(top_closure(rest, d))


def open_pieces(cell):
    """Relatively open cells (equalities and strict inequalities only) covering a cell."""
    if cell_is_empty(cell):
        return []
    base = BasicCell.make(cell.dim, cell.eqs + cell.lts)
    out = []

    def rec(current, rest):
        if not rest:
            out.append(current)
            return
        w = rest[0]
        for atom in (Atom.make(w.coeffs, w.const, EQ), Atom(w.coeffs, w.const, LT)):
            nxt = current.with_atoms([atom])
            if not cell_is_empty(nxt):
                rec(nxt, rest[1:])

    rec(base, list(cell.les))
    return out


def _hyperplanes(s):
    seen = []
    for c in s.cells:
        if cell_is_empty(c):
            continue
        for a in c.atoms:
            h = Atom.make(a.coeffs, a.const, EQ)
            if h not in seen:
                seen.append(h)
    return seen


def cell_decompose(s):
    """Disjoint nonempty relatively open cells whose union is s.

    Cells are the sign-vector faces of the arrangement formed by all atom
    hyperplanes of s, kept when they lie inside s."""
    planes = _hyperplanes(s)
    live = [c for c in s.cells if not cell_is_empty(c)]
    out = []

    def rec(current, idx):
        if not any(not cell_is_empty(current.conjoin(c)) for c in live):
            return
        if idx == len(planes):
            p = cell_sample(current)
            if any(c.contains(p) for c in live):
                out.append(current)
            return
        h = planes[idx]
        for atom in (Atom(h.coeffs, h.const, LT), h, Atom(tuple(-c for c in h.coeffs), -h.const, LT)):
            nxt = current.with_atoms([atom])
            if not cell_is_empty(nxt):
                rec(nxt, idx + 1)

    rec(BasicCell.universe(s.dim), 0)
    return out


def is_essential_halfflat(s, h):
    """Whether some boundary point of h has a cube on which s agrees with h."""
    flats = flat_closure(s)
    if len(flats) != 1 or flats[0] != h.flat:
        raise ClosureMismatch("flat closure of the set is not the ambient flat of the half-flat")
    return not halfflat_witness_set(s, h).is_empty()


def halfflat_witness_set(s, h, method="epsilon"):
    """Boundary points of h near which s coincides with h.

    ``epsilon`` quantifies the cube radius explicitly; ``closure`` uses the
    equivalent description bd(h) minus the closure of the symmetric difference."""
    m = s.dim
    diff = s.symmetric_difference(h.as_set())
    bd = h.boundary_flat().as_set()
    if method == "closure":
        return bd.difference(closure(diff))
    total = 2 * m + 1
    eps = m
    xs = list(range(m + 1, total))
    lifted = diff.embed(total, xs)
    cube = []
    for i in range(m):
        e = [0] * total
        e[xs[i]], e[i], e[eps] = 1, -1, -1
        cube.append(Atom.make(e, 0, LT))
        e = [0] * total
        e[xs[i]], e[i], e[eps] = -1, 1, -1
        cube.append(Atom.make(e, 0, LT))
    bad = lifted.intersect(SemilinearSet.from_atoms(total, cube)).project_out(xs)
    e = [0] * (m + 1)
    e[eps] = -1
    lo = Atom.make(e, 0, LT)
    e = [0] * (m + 1)
    e[eps] = 1
    hi = Atom.make(e, -1, LE)
    good = SemilinearSet.from_atoms(m + 1, [lo, hi]).difference(bad)
    return bd.intersect(good.eliminate(eps))


def defining_term(boundary, ambient):
    """An equation of ``boundary`` not implied by ``ambient``."""
    base = [r.vector() for r in ambient.rows]
    for r in boundary.rows:
        if not in_row_space(r.vector(), base):
            return r
    raise ValueError("boundary flat equals the ambient flat")


def halfflat_candidates(ambient, term):
    neg = [-c for c in term.coeffs]
    return [
        HalfFlat(ambient, Atom.make(term.coeffs, term.const, LE)),
        HalfFlat(ambient, Atom.make(term.coeffs, term.const, LT)),
        HalfFlat(ambient, Atom.make(neg, -term.const, LE)),
        HalfFlat(ambient, Atom.make(neg, -term.const, LT)),
    ]


def essential_approximation(s):
    z = single_flat(s)
    d = z.affine_dim
    if d == 0:
        return []
    esb = essential_boundary(s)
    out = []
    for f in flat_closure(esb):
        if f.affine_dim != d - 1:
            continue
        term = defining_term(f, z)
        for cand in halfflat_candidates(z, term):
            if is_essential_halfflat(s, cand):
                out.append(cand)
                break
    return out
