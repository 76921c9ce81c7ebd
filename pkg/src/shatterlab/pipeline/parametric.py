"""Fiberwise operations on total sets.

A total set lives in R^(m+n): m point coordinates followed by n parameter
coordinates. Its fiber at b is a semilinear set in R^m. The helpers here
compute, symbolically in b, the fiberwise versions of the kernel notions.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from ..errors import AnnotationInvalid
from ..kernel import EQ, LT, Atom, BasicCell, Flat, SemilinearSet, open_pieces
from ..kernel.linear import in_row_space, rank
from ..kernel.sets import cell_is_empty


def lift(params, m):
    """Parameter set in R^n viewed as {(x, b) : b in params} in R^(m+n)."""
    n = params.dim
    return params.embed(m + n, list(range(m, m + n)))


def project(total, m):
    return total.project_out(range(m)).simplified()


def fiber(total, m, b):
    return total.substitute({m + j: Fraction(v) for j, v in enumerate(b)})


def x_rank(atoms, m):
    return rank([list(map(Fraction, a.coeffs[:m])) for a in atoms])


@dataclass(frozen=True)
class FiberPiece:
    """Relatively open cell of a total set; all its nonempty fibers share one dimension."""

    cell: BasicCell
    m: int

    @property
    def fiber_dim(self):
        return self.m - x_rank(self.cell.eqs, self.m)

    @cached_property
    def domain(self):
        return project(SemilinearSet(self.cell.dim, (self.cell,)), self.m)

    @property
    def flat(self):
        return Flat.from_equations(self.cell.dim, self.cell.eqs)


def fiber_pieces(total, m):
    out = []
    for c in total.cells:
        for p in open_pieces(c):
            out.append(FiberPiece(p, m))
    return out


def fiber_closure(total, m):
    """Total set whose fiber at every b is the closure of the fiber of ``total``."""
    cells = []
    for c in total.cells:
        if cell_is_empty(c):
            continue
        dom = project(SemilinearSet(c.dim, (c,)), m)
        for dc in lift(dom, m).cells:
            cells.append(c.relaxed().conjoin(dc))
    return SemilinearSet(total.dim, tuple(cells))


def top_fiber_closure(total, m, d):
    """Fiberwise union of closures of the d-dimensional pieces."""
    cells = []
    for p in fiber_pieces(total, m):
        if p.fiber_dim != d:
            continue
        for dc in lift(p.domain, m).cells:
            cells.append(p.cell.relaxed().conjoin(dc))
    return SemilinearSet(total.dim, tuple(cells))


def dim_at_least(total, m, k):
    """Parameters whose fiber has dimension at least k."""
    n = total.dim - m
    out = SemilinearSet.empty(n)
    for p in fiber_pieces(total, m):
        if p.fiber_dim >= k:
            out = out.union(p.domain)
    return out


@dataclass(frozen=True)
class FlatFamily:
    """Parametrized flats given by one total flat; fibers are parallel translates."""

    flat: Flat
    m: int

    @property
    def n(self):
        return self.flat.dim - self.m

    @property
    def fiber_dim(self):
        return self.m - x_rank(self.flat.rows, self.m)

    def total(self):
        return self.flat.as_set()

    def fiber(self, b):
        return fiber(self.total(), self.m, b)

    def fiber_flat(self, b):
        atoms = [a.substitute({self.m + j: Fraction(v) for j, v in enumerate(b)}) for a in self.flat.rows]
        return Flat.from_equations(self.m, [a for a in atoms if any(a.coeffs) or a.const])

    def contained_in(self, other, params):
        """Parameters in ``params`` at which this fiber lies inside the other's."""
        outside = self.total().difference(other.total()).intersect(lift(params, self.m))
        return params.difference(project(outside, self.m))

    def defining_term(self, ambient):
        """Row of this flat cutting the ambient fibers in one lower dimension."""
        zx = [list(map(Fraction, r.coeffs[:self.m])) for r in ambient.flat.rows]
        for r in self.flat.rows:
            if not in_row_space(list(map(Fraction, r.coeffs[:self.m])), zx):
                return r
        raise AnnotationInvalid("boundary family does not cut the ambient flat family")


@dataclass(frozen=True)
class HalfFlatFamily:
    ambient: FlatFamily
    cut: Atom

    @property
    def m(self):
        return self.ambient.m

    def total(self):
        return SemilinearSet(self.ambient.flat.dim, (BasicCell.make(self.ambient.flat.dim, self.ambient.flat.rows + (self.cut,)),))

    def complement_total(self):
        """Ambient minus the half-flat, again a single cell."""
        (neg,) = self.cut.negated()
        return SemilinearSet(self.ambient.flat.dim, (BasicCell.make(self.ambient.flat.dim, self.ambient.flat.rows + (neg,)),))

    def boundary(self):
        eq = Atom.make(self.cut.coeffs, self.cut.const, EQ)
        return FlatFamily(self.ambient.flat.intersect_equation(eq), self.m)

    @property
    def strict(self):
        return self.cut.rel == LT


def halfflat_candidates(ambient, term):
    neg = [-c for c in term.coeffs]
    return [
        HalfFlatFamily(ambient, Atom.make(term.coeffs, term.const, "le")),
        HalfFlatFamily(ambient, Atom.make(term.coeffs, term.const, "lt")),
        HalfFlatFamily(ambient, Atom.make(neg, -term.const, "le")),
        HalfFlatFamily(ambient, Atom.make(neg, -term.const, "lt")),
    ]


def partition_by(region, conditions):
    """Split ``region`` by membership in each condition set, pruning empty parts.

    Returns ``(bits, part)`` pairs; ``bits[k]`` says the part lies in condition k."""
    uniq = []
    index = []
    for c in conditions:
        for u, seen in enumerate(uniq):
            if seen == c:
                index.append(u)
                break
        else:
            index.append(len(uniq))
            uniq.append(c)
    comps = [None] * len(uniq)
    leaves = []
    stack = [(region.pruned(), 0, ())]
    while stack:
        part, k, bits = stack.pop()
        if k == len(uniq):
            leaves.append((bits, part))
            continue
        cond = uniq[k]
        if comps[k] is None:
            comps[k] = cond.complement()
        out = part.intersect(comps[k]).simplified()
        inn = part.intersect(cond).simplified()
        if out.cells:
            stack.append((out, k + 1, bits + (False,)))
        if inn.cells:
            stack.append((inn, k + 1, bits + (True,)))
    return [(tuple(bits[index[i]] for i in range(len(conditions))), part) for bits, part in leaves]


def merge_regions(dim, labelled):
    """Group ``(key, region)`` pairs by key, uniting regions; keeps first-seen order."""
    order = []
    groups = {}
    for key, region in labelled:
        if key not in groups:
            groups[key] = SemilinearSet.empty(dim)
            order.append(key)
        groups[key] = groups[key].union(region)
    return [(k, groups[k].simplified()) for k in order]
