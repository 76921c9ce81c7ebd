"""Basic cells, semilinear sets and Fourier-Motzkin elimination."""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from ..errors import DimensionMismatch
from .linear import EQ, LE, LT, Atom, as_point


def _primitive(coeffs, const):
    g = 0
    for c in coeffs:
        g = gcd(g, c)
    if g == 1:
        return coeffs, const
    if const % g == 0:
        return tuple(c // g for c in coeffs), const // g
    return tuple(c // g for c in coeffs), Fraction(const, g)


def _atom(key, val, rel):
    # key is primitive (and sign-normalized for equalities), so an integer
    # constant needs no further normalization
    if type(val) is int:
        return Atom(key, val, rel)
    return Atom.make(key, val, rel)


def _tighter(new, old):
    # same direction: a.x + c REL 0, larger c is the stronger constraint
    if new[0] != old[0]:
        return new[0] > old[0]
    return new[1] == LT and old[1] == LE


def _false_atom(dim):
    return Atom((0,) * dim, 1, LT)


@lru_cache(maxsize=None)
def _false_cell(dim):
    return BasicCell(dim, (), (_false_atom(dim),), ())


@dataclass(frozen=True)
class BasicCell:
    """Conjunction of atoms over R^dim. Build with ``BasicCell.make``."""

    dim: int
    eqs: tuple = ()
    lts: tuple = ()
    les: tuple = ()

    @staticmethod
    def false(dim):
        return _false_cell(dim)

    @staticmethod
    def universe(dim):
        return BasicCell(dim)

    @staticmethod
    def make(dim, atoms):
        eqs = {}
        ineqs = {}
        for a in atoms:
            if a.dim != dim:
                raise DimensionMismatch(f"atom of dim {a.dim} in cell of dim {dim}")
            if not any(a.coeffs):
                if a.constant_truth():
                    continue
                return BasicCell.false(dim)
            key, val = _primitive(a.coeffs, a.const)
            if a.rel == EQ:
                for c in key:
                    if c:
                        if c < 0:
                            key = tuple(-x for x in key)
                            val = -val
                        break
                old = eqs.get(key)
                if old is None:
                    eqs[key] = val
                elif old != val:
                    return BasicCell.false(dim)
            else:
                cur = (val, a.rel)
                old = ineqs.get(key)
                if old is None or _tighter(cur, old):
                    ineqs[key] = cur
        # inequalities parallel to an equality collapse to constants
        if eqs:
            for key in list(ineqs):
                val, rel = ineqs[key]
                neg = tuple(-x for x in key)
                if key in eqs:
                    v = val - eqs[key]
                elif neg in eqs:
                    v = val + eqs[neg]
                else:
                    continue
                if (rel == LT and not v < 0) or (rel == LE and not v <= 0):
                    return BasicCell.false(dim)
                del ineqs[key]
        # opposite pairs: infeasible, or a hidden equality
        for key in list(ineqs):
            if key not in ineqs:
                continue
            neg = tuple(-x for x in key)
            if neg not in ineqs or neg < key:
                continue
            (c1, r1), (c2, r2) = ineqs[key], ineqs[neg]
            s = c1 + c2
            if s > 0 or (s == 0 and (r1 == LT or r2 == LT)):
                return BasicCell.false(dim)
            if s == 0:
                del ineqs[key]
                del ineqs[neg]
                ekey, eval_ = key, c1
                for c in ekey:
                    if c:
                        if c < 0:
                            ekey = neg
                            eval_ = -c1
                        break
                old = eqs.get(ekey)
                if old is not None and old != eval_:
                    return BasicCell.false(dim)
                eqs[ekey] = eval_
        eq_atoms = tuple(sorted(_atom(k, v, EQ) for k, v in eqs.items()))
        lt_atoms = []
        le_atoms = []
        for k, (v, rel) in ineqs.items():
            (lt_atoms if rel == LT else le_atoms).append(_atom(k, v, rel))
        return BasicCell(dim, eq_atoms, tuple(sorted(lt_atoms)), tuple(sorted(le_atoms)))

    @property
    def atoms(self):
        return self.eqs + self.lts + self.les

    @property
    def is_false(self):
        return len(self.lts) == 1 and not any(self.lts[0].coeffs) and self.lts[0].const > 0

    def contains(self, point):
        return all(a.holds(point) for a in self.atoms)

    def conjoin(self, other):
        if other.dim != self.dim:
            raise DimensionMismatch(f"cannot intersect dims {self.dim} and {other.dim}")
        return BasicCell.make(self.dim, self.atoms + other.atoms)

    def with_atoms(self, atoms):
        return BasicCell.make(self.dim, self.atoms + tuple(atoms))

    def relaxed(self):
        return BasicCell.make(self.dim, self.eqs + tuple(a.relaxed() for a in self.lts) + self.les)

    def embed(self, new_dim, positions):
        return BasicCell.make(new_dim, [a.embed(new_dim, positions) for a in self.atoms])

    def substitute(self, fixed):
        fixed = {i: Fraction(v) for i, v in fixed.items()}
        return BasicCell.make(self.dim - len(fixed), [a.substitute(fixed) for a in self.atoms])

    def affine_substitute(self, matrix, offset):
        ncols = len(matrix[0]) if matrix else 0
        return BasicCell.make(ncols, [a.affine_substitute(matrix, offset) for a in self.atoms])

    def is_empty(self):
        return cell_is_empty(self)


def _combine(p, mp, q, mq, rel, k):
    coeffs = tuple(mp * a + mq * b for i, (a, b) in enumerate(zip(p.coeffs, q.coeffs)) if i != k)
    return Atom.make(coeffs, mp * p.const + mq * q.const, rel)


def _drop(a, k):
    return Atom(a.coeffs[:k] + a.coeffs[k + 1:], a.const, a.rel)


def eliminate_cell(cell, k):
    """Project out coordinate ``k`` (the result lives in R^(dim-1))."""
    dim = cell.dim - 1
    if cell.is_false:
        return BasicCell.false(dim)
    pivot = None
    for e in cell.eqs:
        ek = e.coeffs[k]
        if ek and (pivot is None or abs(ek) < abs(pivot.coeffs[k])):
            pivot = e
    out = []
    if pivot is not None:
        ek = pivot.coeffs[k]
        sign = 1 if ek > 0 else -1
        for a in cell.atoms:
            if a is pivot:
                continue
            ak = a.coeffs[k]
            if not ak:
                out.append(_drop(a, k))
            else:
                out.append(_combine(a, abs(ek), pivot, -sign * ak, a.rel, k))
        return BasicCell.make(dim, out)
    pos, neg = [], []
    for a in cell.eqs:
        out.append(_drop(a, k))
    for a in cell.lts + cell.les:
        ak = a.coeffs[k]
        if ak > 0:
            pos.append(a)
        elif ak < 0:
            neg.append(a)
        else:
            out.append(_drop(a, k))
    for p in pos:
        for q in neg:
            rel = LT if (p.rel == LT or q.rel == LT) else LE
            out.append(_combine(p, -q.coeffs[k], q, p.coeffs[k], rel, k))
    return BasicCell.make(dim, out)


def _choose_variable(cell):
    """Variable to eliminate next, or None when no atom involves a variable."""
    best_eq = None
    for e in cell.eqs:
        nz = [i for i, c in enumerate(e.coeffs) if c]
        if nz:
            i = min(nz, key=lambda j: abs(e.coeffs[j]))
            score = (len(nz), abs(e.coeffs[i]))
            if best_eq is None or score < best_eq[0]:
                best_eq = (score, i)
    if best_eq is not None:
        return best_eq[1]
    best = None
    for k in range(cell.dim):
        p = n = 0
        for a in cell.lts + cell.les:
            c = a.coeffs[k]
            if c > 0:
                p += 1
            elif c < 0:
                n += 1
        if p == 0 and n == 0:
            continue
        score = p * n - p - n
        if best is None or score < best[0]:
            best = (score, k)
    return None if best is None else best[1]


@lru_cache(maxsize=400000)
def cell_is_empty(cell):
    if cell.is_false:
        return True
    if not cell.atoms:
        return False
    zero = (0,) * cell.dim
    if all(a.holds(zero) for a in cell.atoms):
        return False
    k = _choose_variable(cell)
    if k is None:
        return False
    return cell_is_empty(eliminate_cell(cell, k))


@lru_cache(maxsize=100000)
def cell_sample(cell):
    """A rational point of the cell, or None when empty.

    Bounded intervals give their midpoint, half-bounded ones bound +/- 1 and
    unconstrained coordinates 0."""
    if cell.is_false:
        return None
    if cell.dim == 0:
        return ()
    k = _choose_variable(cell)
    if k is None:
        return (Fraction(0),) * cell.dim
    sub = cell_sample(eliminate_cell(cell, k))
    if sub is None:
        return None
    fixed = {}
    j = 0
    for i in range(cell.dim):
        if i != k:
            fixed[i] = sub[j]
            j += 1
    value = _pick_value([a.substitute(fixed) for a in cell.atoms])
    if value is None:
        return None
    return sub[:k] + (value,) + sub[k:]


def _pick_value(atoms):
    lo = hi = eq = None
    lo_strict = hi_strict = False
    for a in atoms:
        c = a.coeffs[0]
        if not c:
            if not a.constant_truth():
                return None
            continue
        bound = Fraction(-a.const, c)
        if a.rel == EQ:
            if eq is not None and eq != bound:
                return None
            eq = bound
        elif c > 0:
            strict = a.rel == LT
            if hi is None or bound < hi or (bound == hi and strict):
                hi, hi_strict = bound, strict
        else:
            strict = a.rel == LT
            if lo is None or bound > lo or (bound == lo and strict):
                lo, lo_strict = bound, strict
    if eq is not None:
        return eq
    if lo is not None and hi is not None:
        if lo == hi:
            return None if (lo_strict or hi_strict) else lo
        if lo > hi:
            return None
        return (lo + hi) / 2
    if lo is not None:
        return lo + 1
    if hi is not None:
        return hi - 1
    return Fraction(0)


def cell_subset(c, d):
    """Whether cell c lies inside cell d."""
    for piece in _negation_pieces(d):
        if not cell_is_empty(c.with_atoms(piece)):
            return False
    return True


def _negation_pieces(cell):
    """Disjoint cells covering the complement of a single cell."""
    atoms = cell.atoms
    pieces = []
    for j, atom in enumerate(atoms):
        prefix = atoms[:j]
        for n in atom.negated():
            pieces.append(prefix + (n,))
    return pieces


@dataclass(frozen=True)
class SemilinearSet:
    """Finite union of basic cells in R^dim."""

    dim: int
    cells: tuple = ()

    def __post_init__(self):
        cells = tuple(c for c in self.cells if not c.is_false)
        for c in cells:
            if c.dim != self.dim:
                raise DimensionMismatch(f"cell of dim {c.dim} in set of dim {self.dim}")
        object.__setattr__(self, "cells", cells)

    @staticmethod
    def empty(dim):
        return SemilinearSet(dim, ())

    @staticmethod
    def universe(dim):
        return SemilinearSet(dim, (BasicCell.universe(dim),))

    @staticmethod
    def from_atoms(dim, atoms):
        return SemilinearSet(dim, (BasicCell.make(dim, atoms),))

    @staticmethod
    def from_cells(dim, cells):
        return SemilinearSet(dim, tuple(cells))

    def contains(self, point):
        point = as_point(point)
        if len(point) != self.dim:
            raise DimensionMismatch(f"point of dim {len(point)} tested against set of dim {self.dim}")
        return any(c.contains(point) for c in self.cells)

    def __contains__(self, point):
        return self.contains(point)

    def is_empty(self):
        return all(cell_is_empty(c) for c in self.cells)

    def pruned(self):
        return SemilinearSet(self.dim, tuple(c for c in self.cells if not cell_is_empty(c)))

    def simplified(self):
        """Drop empty, duplicate and absorbed cells (a cell inside another)."""
        cells = []
        for c in self.cells:
            if c not in cells and not cell_is_empty(c):
                cells.append(c)
        for c in cells:
            if not c.atoms:
                return SemilinearSet(self.dim, (c,))
        keep = []
        for i, c in enumerate(cells):
            absorbed = False
            for j, d in enumerate(cells):
                if i != j and (j < i or not cell_subset(d, c)) and cell_subset(c, d):
                    absorbed = True
                    break
            if not absorbed:
                keep.append(c)
        return SemilinearSet(self.dim, tuple(keep))

    def _check(self, other):
        if other.dim != self.dim:
            raise DimensionMismatch(f"dims {self.dim} and {other.dim} differ")

    def intersect(self, other):
        self._check(other)
        out = []
        for a in self.cells:
            for b in other.cells:
                c = a.conjoin(b)
                if not cell_is_empty(c):
                    out.append(c)
        return SemilinearSet(self.dim, tuple(out))

    def union(self, other):
        self._check(other)
        return SemilinearSet(self.dim, self.cells + other.cells)

    def complement(self):
        result = [BasicCell.universe(self.dim)]
        for cell in self.cells:
            if not cell.atoms:
                return SemilinearSet.empty(self.dim)
            pieces = _negation_pieces(cell)
            nxt = []
            for r in result:
                for piece in pieces:
                    c = r.with_atoms(piece)
                    if not cell_is_empty(c):
                        nxt.append(c)
            result = nxt
            if not result:
                break
        return SemilinearSet(self.dim, tuple(result))

    def difference(self, other):
        """Cell-by-cell subtraction; cells of ``other`` that miss a piece leave it whole."""
        self._check(other)
        out = []
        for r in self.cells:
            if cell_is_empty(r):
                continue
            pieces = [r]
            for c in other.cells:
                if not c.atoms:
                    pieces = []
                    break
                nxt = []
                for p in pieces:
                    if cell_is_empty(p.conjoin(c)):
                        nxt.append(p)
                        continue
                    for neg in _negation_pieces(c):
                        q = p.with_atoms(neg)
                        if not cell_is_empty(q):
                            nxt.append(q)
                pieces = nxt
                if not pieces:
                    break
            out.extend(pieces)
        return SemilinearSet(self.dim, tuple(out))

    def symmetric_difference(self, other):
        return self.difference(other).union(other.difference(self))

    def equals(self, other):
        self._check(other)
        return self.difference(other).is_empty() and other.difference(self).is_empty()

    def is_subset(self, other):
        return self.difference(other).is_empty()

    def eliminate(self, k):
        if not 0 <= k < self.dim:
            raise DimensionMismatch(f"no coordinate {k} in dim {self.dim}")
        return SemilinearSet(self.dim - 1, tuple(eliminate_cell(c, k) for c in self.cells))

    def project_out(self, indices):
        s = self
        for k in sorted(indices, reverse=True):
            s = s.eliminate(k)
        return s

    def sample_point(self):
        for c in self.cells:
            p = cell_sample(c)
            if p is not None:
                return p
        return None

    def embed(self, new_dim, positions):
        return SemilinearSet(new_dim, tuple(c.embed(new_dim, positions) for c in self.cells))

    def substitute(self, fixed):
        return SemilinearSet(self.dim - len(fixed), tuple(c.substitute(fixed) for c in self.cells))

    def affine_substitute(self, matrix, offset):
        ncols = len(matrix[0]) if matrix else 0
        return SemilinearSet(ncols, tuple(c.affine_substitute(matrix, offset) for c in self.cells))

    def relaxed_closure(self):
        """Euclidean closure: the union of relaxations of nonempty cells."""
        return SemilinearSet(self.dim, tuple(c.relaxed() for c in self.cells if not cell_is_empty(c)))


def cube_cell(center, radius):
    center = as_point(center)
    radius = Fraction(radius)
    m = len(center)
    atoms = []
    for i, c in enumerate(center):
        e = [0] * m
        e[i] = 1
        atoms.append(Atom.make(e, -c - radius, LT))
        e = [0] * m
        e[i] = -1
        atoms.append(Atom.make(e, c - radius, LT))
    return BasicCell.make(m, atoms)
