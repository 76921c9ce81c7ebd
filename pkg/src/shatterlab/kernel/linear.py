"""Exact linear algebra over the rationals and the normalized atom type.

An atom encodes ``a . x + b REL 0`` with ``REL`` one of ``eq``, ``lt``, ``le``.
Coefficients are stored as coprime integers; this keeps hashing cheap and
makes structurally equal atoms compare equal.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from ..errors import ParseError

EQ = "eq"
LT = "lt"
LE = "le"
RELATIONS = (EQ, LT, LE)


def as_fraction(value):
    """Coerce ints, Fractions and ``"p/q"`` strings to ``Fraction``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParseError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {value!r}") from exc
    if isinstance(value, float):
        raise ParseError(f"floats are not accepted as exact rationals: {value!r}")
    raise ParseError(f"not a rational: {value!r}")


def as_point(values):
    return tuple(as_fraction(v) for v in values)


def fraction_str(value):
    value = as_fraction(value)
    return f"{value.numerator}/{value.denominator}"


def _lcm(a, b):
    return a // gcd(a, b) * b


def integerize(values):
    """Scale a rational vector to a coprime integer vector (positive scale)."""
    den = 1
    for v in values:
        den = _lcm(den, v.denominator)
    ints = [int(v * den) for v in values]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return ints


@dataclass(frozen=True, order=True)
class Atom:
    coeffs: tuple
    const: int
    rel: str

    @staticmethod
    def make(coeffs, const, rel):
        if rel not in RELATIONS:
            raise ParseError(f"unknown relation {rel!r}")
        if all(type(c) is int for c in coeffs) and type(const) is int:
            ints = list(coeffs) + [const]
            g = 0
            for v in ints:
                g = gcd(g, v)
            if g > 1:
                ints = [v // g for v in ints]
        else:
            ints = integerize([as_fraction(c) for c in coeffs] + [as_fraction(const)])
        if rel == EQ:
            for v in ints:
                if v:
                    if v < 0:
                        ints = [-w for w in ints]
                    break
        return Atom(tuple(ints[:-1]), ints[-1], rel)

    @property
    def dim(self):
        return len(self.coeffs)

    def is_constant(self):
        return not any(self.coeffs)

    def constant_truth(self):
        c = self.const
        if self.rel == EQ:
            return c == 0
        if self.rel == LT:
            return c < 0
        return c <= 0

    def value(self, point):
        total = Fraction(self.const)
        for c, x in zip(self.coeffs, point):
            if c:
                total += c * x
        return total

    def holds(self, point):
        v = self.value(point)
        if self.rel == EQ:
            return v == 0
        if self.rel == LT:
            return v < 0
        return v <= 0

    def negated(self):
        """Atoms whose disjunction is the negation of this atom."""
        neg = tuple(-c for c in self.coeffs)
        if self.rel == LT:
            return [Atom(neg, -self.const, LE)]
        if self.rel == LE:
            return [Atom(neg, -self.const, LT)]
        return [Atom(self.coeffs, self.const, LT), Atom(neg, -self.const, LT)]

    def relaxed(self):
        if self.rel == LT:
            return Atom(self.coeffs, self.const, LE)
        return self

    def with_rel(self, rel):
        return Atom.make(self.coeffs, self.const, rel)

    def flipped(self):
        """The term negated, same relation."""
        return Atom.make([-c for c in self.coeffs], -self.const, self.rel)

    def vector(self):
        return [Fraction(c) for c in self.coeffs] + [Fraction(self.const)]

    def embed(self, new_dim, positions):
        coeffs = [0] * new_dim
        for c, pos in zip(self.coeffs, positions):
            coeffs[pos] = c
        return Atom(tuple(coeffs), self.const, self.rel)

    def substitute(self, fixed):
        """Fix coordinates given by ``{index: value}`` and drop them."""
        const = Fraction(self.const)
        coeffs = []
        for i, c in enumerate(self.coeffs):
            if i in fixed:
                const += c * fixed[i]
            else:
                coeffs.append(Fraction(c))
        return Atom.make(coeffs, const, self.rel)

    def affine_substitute(self, matrix, offset):
        """Rewrite in new coordinates y where x = matrix @ y + offset."""
        ncols = len(matrix[0]) if matrix else 0
        coeffs = [Fraction(0)] * ncols
        const = Fraction(self.const)
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            row = matrix[i]
            for j in range(ncols):
                if row[j]:
                    coeffs[j] += c * row[j]
            const += c * offset[i]
        return Atom.make(coeffs, const, self.rel)

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}*x{i}")
        terms.append(str(self.const))
        op = {EQ: "=", LT: "<", LE: "<="}[self.rel]
        return " + ".join(terms) + f" {op} 0"


def rref(rows):
    """Reduced row echelon form over Fractions. Returns (rows, pivots)."""
    m = [list(map(Fraction, r)) for r in rows]
    pivots = []
    if not m:
        return [], []
    ncols = len(m[0])
    r = 0
    for col in range(ncols):
        pivot = None
        for i in range(r, len(m)):
            if m[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pv = m[r][col]
        if pv != 1:
            m[r] = [v / pv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows):
    return len(rref(rows)[1]) if rows else 0


def nullspace(rows, ncols):
    """Basis of {v : rows @ v = 0} as tuples of Fractions."""
    red, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return basis


def solve_affine(rows, ncols):
    """Particular solution of the affine system given as [a | b] rows meaning a.x + b = 0.

    Returns None when inconsistent."""
    red, pivots = rref(rows) if rows else ([], [])
    x = [Fraction(0)] * ncols
    for row, p in zip(red, pivots):
        if p == ncols:
            return None
        x[p] = -row[ncols]
    return tuple(x)


def in_row_space(vector, rows):
    if not rows:
        return not any(vector)
    return rank(list(rows) + [list(vector)]) == rank(rows)


def dot(u, v):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))
