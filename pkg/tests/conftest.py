import random
from fractions import Fraction

from hypothesis import strategies as st

from shatterlab.kernel import EQ, LE, LT, Atom, BasicCell, SemilinearSet

RELS = (EQ, LT, LE)


def small_rational(rng, bound=8):
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def random_atom(rng, dim, bound=8, rels=RELS):
    coeffs = [small_rational(rng, bound) for _ in range(dim)]
    if not any(coeffs):
        coeffs[rng.randrange(dim)] = Fraction(1)
    return Atom.make(coeffs, small_rational(rng, bound), rng.choice(rels))


def random_cell(rng, dim, max_atoms=3, bound=8, rels=RELS):
    return BasicCell.make(dim, [random_atom(rng, dim, bound, rels) for _ in range(rng.randint(1, max_atoms))])


def random_set(rng, dim, max_cells=3, max_atoms=3, bound=8, rels=RELS):
    cells = [random_cell(rng, dim, max_atoms, bound, rels) for _ in range(rng.randint(1, max_cells))]
    return SemilinearSet(dim, tuple(cells))


def probe_points(rng, s, count=12, bound=4):
    """Random small rationals plus sample points of the set and its complement."""
    pts = [tuple(Fraction(rng.randint(-bound * 2, bound * 2), rng.randint(1, 2)) for _ in range(s.dim))
           for _ in range(count)]
    for c in s.cells:
        p = SemilinearSet(s.dim, (c,)).sample_point()
        if p is not None:
            pts.append(p)
    q = s.complement().sample_point()
    if q is not None:
        pts.append(q)
    return pts


seeds = st.integers(min_value=0, max_value=10 ** 9)


def rng_of(seed):
    return random.Random(seed)


def random_family(rng, max_components=2, bound=3):
    """Small family: one or two components over R^1 or R^2 with random relations."""
    from shatterlab.families import ParamFamily
    n = rng.randint(1, 2)
    comps = []
    for c in range(rng.randint(1, max_components)):
        m = rng.randint(1, 2)
        comps.append((str(c + 1), m, random_set(rng, m + n, max_cells=2, max_atoms=2, bound=bound)))
    return ParamFamily.build(comps, n)


def random_config(rng, family, max_points=4, labels=None):
    from shatterlab.families import IndexedPointSet
    labels = labels or family.labels
    seen = set()
    for _ in range(rng.randint(0, max_points)):
        lbl = rng.choice(labels)
        seen.add((lbl, tuple(Fraction(rng.randint(-4, 4), 2) for _ in range(family.dim_of(lbl)))))
    return IndexedPointSet.of(sorted(seen))
