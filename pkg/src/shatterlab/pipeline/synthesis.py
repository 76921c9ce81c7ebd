"""Constructive synthesis of uniform closures and essential approximations.

Both synthesizers return a partition of the parameter region into parts,
each carrying the annotation that holds uniformly on it.
"""
import itertools
from dataclasses import dataclass, field

from ..errors import BudgetExceeded
from ..kernel import SemilinearSet
from .parametric import (
    FlatFamily,
    dim_at_least,
    fiber_closure,
    fiber_pieces,
    halfflat_candidates,
    lift,
    merge_regions,
    partition_by,
    project,
    top_fiber_closure,
)

SUBSET_BUDGET = 1 << 12


@dataclass
class ClosurePart:
    region: SemilinearSet
    flats: tuple            # FlatFamily, largest fiber dimension first

    @property
    def alpha(self):
        return max((f.fiber_dim for f in self.flats), default=-1)

    @property
    def beta(self):
        return len(self.flats)


@dataclass
class ApproxPart:
    region: SemilinearSet
    ambient: FlatFamily
    halfflats: tuple
    choice: tuple           # per boundary family: index of chosen candidate, or None
    dims: dict = field(default_factory=dict)   # J -> (dim of X cap P_J, dim of P_J minus X)


def restrict_total(total, m, region):
    return total.intersect(lift(region, m))


def _flat_families(total, m):
    """Distinct total flats of the open pieces, each with the parameters where it occurs."""
    fams = []
    domains = []
    for p in fiber_pieces(total, m):
        fam = FlatFamily(p.flat, m)
        if fam in fams:
            k = fams.index(fam)
            domains[k] = domains[k].union(p.domain)
        else:
            fams.append(fam)
            domains.append(p.domain)
    return fams, domains


def synth_uniform_closure(total, m, region):
    """Partition ``region`` so that the flat closure of the fibers is uniform on each part."""
    total = restrict_total(total, m, region)
    fams, domains = _flat_families(total, m)
    if not fams:
        return [ClosurePart(region.pruned(), ())]
    conds = list(domains)
    pairs = []
    for a, fa in enumerate(fams):
        for b, fb in enumerate(fams):
            if a != b and fa.fiber_dim <= fb.fiber_dim:
                pairs.append((a, b))
                conds.append(fa.contained_in(fb, region))
    nf = len(fams)
    leaves = []
    for bits, part in partition_by(region, conds):
        present = [k for k in range(nf) if bits[k]]
        contained = {}
        for (a, b), bit in zip(pairs, bits[nf:]):
            contained[(a, b)] = bit
        keep = []
        for a in present:
            dominated = False
            for b in present:
                if a == b or not contained.get((a, b)):
                    continue
                if fams[a].fiber_dim < fams[b].fiber_dim:
                    dominated = True
                elif contained.get((b, a)) and b < a:
                    dominated = True
                if dominated:
                    break
            if not dominated:
                keep.append(a)
        keep.sort(key=lambda k: (-fams[k].fiber_dim, k))
        leaves.append((tuple(keep), part))
    return [ClosurePart(r, tuple(fams[k] for k in key)) for key, r in merge_regions(region.dim, leaves)]


def _boundary_parts(total, ambient, region):
    m = ambient.m
    d = ambient.fiber_dim
    rest = restrict_total(ambient.total(), m, region).difference(total)
    esb = top_fiber_closure(total, m, d).intersect(top_fiber_closure(rest, m, d))
    parts = synth_uniform_closure(esb, m, region)
    return [(p.region, tuple(f for f in p.flats if f.fiber_dim == d - 1)) for p in parts]


def essential_condition(total, halfflat, boundary, region):
    """Parameters at which the half-flat is essential for the fiber of ``total``."""
    m = halfflat.m
    h = restrict_total(halfflat.total(), m, region)
    diff = total.symmetric_difference(h)
    witness = restrict_total(boundary.total(), m, region).difference(fiber_closure(diff, m))
    return project(witness, m).pruned()


def cell_of(halfflats, J):
    """Total set P_J: inside each half-flat in J, outside the others (within the ambient)."""
    s = None
    for j, h in enumerate(halfflats):
        part = h.total() if j in J else h.complement_total()
        s = part if s is None else s.intersect(part)
    return s


def synth_essential_approx(total, ambient, region):
    """Partition ``region`` into parts with a uniform essential approximation."""
    m = ambient.m
    d = ambient.fiber_dim
    total = restrict_total(total, m, region)
    out = []
    for breg, bfams in _boundary_parts(total, ambient, region):
        cands = []
        conds = []
        for bf in bfams:
            term = bf.defining_term(ambient)
            cs = halfflat_candidates(ambient, term)
            cands.append(cs)
            conds.extend(essential_condition(total, c, bf, breg) for c in cs)
        labelled = []
        for bits, part in partition_by(breg, conds):
            choice = []
            hs = []
            for k, cs in enumerate(cands):
                pick = None
                for q in range(4):
                    if bits[4 * k + q]:
                        pick = q
                        break
                choice.append(pick)
                if pick is not None:
                    hs.append(cs[pick])
            labelled.append(((tuple(choice), tuple(hs)), part))
        for (choice, hs), part in merge_regions(region.dim, labelled):
            out.extend(_split_by_dims(total, ambient, hs, choice, part, d))
    return out


def _split_by_dims(total, ambient, hs, choice, region, d):
    ell = len(hs)
    if 1 << ell > SUBSET_BUDGET:
        raise BudgetExceeded(f"{1 << ell} cells P_J exceed the subset budget {SUBSET_BUDGET}")
    m = ambient.m
    subsets = [frozenset(c) for r in range(ell + 1) for c in itertools.combinations(range(ell), r)]
    restricted_total = restrict_total(total, m, region)
    conds = []
    layout = []
    for J in subsets:
        if ell:
            pj = restrict_total(cell_of(hs, J), m, region)
        else:
            pj = restrict_total(ambient.total(), m, region)
        inside = pj.intersect(restricted_total)
        outside = pj.difference(restricted_total)
        for which, s in (("in", inside), ("out", outside)):
            for k in range(d + 1):
                conds.append(dim_at_least(s, m, k))
                layout.append((J, which, k))
    labelled = []
    for bits, part in partition_by(region, conds):
        dims = {}
        for (J, which, k), bit in zip(layout, bits):
            cur = dims.setdefault(J, {"in": -1, "out": -1})
            if bit:
                cur[which] = max(cur[which], k)
        key = tuple((J, dims[J]["in"], dims[J]["out"]) for J in subsets)
        labelled.append((key, part))
    parts = []
    for key, part in merge_regions(region.dim, labelled):
        dims = {J: (a, b) for J, a, b in key}
        parts.append(ApproxPart(part, ambient, hs, choice, dims))
    return parts
