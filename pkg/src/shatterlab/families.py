"""Parametrized semilinear families in composite spaces, and their traces."""
import itertools
import json
from dataclasses import dataclass, field

from .errors import DimensionMismatch, EmptyInput, EmptyRestriction, ParamOutsideY, ParseError
from .kernel import SemilinearSet, as_point, set_from_json, set_to_json
from .kernel.linear import fraction_str


@dataclass(frozen=True)
class CompositeSpace:
    labels: tuple
    dims: tuple

    def dim_of(self, label):
        return self.dims[self.labels.index(label)]


@dataclass(frozen=True)
class ParamFamily:
    """Components ``label -> relation`` where each relation lives in R^(m_i + n).

    Coordinates of a relation are the point coordinates followed by the
    parameter coordinates. The member at parameter b is the fiber at b."""

    labels: tuple
    dims: tuple
    param_dim: int
    param_set: SemilinearSet
    relations: tuple

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ParseError("duplicate component labels")
        if not (len(self.labels) == len(self.dims) == len(self.relations)):
            raise DimensionMismatch("labels, dims and relations must align")
        if self.param_set.dim != self.param_dim:
            raise DimensionMismatch("parameter set dimension differs from param_dim")
        for m, rel in zip(self.dims, self.relations):
            if rel.dim != m + self.param_dim:
                raise DimensionMismatch(f"relation of dim {rel.dim}, expected {m + self.param_dim}")

    @staticmethod
    def build(components, param_dim, param_set=None):
        """``components`` is a list of ``(label, m, relation)`` triples."""
        if param_set is None:
            param_set = SemilinearSet.universe(param_dim)
        labels = tuple(str(c[0]) for c in components)
        dims = tuple(int(c[1]) for c in components)
        rels = tuple(c[2] for c in components)
        return ParamFamily(labels, dims, param_dim, param_set, rels)

    @property
    def space(self):
        return CompositeSpace(self.labels, self.dims)

    def index(self, label):
        return self.labels.index(label)

    def relation(self, label):
        return self.relations[self.index(label)]

    def dim_of(self, label):
        return self.dims[self.index(label)]

    def components(self):
        return list(zip(self.labels, self.dims, self.relations))

    def member(self, label, b):
        """The fiber of one component at parameter b, a set in R^m."""
        i = self.index(label)
        m = self.dims[i]
        b = as_point(b)
        return self.relations[i].substitute({m + j: v for j, v in enumerate(b)})

    def fiber(self, b):
        """Every member at parameter b, as ``label -> set``."""
        b = as_point(b)
        if len(b) != self.param_dim:
            raise DimensionMismatch(f"parameter of dim {len(b)}, expected {self.param_dim}")
        if not self.param_set.contains(b):
            raise ParamOutsideY(f"parameter {b} lies outside the parameter set")
        return {lbl: self.member(lbl, b) for lbl in self.labels}

    def membership_set(self, label, coords):
        """Parameters b whose member contains the point: substitute x = coords."""
        i = self.index(label)
        coords = as_point(coords)
        if len(coords) != self.dims[i]:
            raise DimensionMismatch(f"point of dim {len(coords)} in component of dim {self.dims[i]}")
        return self.relations[i].substitute(dict(enumerate(coords)))

    def replace(self, **changes):
        data = dict(labels=self.labels, dims=self.dims, param_dim=self.param_dim,
                    param_set=self.param_set, relations=self.relations)
        data.update(changes)
        return ParamFamily(**data)


@dataclass(frozen=True)
class IndexedPointSet:
    """Finite configuration: ``(label, coords)`` pairs sorted by label then coords."""

    points: tuple

    def __post_init__(self):
        pts = tuple(sorted((str(lbl), as_point(c)) for lbl, c in self.points))
        if len(set(pts)) != len(pts):
            raise ParseError("duplicate point within one component")
        object.__setattr__(self, "points", pts)

    @staticmethod
    def of(pairs):
        return IndexedPointSet(tuple(pairs))

    def __len__(self):
        return len(self.points)

    def in_component(self, label):
        return [c for lbl, c in self.points if lbl == label]

    def mask_of(self, label):
        mask = 0
        for j, (lbl, _) in enumerate(self.points):
            if lbl == label:
                mask |= 1 << j
        return mask

    def validate(self, family):
        for lbl, c in self.points:
            if lbl not in family.labels:
                raise ParseError(f"unknown component {lbl!r}")
            if len(c) != family.dim_of(lbl):
                raise DimensionMismatch(f"point {c} has wrong dimension for component {lbl!r}")


@dataclass
class Trace:
    """Pattern bitmask over the sorted points, plus the parameters realizing it."""

    mask: int
    witness_region: SemilinearSet

    def pattern(self, config):
        return frozenset(p for j, p in enumerate(config.points) if self.mask >> j & 1)


@dataclass
class TraceReport:
    t: int
    count: int
    config: IndexedPointSet
    strategy: str
    seed: int
    millis: float
    forced: dict = field(default_factory=dict)


@dataclass
class ExponentReport:
    ts: list
    counts: list
    slope: float
    residual: float
    reports: list = field(default_factory=list)

    @property
    def nearest_integer(self):
        return int(round(self.slope))


def _check_config(family, config):
    if family.param_set.is_empty():
        raise EmptyInput("parameter set is empty")
    config.validate(family)


def trace_set(family, config):
    """Every trace pattern of the family on the configuration, exactly.

    Depth first: each point splits the current parameter region into the part
    whose members contain it (explored first) and the rest; empty regions are
    pruned, and each leaf is one pattern with its witness region."""
    _check_config(family, config)
    pts = config.points
    inside = [family.membership_set(lbl, c) for lbl, c in pts]
    out = []
    stack = [(family.param_set.pruned(), 0, 0)]
    while stack:
        region, j, mask = stack.pop()
        if j == len(pts):
            out.append(Trace(mask, region))
            continue
        rest = region.difference(inside[j])
        if rest.cells:
            stack.append((rest, j + 1, mask))
        hit = region.intersect(inside[j])
        if hit.cells:
            stack.append((hit, j + 1, mask | 1 << j))
    return out


def trace_count(family, config):
    return len(trace_set(family, config))


def forced_trace_set(family, config, forced):
    _check_config(family, config)
    masks = [config.mask_of(lbl) for lbl in forced]
    return [tr for tr in trace_set(family, config) if all(tr.mask & m for m in masks)]


def forced_count_from_traces(traces, config, forced):
    masks = [config.mask_of(lbl) for lbl in forced]
    return sum(1 for tr in traces if all(tr.mask & m for m in masks))


def exact_hit_partition(traces, config, labels):
    """Group trace masks by the set of components they hit."""
    groups = {}
    for tr in traces:
        hit = frozenset(lbl for lbl in labels if tr.mask & config.mask_of(lbl))
        groups.setdefault(hit, []).append(tr.mask)
    return groups


def sauer_shelah_check(traces, config):
    """Empirical VC dimension of the trace family and whether the Sauer-Shelah bound holds."""
    masks = {tr.mask if hasattr(tr, "mask") else tr for tr in traces}
    t = len(config)
    vc = 0
    for d in range(1, t + 1):
        found = False
        for subset in itertools.combinations(range(t), d):
            s = 0
            for j in subset:
                s |= 1 << j
            if len({m & s for m in masks}) == 1 << d:
                found = True
                break
        if not found:
            break
        vc = d
    bound = sum(_binom(t, i) for i in range(vc + 1))
    return vc, len(masks) <= bound


def _binom(n, k):
    from math import comb
    return comb(n, k)


def clone(family, ell):
    """Each component repeated ``ell`` times under labels ``label:j``."""
    comps = []
    for lbl, m, rel in family.components():
        for j in range(1, ell + 1):
            comps.append((f"{lbl}:{j}", m, rel))
    return ParamFamily.build(comps, family.param_dim, family.param_set)


def boolean_extend(family, labels, table, new_label):
    """Append a component defined pointwise by a Boolean function of others.

    ``table`` is a callable on a tuple of booleans, or a sequence indexed by
    the bitmask whose bit k says membership in ``labels[k]``."""
    if not labels:
        raise ValueError("boolean extension needs at least one component")
    if new_label in family.labels:
        raise ParseError(f"label {new_label!r} already used")
    dims = {family.dim_of(lbl) for lbl in labels}
    if len(dims) != 1:
        raise DimensionMismatch("boolean extension over components of different dimensions")
    m = dims.pop()
    k = len(labels)
    if callable(table):
        rows = [bool(table(tuple(bool(v >> i & 1) for i in range(k)))) for v in range(1 << k)]
    else:
        rows = [bool(x) for x in table]
        if len(rows) != 1 << k:
            raise ValueError(f"truth table needs {1 << k} rows, got {len(rows)}")
    rels = [family.relation(lbl) for lbl in labels]
    comps = [r.complement() for r in rels]
    total = m + family.param_dim
    out = SemilinearSet.empty(total)
    for v, val in enumerate(rows):
        if not val:
            continue
        part = SemilinearSet.universe(total)
        for i in range(k):
            part = part.intersect(rels[i] if v >> i & 1 else comps[i])
            if not part.cells:
                break
        out = out.union(part)
    return ParamFamily.build(family.components() + [(new_label, m, out)], family.param_dim, family.param_set)


def restrict_params(family, region):
    new = family.param_set.intersect(region)
    if new.is_empty():
        raise EmptyRestriction("restricted parameter set is empty")
    return family.replace(param_set=new)


def component_restrict(family, labels):
    missing = [lbl for lbl in labels if lbl not in family.labels]
    if missing:
        raise ParseError(f"unknown components {missing}")
    comps = [c for c in family.components() if c[0] in labels]
    return ParamFamily.build(comps, family.param_dim, family.param_set)


def family_to_json(family):
    return {
        "indices": [{"label": lbl, "dim": m, "relation": set_to_json(rel)} for lbl, m, rel in family.components()],
        "param_dim": family.param_dim,
        "param_set": set_to_json(family.param_set),
    }


def family_from_json(obj):
    try:
        n = obj["param_dim"]
        comps = [(str(c["label"]), int(c["dim"]), set_from_json(c["relation"])) for c in obj["indices"]]
        pset = set_from_json(obj["param_set"]) if "param_set" in obj else SemilinearSet.universe(n)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed family: {exc}") from exc
    return ParamFamily.build(comps, n, pset)


def config_to_json(config):
    return [{"index": lbl, "coords": [fraction_str(v) for v in c]} for lbl, c in config.points]


def config_from_json(obj):
    try:
        return IndexedPointSet.of((str(p["index"]), p["coords"]) for p in obj)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed configuration: {exc}") from exc


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
