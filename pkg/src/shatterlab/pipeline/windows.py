"""Window searches: a cube of points and a cube of parameters on which a
family looks locally like one flat (or one half-flat) family.

Every certificate is re-checked symbolically by ``verify_window``, which
rebuilds the violation sets from the stored cubes alone.
"""
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import SearchBudgetExceeded
from ..kernel import SemilinearSet, cube_cell
from ..kernel.linear import fraction_str
from .parametric import fiber, lift, project

WINDOW_DEPTH = 12
PARAM_SHRINK = 5


@dataclass
class WindowCertificate:
    kind: str                 # "flat" or "halfflat"
    label: str
    center: tuple
    radius: Fraction
    param_center: tuple
    param_radius: Fraction
    checks: dict = field(default_factory=dict)

    def cube(self):
        return SemilinearSet(len(self.center), (cube_cell(self.center, self.radius),))

    def param_cube(self):
        return SemilinearSet(len(self.param_center), (cube_cell(self.param_center, self.param_radius),))

    def to_json(self):
        return {
            "kind": self.kind,
            "label": self.label,
            "cube": {"center": [fraction_str(v) for v in self.center], "radius": fraction_str(self.radius)},
            "params": {"center": [fraction_str(v) for v in self.param_center],
                       "radius": fraction_str(self.param_radius)},
            "checks": self.checks,
        }


def _window_sets(cert, m):
    box = cert.cube()
    n = len(cert.param_center)
    local = box.embed(m + n, list(range(m))).intersect(lift(cert.param_cube(), m))
    return local


def _flat_checks(total, target, others, local, ucube, m):
    checks = {}
    checks["agrees"] = local.intersect(total.symmetric_difference(target.total())).is_empty()
    meets = project(target.total().intersect(local), m)
    checks["meets"] = ucube.difference(meets).is_empty()
    checks["avoids"] = all(local.intersect(w.total()).is_empty() for w in others)
    return checks


def _halfflat_checks(total, target, others, local, ucube, m):
    checks = {}
    checks["agrees"] = local.intersect(total.symmetric_difference(target.total())).is_empty()
    meets = project(target.total().intersect(local), m)
    checks["meets"] = ucube.difference(meets).is_empty()
    ok = True
    ambient = target.ambient.total().intersect(local)
    for h in others:
        full = ambient.difference(h.total()).is_empty()
        none = local.intersect(h.total()).is_empty()
        ok = ok and (full or none)
    checks["others_trivial"] = ok
    return checks


def verify_window(cert, total, target, others, m, region=None):
    """Re-derive every violation set of a certificate and test emptiness."""
    local = _window_sets(cert, m)
    ucube = cert.param_cube()
    if region is not None and not ucube.difference(region).is_empty():
        return False
    if cert.kind == "flat":
        checks = _flat_checks(total, target, others, local, ucube, m)
    else:
        checks = _halfflat_checks(total, target, others, local, ucube, m)
    return all(checks.values())


def _interior_point(region):
    p = region.sample_point()
    if p is None:
        raise SearchBudgetExceeded("parameter region is empty")
    return p


def _search(kind, label, total, target, others, region, m, anchor, depth):
    b0 = _interior_point(region)
    a0 = anchor(b0)
    if a0 is None:
        raise SearchBudgetExceeded(f"no anchor point found for window of {label}")
    n = region.dim
    for k in range(depth + 1):
        r = Fraction(1, 1 << k)
        for j in range(PARAM_SHRINK):
            ru = r / (1 << (2 * j))
            ucube = SemilinearSet(n, (cube_cell(b0, ru),))
            if not ucube.difference(region).is_empty():
                continue
            cert = WindowCertificate(kind, label, tuple(a0), r, tuple(b0), ru)
            local = _window_sets(cert, m)
            if kind == "flat":
                checks = _flat_checks(total, target, others, local, ucube, m)
            else:
                checks = _halfflat_checks(total, target, others, local, ucube, m)
            if all(checks.values()):
                cert.checks = checks
                return cert
    raise SearchBudgetExceeded(
        f"window search for {label} exhausted dyadic depth {depth}; a window always exists, "
        "so raise the depth budget")


def window_flat(total, target, others, region, m, label="", depth=WINDOW_DEPTH):
    """Cube where the fibers agree with ``target`` and avoid every flat in ``others``."""

    def anchor(b0):
        xb = fiber(total, m, b0)
        zb = target.fiber(b0)
        bad = zb.difference(xb).relaxed_closure().union(xb.difference(zb).relaxed_closure())
        for w in others:
            bad = bad.union(w.fiber(b0))
        return zb.difference(bad).sample_point()

    return _search("flat", label, total, target, others, region, m, anchor, depth)


def window_halfflat(total, target, others, region, m, label="", depth=WINDOW_DEPTH):
    """Cube around an essential witness of ``target`` where other half-flats are trivial."""

    def anchor(b0):
        xb = fiber(total, m, b0)
        hb = fiber(target.total(), m, b0)
        bd = fiber(target.boundary().total(), m, b0)
        good = bd.difference(xb.symmetric_difference(hb).relaxed_closure())
        for h in others:
            good = good.difference(fiber(h.boundary().total(), m, b0))
        return good.sample_point()

    return _search("halfflat", label, total, target, others, region, m, anchor, depth)
