"""scikit-learn style wrappers so exponents and trace counts plug into
pipelines, grid searches and cross-validation loops.

Samples are families (``ParamFamily``, their JSON dicts, or paths); the
transformer's samples are configurations of a fixed family.
"""
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import corpus
from .errors import DegenerateFit, ParseError
from .families import IndexedPointSet, ParamFamily, config_from_json, family_from_json, load_json, trace_set
from .pipeline.driver import reduce_to_simple
from .search import DEFAULT_STRATEGIES, HILL_ITERATIONS, vc_density_estimate
from .simple import SimpleFamily, as_param_family


def check_family(obj):
    """Coerce a family-like object to ``ParamFamily``."""
    if isinstance(obj, ParamFamily):
        return obj
    if isinstance(obj, SimpleFamily):
        return as_param_family(obj)
    if isinstance(obj, dict):
        return family_from_json(obj)
    if isinstance(obj, (str, Path)):
        path = corpus.resolve_path(obj)
        if path.exists():
            return family_from_json(load_json(path))
        return corpus.get(str(obj)).family()
    raise ParseError(f"cannot read a family from {type(obj).__name__}")


def check_families(X):
    if isinstance(X, (ParamFamily, SimpleFamily, dict, str, Path)):
        X = [X]
    fams = [check_family(x) for x in X]
    if not fams:
        raise ParseError("no families given")
    return fams


def check_configuration(obj, family=None):
    if isinstance(obj, IndexedPointSet):
        cfg = obj
    elif isinstance(obj, list) and (not obj or isinstance(obj[0], dict)):
        cfg = config_from_json(obj)
    else:
        cfg = IndexedPointSet.of(obj)
    if family is not None:
        cfg.validate(family)
    return cfg


class ShatterExponentEstimator(BaseEstimator):
    """Empirical exponent: log-log slope of searched trace counts over ``t_range``."""

    def __init__(self, t_range=(2, 8), strategies=DEFAULT_STRATEGIES, seed=0, hill_iterations=HILL_ITERATIONS):
        self.t_range = t_range
        self.strategies = strategies
        self.seed = seed
        self.hill_iterations = hill_iterations

    def fit(self, X, y=None):
        fams = check_families(X)
        lo, hi = self.t_range
        self.reports_ = [self._estimate(f, range(lo, hi + 1)) for f in fams]
        self.slopes_ = np.array([r.slope for r in self.reports_])
        return self

    def _estimate(self, family, ts):
        try:
            return vc_density_estimate(family, ts, tuple(self.strategies), self.seed,
                                       hill_iterations=self.hill_iterations)
        except DegenerateFit as exc:
            return exc.report

    def predict(self, X=None):
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "slopes_")
        return np.rint(self.slopes_).astype(int)


class TheoremExponentEstimator(BaseEstimator):
    """Exact exponent from the reduction to simple families; ``fit`` is a no-op."""

    def __init__(self, certify=True, window_depth=12):
        self.certify = certify
        self.window_depth = window_depth

    def fit(self, X=None, y=None):
        self.is_fitted_ = True
        return self

    def predict(self, X):
        fams = check_families(X)
        self.traces_ = [reduce_to_simple(f, self.certify, self.window_depth) for f in fams]
        return np.array([t.exponent for t in self.traces_], dtype=int)

    def score(self, X, y):
        return float(np.mean(self.predict(X) == np.asarray(y)))


class TraceTransformer(TransformerMixin, BaseEstimator):
    """Maps configurations of a fixed family to ``[trace count, |A|]`` rows,
    or to forced counts when ``forced`` lists labels."""

    def __init__(self, family=None, forced=None):
        self.family = family
        self.forced = forced

    def fit(self, X=None, y=None):
        if self.family is None:
            raise ParseError("TraceTransformer needs a family")
        self.family_ = check_family(self.family)
        return self

    def transform(self, X):
        check_is_fitted(self, "family_")
        rows = []
        for obj in X:
            cfg = check_configuration(obj, self.family_)
            traces = trace_set(self.family_, cfg)
            if self.forced:
                masks = [cfg.mask_of(l) for l in self.forced]
                count = sum(1 for tr in traces if all(tr.mask & m for m in masks))
            else:
                count = len(traces)
            rows.append((count, len(cfg)))
        return np.array(rows, dtype=int).reshape(-1, 2)
