"""Lower bounds on shatter functions by searching over configurations."""
import itertools
import math
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .errors import DegenerateFit
from .families import (
    ExponentReport,
    IndexedPointSet,
    TraceReport,
    forced_count_from_traces,
    trace_set,
)

DEFAULT_STRATEGIES = ("curated", "grid", "hill")
HILL_STEPS = (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
HILL_ITERATIONS = 200

# name -> function(family, t) -> list of IndexedPointSet; filled by the corpus
CURATED = {}


def derived_seed(seed, *keys):
    return random.Random(":".join(str(k) for k in (seed,) + keys)).getrandbits(63)


def thread_count():
    try:
        return max(1, int(os.environ.get("SHATTERLAB_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def balanced_split(family, t):
    k = len(family.labels)
    return [t // k + (1 if i < t % k else 0) for i in range(k)]


def compositions(t, k, cap=400):
    if k == 1:
        return [[t]]
    out = []
    for c in itertools.combinations(range(t + k - 1), k - 1):
        parts = []
        prev = -1
        for x in c + (t + k - 1,):
            parts.append(x - prev - 1)
            prev = x
        out.append(parts)
    if len(out) > cap:
        rng = random.Random(f"compositions:{t}:{k}")
        out = rng.sample(out, cap)
    return out


def diagonal_config(family, split):
    pts = []
    for lbl, m, p in zip(family.labels, family.dims, split):
        for k in range(1, p + 1):
            pts.append((lbl, (k,) * m))
    return IndexedPointSet.of(pts)


def grid_points(m, p):
    if m == 0:
        return [()] if p else []
    g = 1
    while g ** m < p:
        g += 1
    return list(itertools.islice(itertools.product(range(g), repeat=m), p))


def grid_config(family, split):
    pts = []
    for lbl, m, p in zip(family.labels, family.dims, split):
        if m == 0 and p > 1:
            return None
        pts.extend((lbl, q) for q in grid_points(m, p))
    return IndexedPointSet.of(pts)


def _zero_dim_ok(family, split):
    return all(m > 0 or p <= 1 for m, p in zip(family.dims, split))


class Objective:
    """Trace count, or the forced count when ``forced`` names components."""

    def __init__(self, family, forced=None):
        self.family = family
        self.forced = tuple(forced) if forced else None
        self.evaluations = 0

    def __call__(self, config):
        self.evaluations += 1
        traces = trace_set(self.family, config)
        if self.forced is None:
            return len(traces)
        return forced_count_from_traces(traces, config, self.forced)


def curated_candidates(family, t, name=None):
    splits = [balanced_split(family, t)]
    if len(family.labels) > 1:
        splits += compositions(t, len(family.labels))
    out = [diagonal_config(family, s) for s in splits if _zero_dim_ok(family, s)]
    if name and name in CURATED:
        out = list(CURATED[name](family, t)) + out
    return out


def grid_candidates(family, t, rng):
    splits = [balanced_split(family, t)]
    if len(family.labels) > 1:
        splits += compositions(t, len(family.labels), cap=60)
    out = []
    for s in splits:
        c = grid_config(family, s)
        if c is not None:
            out.append(c)
    # random subsets of small integer boxes
    for _ in range(8):
        s = splits[rng.randrange(len(splits))]
        pts = []
        ok = True
        for lbl, m, p in zip(family.labels, family.dims, s):
            box = list(itertools.product(range(-2, 3), repeat=m))
            if p > len(box):
                ok = False
                break
            pts.extend((lbl, q) for q in rng.sample(box, p))
        if ok:
            out.append(IndexedPointSet.of(pts))
    return out


def hill_climb(objective, start, score, rng, iterations=HILL_ITERATIONS):
    best, best_score = start, score
    pts = list(best.points)
    if not pts:
        return best, best_score
    for _ in range(iterations):
        j = rng.randrange(len(pts))
        lbl, coords = pts[j]
        if not coords:
            continue
        axis = rng.randrange(len(coords))
        step = rng.choice(HILL_STEPS) * rng.choice((1, -1))
        moved = coords[:axis] + (coords[axis] + step,) + coords[axis + 1:]
        trial = pts[:j] + [(lbl, moved)] + pts[j + 1:]
        try:
            cand = IndexedPointSet.of(trial)
        except ValueError:
            continue
        s = objective(cand)
        if s > best_score:
            best, best_score, pts = cand, s, list(cand.points)
    return best, best_score


def shatter_lower(family, t, strategies=DEFAULT_STRATEGIES, seed=0, forced=None, name=None,
                  hill_iterations=HILL_ITERATIONS):
    """Best trace count found for configurations of size t, with the configuration."""
    start = time.perf_counter()
    rng = random.Random(derived_seed(seed, t, "shatter"))
    objective = Objective(family, forced)
    best = None
    best_score = -1
    best_strategy = None
    if t == 0:
        cfg = IndexedPointSet.of([])
        return TraceReport(0, objective(cfg), cfg, "empty", seed, 0.0)
    candidates = []
    if "curated" in strategies:
        candidates += [("curated", c) for c in curated_candidates(family, t, name)]
    if "grid" in strategies:
        candidates += [("grid", c) for c in grid_candidates(family, t, rng)]
    seen = set()
    for strat, cfg in candidates:
        if cfg.points in seen or len(cfg) != t:
            continue
        seen.add(cfg.points)
        s = objective(cfg)
        if s > best_score:
            best, best_score, best_strategy = cfg, s, strat
    if best is None:
        cfg = diagonal_config(family, balanced_split(family, t))
        best, best_score, best_strategy = cfg, objective(cfg), "curated"
    if "hill" in strategies and hill_iterations:
        hrng = random.Random(derived_seed(seed, t, "hill"))
        cfg, s = hill_climb(objective, best, best_score, hrng, hill_iterations)
        if s > best_score:
            best, best_score, best_strategy = cfg, s, "hill"
    millis = (time.perf_counter() - start) * 1000
    return TraceReport(t, best_score, best, best_strategy, seed, millis)


def loglog_slope(ts, counts):
    xs = [math.log(t) for t in ts]
    ys = [math.log(c) for c in counts]
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    icpt = my - slope * mx
    resid = math.sqrt(sum((y - icpt - slope * x) ** 2 for x, y in zip(xs, ys)) / n)
    return slope, resid


def _sweep_task(args):
    family, t, strategies, seed, forced, name, hill = args
    return shatter_lower(family, t, strategies, seed, forced, name, hill)


def vc_density_estimate(family, t_range, strategies=DEFAULT_STRATEGIES, seed=0, forced=None, name=None,
                        hill_iterations=HILL_ITERATIONS):
    ts = list(t_range)
    if len(ts) < 2:
        raise ValueError("need at least two values of t")
    tasks = [(family, t, tuple(strategies), seed, forced, name, hill_iterations) for t in ts]
    reports = parallel_map(_sweep_task, tasks)
    counts = [r.count for r in reports]
    if len(set(counts)) == 1:
        raise DegenerateFit(f"every count equals {counts[0]}", ExponentReport(ts, counts, 0.0, 0.0, reports))
    slope, resid = loglog_slope(ts, [max(c, 1) for c in counts])
    return ExponentReport(ts, counts, slope, resid, reports)
