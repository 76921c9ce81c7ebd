"""Command-line front end: ``shatterlab <command> ...``."""
import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

from . import corpus
from .errors import BudgetExceeded, DegenerateFit, DimensionMismatch, EmptyInput, NotSimple, ParseError
from .families import config_to_json, family_from_json, load_json, trace_count
from .pipeline import synthesis
from .pipeline.driver import reduce_to_simple
from .pipeline.windows import WINDOW_DEPTH
from .search import DEFAULT_STRATEGIES, balanced_split, diagonal_config, shatter_lower, vc_density_estimate
from .simple import delta_on_grid, delta_search, exponent, simple_from_json

EXIT_OK = 0
EXIT_MISMATCH = 2
EXIT_BUDGET = 3
EXIT_PARSE = 4


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def dumps(obj):
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def parse_range(text):
    """``5`` or ``2..8``."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ParseError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def load_family(ref):
    path = corpus.resolve_path(ref)
    if not path.exists():
        if ref in corpus.ENTRIES:
            return corpus.get(ref).family()
        raise ParseError(f"no family file or corpus entry {ref!r}")
    return family_from_json(load_json(path))


def svg_loglog(ts, counts, slope, intercept, title=""):
    """Minimal log-log scatter with the fitted line."""
    w, h, pad = 420, 300, 40
    xs = [math.log(t) for t in ts]
    ys = [math.log(max(c, 1)) for c in counts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys + [intercept + slope * x0]), max(ys + [intercept + slope * x1])
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (w - 2 * pad)

    def py(y):
        return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
           f'<line x1="{pad}" y1="{h - pad}" x2="{w - pad}" y2="{h - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h - pad}" stroke="black"/>',
           f'<text x="{pad}" y="{pad / 2}" font-size="12">{title} slope {slope:.3f}</text>',
           f'<text x="{w / 2}" y="{h - 8}" font-size="11">log t</text>',
           f'<text x="4" y="{h / 2}" font-size="11">log count</text>']
    for x, y in zip(xs, ys):
        out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" fill="steelblue"/>')
    out.append(f'<line x1="{px(x0):.1f}" y1="{py(intercept + slope * x0):.1f}" '
               f'x2="{px(x1):.1f}" y2="{py(intercept + slope * x1):.1f}" stroke="crimson"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


class Report:
    """What a command produced; timing is printed but kept out of written files."""

    def __init__(self, command, seed):
        self.data = {"command": command, "seed": seed}
        self.started = time.perf_counter()
        self.ok = True

    def seconds(self):
        return time.perf_counter() - self.started


def _emit(args, report, name, csv_rows=None, header=None):
    fmt = getattr(args, "format", "json")
    if fmt == "csv" and csv_rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(csv_rows)
        text = buf.getvalue()
        suffix = "csv"
    else:
        text = dumps(report.data)
        suffix = "json"
    if args.out:
        path = Path(args.out) / f"{name}.{suffix}"
        write_atomic(path, text)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)
    print(f"# {report.seconds():.2f}s", file=sys.stderr)


# commands

def cmd_shatter(args):
    family = load_family(args.family)
    ts = parse_range(args.t)
    forced = args.forced.split(",") if args.forced else None
    strategies = tuple(args.strategies.split(",")) if args.strategies else DEFAULT_STRATEGIES
    name = corpus.get(args.family).name if _is_corpus(args.family) else None
    rep = Report(["shatter", args.family, args.t], args.seed)
    rows = []
    reports = []
    if len(ts) >= 2:
        try:
            est = vc_density_estimate(family, ts, strategies, args.seed, forced, name, args.hill_iterations)
        except DegenerateFit as exc:
            est = exc.report
            rep.data["degenerate"] = True
        reports = est.reports
        rep.data["slope"] = est.slope
        rep.data["residual"] = est.residual
        rep.data["nearest_integer"] = est.nearest_integer
        if args.svg and args.out:
            icpt = _intercept(ts, est.counts, est.slope)
            write_atomic(Path(args.out) / "shatter.svg", svg_loglog(ts, est.counts, est.slope, icpt, args.family))
    else:
        reports = [shatter_lower(family, ts[0], strategies, args.seed, forced, name, args.hill_iterations)]
    rep.data["counts"] = []
    for r in reports:
        rep.data["counts"].append({"t": r.t, "count": r.count, "strategy": r.strategy,
                                   "configuration": config_to_json(r.config)})
        millis = f"{r.millis:.0f}" if args.timing else ""
        rows.append([r.t, r.count, ",".join(forced) if forced else "", r.strategy, args.seed, millis])
        print(f"t={r.t} count={r.count} strategy={r.strategy}", file=sys.stderr)
    _emit(args, rep, "shatter", rows, ["t", "count", "forced_J", "strategy", "seed", "millis"])
    return EXIT_OK


def _intercept(ts, counts, slope):
    xs = [math.log(t) for t in ts]
    ys = [math.log(max(c, 1)) for c in counts]
    return sum(ys) / len(ys) - slope * sum(xs) / len(xs)


def _is_corpus(ref):
    try:
        corpus.get(ref)
        return True
    except ParseError:
        return False


def cmd_exponent(args):
    path = corpus.resolve_path(args.family)
    if not path.exists() and _is_corpus(args.family) and corpus.get(args.family).simple is not None:
        simple = corpus.load_simple(args.family)
    else:
        obj = load_json(path)
        if "indices" in obj and obj["indices"] and "polys" in obj["indices"][0]:
            simple = simple_from_json(obj)
        else:
            return cmd_pipeline(args)
    rep = Report(["exponent", args.family], args.seed)
    res = exponent(simple)
    rep.data["exponent"] = res.exponent
    rep.data["certificate"] = res.certificate
    print(f"exponent={res.exponent}", file=sys.stderr)
    _emit(args, rep, "exponent")
    return EXIT_OK


def cmd_pipeline(args):
    family = load_family(args.family)
    budget = getattr(args, "budget_subsets", None)
    depth = getattr(args, "budget_windows", None)
    depth = WINDOW_DEPTH if depth is None else depth
    rep = Report(["pipeline", args.family], args.seed)
    saved = synthesis.SUBSET_BUDGET
    if budget:
        synthesis.SUBSET_BUDGET = budget
    try:
        trace = reduce_to_simple(family, window_depth=depth)
    finally:
        synthesis.SUBSET_BUDGET = saved
    rep.data["exponent"] = trace.exponent
    rep.data["steps"] = len(trace.steps())
    rep.data["certificates"] = len(trace.certificates())
    trace_out = getattr(args, "trace_out", None)
    if trace_out:
        write_atomic(trace_out, dumps(trace.to_json()))
        rep.data["trace"] = str(trace_out)
    print(f"exponent={trace.exponent}", file=sys.stderr)
    _emit(args, rep, "pipeline")
    return EXIT_OK


def _load_relation(ref):
    if _is_corpus(ref) and corpus.get(ref).kind == "relation":
        return corpus.get(ref).relation()
    from .simple import BlockRelation
    from .kernel import set_from_json
    obj = load_json(corpus.resolve_path(ref))
    try:
        return BlockRelation(tuple((b["label"], b["size"]) for b in obj["blocks"]), set_from_json(obj["relation"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed relation: {exc}") from exc


def cmd_delta(args):
    rel = _load_relation(args.relation)
    rep = Report(["delta", args.relation], args.seed)
    rows = []
    if args.k is not None:
        for k in parse_range(args.k):
            grid = corpus.rational_grid(k)
            val = delta_on_grid(rel, grid)
            rows.append([sum(len(p) for p in grid), val, f"grid k={k}"])
    else:
        for t in parse_range(args.t):
            val, _ = delta_search(rel, t, args.seed)
            rows.append([t, val, "search"])
    rep.data["delta"] = [{"t": t, "edges": v, "grid": g} for t, v, g in rows]
    _emit(args, rep, "delta", rows, ["t", "edges", "grid"])
    return EXIT_OK


def reproduce(name, seed=0, k=None):
    """Run an entry's documented checks; returns (report data, all passed)."""
    entry = corpus.get(name)
    checks = []

    def record(what, want, got):
        checks.append({"check": what, "expected": want, "got": got, "ok": want == got})

    if entry.kind == "relation":
        rel = entry.relation()
        ks = [k] if k is not None else sorted(entry.checks["edges"])
        for kk in ks:
            want = kk ** 3
            record(f"edges k={kk}", want, delta_on_grid(rel, corpus.rational_grid(kk)))
    else:
        family = entry.family()
        for t, want in entry.checks.get("diagonal", {}).items():
            got = trace_count(family, diagonal_config(family, balanced_split(family, t)))
            record(f"diagonal t={t}", want, got)
        for t, want in entry.checks.get("count", {}).items():
            record(f"count t={t}", want, shatter_lower(family, t, seed=seed, name=entry.name).count)
        if entry.expected_exponent is not None:
            trace = reduce_to_simple(family)
            record("pipeline exponent", entry.expected_exponent, trace.exponent)
        if entry.simple is not None:
            record("simple exponent", entry.expected_exponent, exponent(corpus.load_simple(name)).exponent)
    data = {"entry": entry.name, "provenance": entry.provenance, "seed": seed, "checks": checks}
    return data, all(c["ok"] for c in checks)


def cmd_reproduce(args):
    rep = Report(["reproduce", args.name], args.seed)
    data, ok = reproduce(args.name, args.seed, args.k)
    rep.data.update(data)
    for c in data["checks"]:
        print(f"{'PASS' if c['ok'] else 'FAIL'} {c['check']}: expected {c['expected']} got {c['got']}",
              file=sys.stderr)
    _emit(args, rep, f"reproduce-{data['entry']}",
          [[c["check"], c["expected"], c["got"], c["ok"]] for c in data["checks"]],
          ["check", "expected", "got", "ok"])
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_list(args):
    for e in corpus.ENTRIES.values():
        s = "-" if e.expected_exponent is None else e.expected_exponent
        print(f"{e.name:24s} {e.kind:8s} s={s} ({e.provenance})  {e.description}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="shatterlab", description="Exact shatter functions of semilinear families.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="directory for report files")
        sp.add_argument("--format", choices=("csv", "json"), default="json")

    sp = sub.add_parser("shatter", help="lower bounds on the shatter function")
    common(sp)
    sp.add_argument("--family", required=True)
    sp.add_argument("--t", required=True, help="size or range lo..hi")
    sp.add_argument("--forced", default=None, help="comma-separated labels that must be hit")
    sp.add_argument("--strategies", default=None)
    sp.add_argument("--hill-iterations", type=int, default=200)
    sp.add_argument("--svg", action="store_true")
    sp.add_argument("--timing", action="store_true", help="fill the millis column")
    sp.set_defaults(fn=cmd_shatter)

    sp = sub.add_parser("exponent", help="exponent of a simple family (or of any family via the pipeline)")
    common(sp)
    sp.add_argument("--family", required=True)
    sp.set_defaults(fn=cmd_exponent)

    sp = sub.add_parser("pipeline", help="reduce a family to simple families")
    common(sp)
    sp.add_argument("--family", required=True)
    sp.add_argument("--budget-windows", type=int, default=WINDOW_DEPTH)
    sp.add_argument("--budget-subsets", type=int, default=1 << 12)
    sp.add_argument("--trace-out", default=None)
    sp.set_defaults(fn=cmd_pipeline)

    sp = sub.add_parser("delta", help="edges of a block relation on grids")
    common(sp)
    sp.add_argument("--relation", default="prop-rational-grid")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--t")
    g.add_argument("--k")
    sp.set_defaults(fn=cmd_delta)

    sp = sub.add_parser("reproduce", help="run the documented checks of a corpus entry")
    common(sp)
    sp.add_argument("name")
    sp.add_argument("--k", type=int, default=None)
    sp.set_defaults(fn=cmd_reproduce)

    sp = sub.add_parser("list", help="list corpus entries")
    sp.set_defaults(fn=cmd_list)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ParseError, DimensionMismatch, EmptyInput, NotSimple, FileNotFoundError, ValueError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
