"""Command-line front end.

Usage::

    firstpassage analytic   --input data/eratyrus_mucronatus.stage --start Egg
    firstpassage montecarlo --input data/eratyrus_mucronatus.stage --replicates 100000 --seed 42 --compare
    firstpassage sweep      --input data/eratyrus_mucronatus.stage --fractions 1,0.5,0.2,0.1 --out sweep.csv
    firstpassage simulate   --input data/eratyrus_mucronatus.stage --trajectories 100000
    firstpassage validate   --input data/eratyrus_mucronatus.counts

Exit codes: 0 success, 2 parse or usage error, 3 validation error,
4 numerical failure, 5 Monte Carlo skip overflow.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time

import numpy as np

from . import __version__
from .chain import passage_time_moments
from .engine import McConfig, run_mc, sweep_sample_fraction
from .errors import MonteCarloError, NumericalError, ParseError, ValidationError
from .formats import load_table, parse_start
from .oracle import simulate_trajectories
from .sampling import RngStream

EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4
EXIT_MC = 5


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _render_rows(rows: list[tuple[str, ...]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for r in rows:
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _load(args):
    table = load_table(args.input, args.format)
    v = parse_start(args.start, table.state_labels)
    return table, v


def _mc_config(args, fraction=None) -> McConfig:
    try:
        return McConfig(
            replicates=args.replicates,
            seed=args.seed,
            fraction=args.fraction if fraction is None else fraction,
            max_skip_ratio=args.max_skip_ratio,
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def cmd_analytic(args) -> str:
    table, v = _load(args)
    m = passage_time_moments(table.point_estimate(v))
    if args.output_format == "json":
        return _json({"states": list(table.state_labels), "start": v.tolist(),
                      "mean": m.mean, "variance": m.variance, "sd": m.sd})
    if args.output_format == "csv":
        return _csv(["mean", "variance", "sd"], [[m.mean, m.variance, m.sd]])
    return _render_rows([
        ("", "Calculated"),
        ("Expected value", _fmt(m.mean)),
        ("Standard deviation", _fmt(m.sd)),
        ("Variance", _fmt(m.variance)),
    ])


def cmd_montecarlo(args) -> str:
    table, v = _load(args)
    cfg = _mc_config(args)
    res = run_mc(table, v, cfg, workers=args.workers)
    exact = passage_time_moments(table.point_estimate(v)) if args.compare else None
    if args.output_format == "json":
        out = {
            "states": list(table.state_labels),
            "start": v.tolist(),
            "config": {"replicates": cfg.replicates, "seed": cfg.seed,
                       "fraction": cfg.fraction, "max_skip_ratio": cfg.max_skip_ratio},
            **res.to_dict(),
        }
        if exact is not None:
            out["analytic"] = {"mean": exact.mean, "variance": exact.variance, "sd": exact.sd}
        return _json(out)
    if args.output_format == "csv":
        header = ["mean_L", "var_L", "sd_L", "mean_of_variances", "variance_of_means",
                  "replicates_used", "replicates_skipped"]
        d = res.to_dict()
        return _csv(header, [[d[h] for h in header]])
    if exact is not None:
        rows = [("", "Calculated", "Monte Carlo"),
                ("Expected value", _fmt(exact.mean), _fmt(res.mean_L)),
                ("Standard deviation", _fmt(exact.sd), _fmt(res.sd_L))]
    else:
        rows = [("", "Monte Carlo"),
                ("Expected value", _fmt(res.mean_L)),
                ("Standard deviation", _fmt(res.sd_L))]
    text = _render_rows(rows)
    text += (f"\n{res.replicates_used} replicates used, {res.replicates_skipped} skipped; "
             f"E[V|U] = {_fmt(res.mean_of_variances)}, V[E|U] = {_fmt(res.variance_of_means)}\n")
    return text


def _parse_fractions(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ParseError(f"bad --fractions value {text!r}") from exc


def cmd_sweep(args) -> str:
    table, v = _load(args)
    cfg = _mc_config(args, fraction=1.0)
    fractions = _parse_fractions(args.fractions)
    try:
        points = sweep_sample_fraction(table, v, cfg, fractions, workers=args.workers)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    header = ["f", "mean_L", "sd_L", "sd_increase_percent", "skipped"]
    rows = [[p.fraction, p.result.mean_L, p.result.sd_L, p.sd_increase_percent,
             p.result.replicates_skipped] for p in points]
    fmt = args.output_format
    if fmt == "table" and args.out:
        fmt = "csv"
    if fmt == "csv":
        return _csv(header, rows)
    if fmt == "json":
        return _json([dict(zip(header, r)) for r in rows])
    return _render_rows([tuple(header)] + [
        (f"{r[0]:g}", _fmt(r[1]), _fmt(r[2]), f"{r[3]:.1f}", str(r[4])) for r in rows
    ])


def cmd_simulate(args) -> str:
    table, v = _load(args)
    spec = table.point_estimate(v)
    L = simulate_trajectories(spec, args.trajectories, RngStream(args.seed))
    mean, var = float(L.mean()), float(L.var(ddof=1)) if L.size > 1 else 0.0
    se = float(np.sqrt(var / L.size))
    exact = passage_time_moments(spec)
    if args.output_format == "json":
        return _json({"trajectories": int(L.size), "seed": args.seed, "mean": mean, "variance": var,
                      "sd": float(np.sqrt(var)), "stderr_mean": se,
                      "analytic": {"mean": exact.mean, "variance": exact.variance, "sd": exact.sd}})
    if args.output_format == "csv":
        return _csv(["trajectories", "mean", "variance", "sd", "stderr_mean", "analytic_mean", "analytic_sd"],
                    [[int(L.size), mean, var, float(np.sqrt(var)), se, exact.mean, exact.sd]])
    return _render_rows([
        ("", "Calculated", "Simulated"),
        ("Expected value", _fmt(exact.mean), _fmt(mean)),
        ("Standard deviation", _fmt(exact.sd), _fmt(float(np.sqrt(var)))),
        ("Std. error of mean", "", _fmt(se)),
    ])


def cmd_validate(args) -> str:
    table, v = _load(args)
    spec = table.point_estimate(v)
    lines = [f"ok: {table.k} transient states ({', '.join(table.state_labels)})"]
    for label, n, a in zip(table.state_labels, table.n, spec.absorption):
        lines.append(f"  {label}: n = {int(n)}, absorption probability = {a:.6f}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="count table file")
    common.add_argument("--format", choices=["generic", "stage"], default=None,
                        help="input format (default: 'stage' for *.stage files, else 'generic')")
    common.add_argument("--start", default=None,
                        help="start state label or comma-separated weights (default: first state)")
    common.add_argument("--output-format", choices=["table", "json", "csv"], default="table")
    common.add_argument("--out", default=None, help="write output to this file instead of stdout")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--replicates", type=int, default=100_000)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--max-skip-ratio", type=float, default=0.01)
    mc.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(prog="firstpassage", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", parents=[common], help="moments from the point estimates")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("montecarlo", parents=[common, mc], help="moments with count-sampling uncertainty")
    p.add_argument("--fraction", type=float, default=1.0, help="sample-size fraction f in (0, 1]")
    p.add_argument("--compare", action="store_true", help="also report the analytic moments")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("sweep", parents=[common, mc], help="standard deviation versus sample-size fraction")
    p.add_argument("--fractions", default="1,0.5,0.2,0.1")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", parents=[common], help="empirical moments from simulated trajectories")
    p.add_argument("--trajectories", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", parents=[common], help="parse and validate the input only")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        text = args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print("validation error:", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MonteCarloError as exc:
        print(f"monte carlo error: {exc}", file=sys.stderr)
        return EXIT_MC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    logging.getLogger(__name__).debug("%s finished in %.3f s", args.command, time.perf_counter() - t0)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
