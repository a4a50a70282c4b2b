"""Command-line interface.

Exit codes: 0 success / no detection, 2 break detected (``monitor`` only),
1 any error including bad usage.  Diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import re
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import boundary, dgp, harness, monitor

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DETECTED = 2

log = logging.getLogger("cointmonitor")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as "detected"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


@dataclass
class DataFrameIn:
    y: np.ndarray
    x: np.ndarray
    dates: list | None
    x_names: list


def read_series_csv(path, y_col: str = "y", x_cols=None, date_col: str | None = None) -> DataFrameIn:
    """Read ``y`` and regressor columns from a header-driven CSV.

    Without ``x_cols`` the regressors are the columns named ``x1, x2, ...``;
    if there are none, every column other than ``y`` and the date column.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise UsageError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise UsageError(f"{path}: empty file") from None
        rows = list(reader)
    if date_col is None and "date" in (h.lower() for h in header):
        date_col = next(h for h in header if h.lower() == "date")
    if y_col not in header:
        raise UsageError(f"{path}: no column named {y_col!r} (line 1)")
    if x_cols is None:
        x_cols = [h for h in header if re.fullmatch(r"x\d+", h)]
        x_cols.sort(key=lambda h: int(h[1:]))
        if not x_cols:
            x_cols = [h for h in header if h not in (y_col, date_col)]
    if not x_cols:
        raise UsageError(f"{path}: no regressor columns")
    missing = [c for c in [*x_cols, *([date_col] if date_col else [])] if c not in header]
    if missing:
        raise UsageError(f"{path}: missing columns {missing} (line 1)")
    iy = header.index(y_col)
    ix = [header.index(c) for c in x_cols]
    idate = header.index(date_col) if date_col else None
    y, x, dates = [], [], []
    for lineno, row in enumerate(rows, 2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise UsageError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            vals = [float(row[iy])] + [float(row[j]) for j in ix]
        except ValueError:
            raise UsageError(f"{path}: line {lineno}: non-numeric value") from None
        if not all(math.isfinite(v) for v in vals):
            raise UsageError(f"{path}: line {lineno}: missing or non-finite value")
        y.append(vals[0])
        x.append(vals[1:])
        if idate is not None:
            dates.append(row[idate].strip())
    return DataFrameIn(y=np.array(y), x=np.array(x, dtype=float).reshape(len(y), len(ix)),
                       dates=dates if idate is not None else None, x_names=list(x_cols))


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_monitor(args) -> int:
    data = read_series_csv(args.csv_path, args.y_col, args.x_cols.split(",") if args.x_cols else None,
                           args.date_col)
    n = data.y.size
    if args.m >= n:
        raise UsageError(f"m={args.m} must be smaller than the number of rows ({n})")
    cfg = monitor.MonitorConfig(m=args.m, T_m=n - args.m, eta=args.eta, alpha=args.alpha, gamma=args.gamma,
                                R=args.R, n_S=args.nS, H=args.H, detrend=args.detrend, seed=args.seed)
    report = monitor.run(data.y, data.x, cfg, k_star=args.k_star, trace=args.trace_out is not None)
    crit = cfg.critical_value()
    out = sys.stdout
    print(f"detected: {'yes' if report.detected else 'no'}", file=out)
    print(f"k_hat: {report.k_hat}", file=out)
    print(f"detection_time: {report.detection_time}", file=out)
    if data.dates is not None:
        print(f"date: {data.dates[report.detection_time - 1]}", file=out)
    print(f"critical_value: {crit.value:.6f} ({crit.source})", file=out)
    if report.detected:
        print(f"d: {report.crossing_d:.6f}", file=out)
        print(f"boundary: {report.crossing_nu:.6f}", file=out)
    if report.delay is not None:
        print(f"delay: {report.delay:.6f}", file=out)
    if args.trace_out:
        monitor.write_trace(args.trace_out, report.trace)
        log.info("trace written to %s", args.trace_out)
    return EXIT_DETECTED if report.detected else EXIT_OK


def cmd_simulate(args) -> int:
    path = Path(args.spec_path)
    if not path.exists() and not path.suffix:
        path = harness.bundled_spec(args.spec_path)
    if not path.exists():
        raise UsageError(f"spec file not found: {args.spec_path}")
    spec = harness.load_spec(path)
    if args.quick:
        spec = spec.quick()
    if args.reps is not None:
        spec = replace(spec, reps=args.reps)
    result = harness.run_experiment(spec, workers=args.workers)
    for p in harness.summarize(result, args.out_dir):
        log.info("wrote %s", p)
    failed = [c for c in result.cells if c.error]
    for c in failed:
        print(f"cell {c.cell_id} failed: {c.error}", file=sys.stderr)
    print(f"{len(result.cells)} cells, {spec.reps} replications each, {result.runtime:.1f}s", file=sys.stdout)
    return EXIT_ERROR if failed else EXIT_OK


def cmd_critvals(args) -> int:
    if any(e == 0.5 for e in args.eta):
        raise UsageError("eta = 0.5 uses the closed-form Gumbel critical value; no simulation needed")
    if any(not 0.0 <= e < 0.5 for e in args.eta):
        raise UsageError("eta values must lie in [0, 0.5)")
    out = Path(args.out) if args.out else boundary.bundled_table_path()
    new = [boundary.crit_sim(e, a, args.paths, args.grid, args.seed) for e in args.eta for a in args.alpha]
    keep = []
    if out.exists() and not args.replace:
        keep = [cv for cv in boundary.read_table(out)
                if not any(math.isclose(cv.eta, n.eta) and math.isclose(cv.alpha, n.alpha) for n in new)]
    boundary.write_table(out, keep + new)
    for cv in new:
        print(f"eta={cv.eta:g} alpha={cv.alpha:g} c={cv.value:.6f}")
    log.info("wrote %s", out)
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.break_kind == "slope":
        mode = dgp.SlopeBreak(args.delta)
    elif args.break_kind == "coint":
        mode = dgp.CointBreak()
    else:
        mode = dgp.NoBreak()
    k_star = args.k_star if args.k_star is not None else (args.m + args.T // 4 if args.break_kind != "none" else args.T)
    spec = dgp.DgpSpec(T=args.T, m=args.m, p=args.p, rho_x=args.rho_x, rho_eps=args.rho_eps,
                       rho_xeps=args.rho_xeps, mu0=args.mu0, mu1=args.mu1, break_mode=mode, k_star=k_star,
                       seed=args.seed)
    dgp.generate(spec).to_csv(args.out)
    log.info("wrote %s", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cointmonitor", description="Sequential monitoring for breaks in cointegrating regressions.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("monitor", help="monitor a CSV series for a break")
    m.add_argument("csv_path")
    m.add_argument("--m", type=int, required=True, help="calibration sample length")
    m.add_argument("--eta", type=float, default=0.45, help="boundary exponent in [0, 0.5] (default 0.45)")
    m.add_argument("--alpha", type=float, default=0.05, help="nominal size (default 0.05)")
    m.add_argument("--gamma", type=float, default=None, help="growth exponent (default 0.45)")
    m.add_argument("--R", type=int, default=None, help="randomisation draws per step (default m)")
    m.add_argument("--nS", type=int, default=2, choices=(1, 2, 4), help="quadrature nodes (default 2)")
    m.add_argument("--H", type=int, default=None, help="Bartlett bandwidth (default floor(m^(1/6)))")
    m.add_argument("--detrend", default="none", choices=("none", "const", "const+trend"))
    m.add_argument("--seed", type=int, default=0, help="randomisation seed (default 0)")
    m.add_argument("--k-star", type=int, default=None, help="known break index, for the delay")
    m.add_argument("--y-col", default="y")
    m.add_argument("--x-cols", default=None, help="comma-separated regressor columns")
    m.add_argument("--date-col", default=None, help="label column (default: 'date' if present)")
    m.add_argument("--trace-out", default=None, help="write the per-step trace CSV here")
    m.set_defaults(func=cmd_monitor)

    s = sub.add_parser("simulate", help="run a Monte Carlo experiment spec")
    s.add_argument("spec_path", help="spec file, or the name of a bundled spec")
    s.add_argument("out_dir")
    s.add_argument("--quick", action="store_true", help=f"cap replications at {harness.QUICK_REPS}")
    s.add_argument("--reps", type=int, default=None, help="override the replication count")
    s.add_argument("--workers", type=int, default=None, help="processes (default $COINTMONITOR_WORKERS or 1)")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("critvals", help="simulate critical values for eta < 0.5")
    c.add_argument("--eta", type=_floats, default=[0.0, 0.25, 0.45, 0.49])
    c.add_argument("--alpha", type=_floats, default=[0.01, 0.05, 0.10])
    c.add_argument("--paths", type=int, default=boundary.DEFAULT_PATHS)
    c.add_argument("--grid", type=int, default=boundary.DEFAULT_GRID)
    c.add_argument("--seed", type=int, default=boundary.DEFAULT_SEED)
    c.add_argument("--out", default=None, help="table CSV (default: the bundled table)")
    c.add_argument("--replace", action="store_true", help="overwrite instead of merging into an existing table")
    c.set_defaults(func=cmd_critvals)

    g = sub.add_parser("generate", help="write a synthetic sample as CSV")
    g.add_argument("out")
    g.add_argument("--T", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--p", type=int, default=1)
    g.add_argument("--rho-x", type=float, default=0.0)
    g.add_argument("--rho-eps", type=float, default=0.0)
    g.add_argument("--rho-xeps", type=float, default=0.0)
    g.add_argument("--mu0", type=float, default=0.0)
    g.add_argument("--mu1", type=float, default=0.0)
    g.add_argument("--break", dest="break_kind", default="none", choices=harness.BREAK_KINDS)
    g.add_argument("--delta", type=float, default=1.0)
    g.add_argument("--k-star", type=int, default=None, help="break index (default m + T/4)")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, harness.SpecError, dgp.ConfigurationError, monitor.InputError) as exc:
        print(f"cointmonitor {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"cointmonitor {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
