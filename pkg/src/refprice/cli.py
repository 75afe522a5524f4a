"""Command-line runner: ``refprice <mode> --config FILE [--out DIR]``.

Exit codes: 0 ok, 1 usage, 2 invalid config, 3 runtime or I/O failure.
Infeasible regions and non-convergent runs are report content, not errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import MODES, ExperimentConfig, bundled_configs, load_config
from .diagnostics import detect_convergence, dist_to_sne, first_hit, state_distance
from .equilibrium import best_response_dynamics, sne_closed_form
from .errors import ConfigurationError, RefPriceError
from .market import MarketParams
from .omd import classify_schedule, simulate, simulate_induced
from .stepsize import (
    const_step_region,
    geometric_rate_bound,
    rate_constant,
    sigma0,
)
from .trajectory import COLUMNS, Trajectory

log = logging.getLogger("refprice")

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _clean(obj):
    """JSON-safe copy: NaN/inf become null, tuples become lists."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating, np.integer)):
        return _clean(obj.item())
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _clean({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)
                       if not isinstance(getattr(obj, f.name), MarketParams)})
    return obj


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    x, xn = dist_to_sne(traj)
    cols = [traj.column(c) for c in COLUMNS] + [x, xn]
    header = list(COLUMNS) + ["x_t", "x_n_t"]
    if traj.yn is not None:
        cols.append(traj.yn)
        header.append("yn")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([str(int(row[0]))] + [_fmt(v) for v in row[1:]])


def read_trajectory_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body])
    return {name: data[:, k] for k, name in enumerate(header)}


def write_matrix_csv(row_name, row_vals, col_name, col_vals, matrix, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if col_name is None:
            w.writerow([row_name, "value"])
            for rv, val in zip(row_vals, matrix):
                w.writerow([_fmt(rv), _fmt(val)])
            return
        w.writerow([f"{row_name}\\{col_name}"] + [_fmt(c) for c in col_vals])
        for rv, line in zip(row_vals, matrix):
            w.writerow([_fmt(rv)] + [_fmt(v) for v in line])


# ---------------------------------------------------------------- mode runners


def _sne_report(params: MarketParams) -> dict:
    s = sne_closed_form(params)
    return {"p1_star": s.p1_star, "p2_star": s.p2_star, "r_star": s.r_star,
            "interior": s.interior, "m": params.m}


def _bound_checks(cfg: ExperimentConfig, traj: Trajectory) -> dict:
    """Configured bound checks on ``x_t``; keys ``geometric`` and ``c_over_t``."""
    from .diagnostics import check_rate_bound

    spec = cfg.diagnostics.get("bounds") or {}
    x, _ = dist_to_sne(traj)
    out = {}
    if "geometric" in spec:
        sigma = float(spec["geometric"].get("sigma", 1.0))
        holds, first = check_rate_bound(x, lambda t: geometric_rate_bound(cfg.market, sigma, t))
        out["geometric"] = {"sigma": sigma, "holds": holds, "first_violation": first}
    if "c_over_t" in spec:
        opts = spec["c_over_t"]
        rep = rate_constant(cfg.market, opts.get("theta_bar"),
                            sigma=float(opts.get("sigma", 2.0)))
        holds, first = check_rate_bound(x, lambda t: rep.c / t)
        out["c_over_t"] = {"c": rep.c, "holds": holds, "first_violation": first}
    return out


def run_simulation(cfg: ExperimentConfig, induced: bool) -> tuple[dict, Trajectory]:
    reg1, reg2 = cfg.build_regularizers()
    s1, s2 = cfg.build_schedules()
    init = cfg.build_init()
    if induced:
        reg_n, sched_n = cfg.build_nature()
        traj = simulate_induced(cfg.market, reg1, reg2, s1, s2, init, cfg.horizon,
                                reg_n=reg_n, sched_n=sched_n)
    else:
        traj = simulate(cfg.market, reg1, reg2, s1, s2, init, cfg.horizon)
    d = cfg.diagnostics
    verdict = None
    if len(traj) >= 2:
        # Short runs are judged on whatever they have.
        verdict = detect_convergence(traj, tol=d["tol"], window=min(int(d["window"]), len(traj)),
                                     osc_tol=d["osc_tol"], sne_tol=d["sne_tol"])
    dist = state_distance(traj)
    report = {
        "mode": cfg.mode,
        "horizon": cfg.horizon,
        "sne": _sne_report(cfg.market),
        "regularizers": [reg1.describe(), reg2.describe()],
        "schedules": list(traj.schedules),
        "schedule_classes": [_clean(classify_schedule(s)) for s in (s1, s2)],
        "verdict": _clean(verdict),
        "final_state": [float(traj.p1[-1]), float(traj.p2[-1]), float(traj.r[-1])],
        "final_distance": float(dist[-1]),
        "first_period_within_1e-3": first_hit(dist, 1e-3),
        "bounds": _bound_checks(cfg, traj),
    }
    return report, traj


def run_best_response(cfg: ExperimentConfig) -> tuple[dict, Trajectory]:
    r1 = float(cfg.analysis.get("best_response", {}).get("r1", cfg.init["r"]))
    traj = best_response_dynamics(cfg.market, r1, cfg.horizon)
    dr = np.diff(traj.r)
    direction = ("constant" if np.all(dr == 0) else "nondecreasing" if np.all(dr >= 0)
                 else "nonincreasing" if np.all(dr <= 0) else "non-monotone")
    dist = state_distance(traj)
    return {
        "mode": cfg.mode,
        "r1": r1,
        "horizon": cfg.horizon,
        "sne": _sne_report(cfg.market),
        "direction": direction,
        "final_state": [float(traj.p1[-1]), float(traj.p2[-1]), float(traj.r[-1])],
        "final_distance": float(dist[-1]),
    }, traj


def run_const_region(cfg: ExperimentConfig) -> dict:
    a = cfg.analysis.get("const_region", {})
    sigma = float(a.get("sigma", 1.0))
    sigma2 = a.get("sigma2")
    target = float(a["m"]) if a.get("m") is not None else cfg.market
    rep = const_step_region(target, sigma, None if sigma2 is None else float(sigma2))
    out = _clean(rep)
    out["mode"] = cfg.mode
    return out


def run_rate_constant(cfg: ExperimentConfig) -> dict:
    a = cfg.analysis.get("rate_constant", {})
    rep = rate_constant(cfg.market, a.get("theta_bar"),
                        horizon_guard=int(a.get("horizon_guard", 10**6)),
                        sigma=float(a.get("sigma", 2.0)))
    out = _clean(rep)
    out["mode"] = cfg.mode
    return out


def _market_variant(base: MarketParams, a: float, theta_max: float) -> MarketParams:
    return dataclasses.replace(base, a=a, theta=(theta_max, 1.0 - theta_max), m=None)


def run_sweep(cfg: ExperimentConfig):
    sw = cfg.sweep
    q = sw["quantity"]
    axes = sw["axes"]
    if q == "sigma0":
        ms = [float(v) for v in axes["m"]]
        vals = []
        for m in ms:
            try:
                vals.append(sigma0(m))
            except RefPriceError:
                vals.append(math.nan)
        return {"mode": cfg.mode, "quantity": q, "m": ms, "values": vals}, ("m", ms, None, None, vals)
    a_vals = [float(v) for v in axes["a"]]
    th_vals = [float(v) for v in axes["theta_max"]]
    opts = cfg.analysis.get("rate_constant", {})
    theta_bar = sw.get("theta_bar")
    sigma = float(opts.get("sigma", 2.0))
    guard = int(opts.get("horizon_guard", 10**6))
    matrix = []
    for a in a_vals:
        line = []
        for th in th_vals:
            try:
                params = _market_variant(cfg.market, a, th)
                rep = rate_constant(params, theta_bar, horizon_guard=guard, sigma=sigma)
                line.append(float(getattr(rep, q)))
            except RefPriceError as exc:
                log.warning("sweep cell a=%g theta_max=%g failed: %s", a, th, exc)
                line.append(math.nan)
        matrix.append(line)
    report = {"mode": cfg.mode, "quantity": q, "a": a_vals, "theta_max": th_vals,
              "values": matrix}
    return report, ("a", a_vals, "theta_max", th_vals, matrix)


def run(cfg: ExperimentConfig, out_dir: Path | None = None) -> dict:
    """Execute one config; write artifacts into ``out_dir`` when given."""
    traj = matrix = None
    if cfg.mode in ("simulate", "simulate-induced"):
        report, traj = run_simulation(cfg, cfg.mode == "simulate-induced")
    elif cfg.mode == "best-response":
        report, traj = run_best_response(cfg)
    elif cfg.mode == "sne":
        report = {"mode": "sne", **_sne_report(cfg.market)}
    elif cfg.mode == "const-region":
        report = run_const_region(cfg)
    elif cfg.mode == "rate-constant":
        report = run_rate_constant(cfg)
    else:
        report, matrix = run_sweep(cfg)
    report = _clean(report)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        if traj is not None:
            write_trajectory_csv(traj, out_dir / "trajectory.csv")
        if matrix is not None:
            write_matrix_csv(*matrix, out_dir / "sweep.csv")
        (out_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
        (out_dir / "config.json").write_text(cfg.dumps() + "\n")
    return report


# ---------------------------------------------------------------- entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="refprice", description="Reference-price duopoly pricing experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--list-configs", action="store_true",
                        help="list bundled configs and exit")
    sub = parser.add_subparsers(dest="mode", parser_class=_Parser)
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run in {mode} mode")
        p.add_argument("--config", default="baseline",
                       help="config path or bundled config name (default: baseline)")
        p.add_argument("--out", type=Path, help="directory for CSV and report files")
        p.add_argument("--horizon", type=int, help="override the horizon T")
        p.add_argument("--quiet", action="store_true", help="do not print the report")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_configs:
        print("\n".join(bundled_configs()))
        return EXIT_OK
    if args.mode is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.horizon is not None and args.horizon < 1:
        print("refprice: error: --horizon must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config)
        cfg = dataclasses.replace(cfg, mode=args.mode)
        if args.horizon is not None:
            cfg = dataclasses.replace(cfg, horizon=args.horizon)
        if args.mode == "sweep" and cfg.sweep is None:
            raise ConfigurationError("sweep mode needs a sweep block", "sweep")
    except FileNotFoundError as exc:
        print(f"refprice: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigurationError as exc:
        print(f"refprice: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out
    if out_dir is None and cfg.output.get("dir"):
        out_dir = Path(cfg.output["dir"])
    try:
        report = run(cfg, out_dir)
    except ConfigurationError as exc:
        print(f"refprice: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RefPriceError, OSError) as exc:
        print(f"refprice: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if not args.quiet:
        print(json.dumps(report, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
