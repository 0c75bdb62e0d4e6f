"""Command-line interface: simulate | fit | bounds | experiment."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bounds as bounds_mod
from . import experiments as exp_mod
from .estimator import fit as fit_op
from .restrictions import build_basis, pattern_from_json
from .var_core import load_path_csv, make_dgp, save_path_csv, simulate


def _add_dgp_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dgp", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--rho", type=float, required=True,
                   help="spectral radius (exact for DGP3, target otherwise)")
    p.add_argument("--k0", type=int, help="bandwidth (DGP1)")
    p.add_argument("--K", type=int, help="group count (DGP2)")
    p.add_argument("--sigma2", type=float, default=1.0)


def _build_model(args):
    kwargs = {"sigma2": args.sigma2}
    if args.dgp == 3:
        return make_dgp(3, args.d, rho=args.rho, **kwargs)
    return make_dgp(args.dgp, args.d, k0=args.k0, K=args.K,
                    target_rho=args.rho, seed=args.seed, **kwargs)


def cmd_simulate(args) -> int:
    model = _build_model(args)
    path = simulate(model, args.n, args.seed)
    save_path_csv(path, args.out)
    print(f"wrote {path.n + 1} x {path.d} trajectory to {args.out}")
    return 0


def cmd_fit(args) -> int:
    path = load_path_csv(args.csv)
    basis = build_basis(pattern_from_json(args.pattern))
    result = fit_op(path, basis)
    out = result.to_json_str()
    if args.out:
        Path(args.out).write_text(out)
        print(f"wrote fit to {args.out}")
    else:
        print(out)
    return 0


def cmd_bounds(args) -> int:
    model = _build_model(args)
    basis = build_basis(pattern_from_json(args.pattern))
    config = bounds_mod.BoundConfig(delta=args.delta, regime=args.regime)
    report = bounds_mod.bound_report(model, basis, args.n, config)
    rows = [
        ("regime", report.regime),
        ("phase", f"{report.phase} (threshold {report.phase_threshold:.6g})"),
        ("rho / sigma_min", f"{report.rho:.6g} / {report.sigma_min:.6g}"),
        ("m / d / n", f"{report.m} / {report.d} / {report.n}"),
        ("feasible k", report.k_max_feasible),
        ("lambda_max(Gamma_{R,k})", f"{report.lambda_max_gamma_Rk:.6g}"),
        ("kappa", f"{report.kappa:.6g}"),
        ("xi", f"{report.xi:.6g}"),
        ("log det ratio", f"{report.logdet_ratio:.6g}"),
        ("upper bound (general)", f"{report.thm1_bound:.6g}"
         + ("" if report.thm1_condition_ok else "  [n below requirement]")),
        ("upper bound (rate)", f"{report.thm2_bound:.6g}"),
        ("upper bound (phase)", f"{report.thm3_bound:.6g}"),
        ("minimax lower bound", f"{report.lower_bound:.6g} (regime {report.lower_regime})"),
    ]
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v}")
    if args.out:
        Path(args.out).write_text(report.to_json_str())
        print(f"wrote JSON report to {args.out}")
    return 0


def cmd_experiment(args) -> int:
    cfg = exp_mod.config_from_json(Path(args.config).read_text())
    if args.reps is not None:
        cfg.replications = args.reps
    if args.seed is not None:
        cfg.base_seed = args.seed
        if cfg.experiment in exp_mod.PRESETS:
            cfg = exp_mod.PRESETS[cfg.experiment](cfg.replications, args.seed)
    summary = exp_mod.run_experiment(cfg, workers=args.workers)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"{cfg.experiment}.csv"
    exp_mod.emit_csv(summary, csv_path)
    overlay_path = outdir / f"{cfg.experiment}_overlay.csv"
    exp_mod.emit_bound_overlay(summary, bounds_mod.BoundConfig(), overlay_path)
    print(f"wrote {csv_path} and {overlay_path} ({len(summary.rows)} grid points)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="restricted-var",
        description="Restricted VAR estimation, error bounds and experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a VAR trajectory to CSV")
    _add_dgp_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a restricted VAR to a CSV trajectory")
    p.add_argument("--csv", required=True)
    p.add_argument("--pattern", required=True,
                   help='restriction pattern JSON, e.g. {"kind":"banded","d":24,"k0":1}')
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bounds", help="evaluate the theoretical bound stack")
    _add_dgp_args(p)
    p.add_argument("--pattern", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--regime", choices=bounds_mod.REGIMES, default="stable1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("experiment", help="run a replication experiment")
    p.add_argument("--config", required=True,
                   help='JSON config or preset, e.g. {"experiment":"fig1"}')
    p.add_argument("--out", required=True)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
