"""Command line entry point: ``hdlss-cca {simulate,predict,fit,sample}``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .asymptotics import predicted_limits, theorem1_constants
from .estimator import DEFAULT_RANK_TOL, cca_fit
from .harness import load_config, run_grid, summary_by_cell
from .sampling import generate_dataset, make_stream, read_matrix_csv, write_matrix_csv
from .spiked_model import SpikedParams, build_population_model, joint_sqrt


def _add_model_args(p: argparse.ArgumentParser, d_default: int) -> None:
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--rho", type=float, default=0.7)
    p.add_argument("--sigma2x", type=float, default=1.0)
    p.add_argument("--sigma2y", type=float, default=1.0)
    p.add_argument("--tau2x", type=float, default=1.0)
    p.add_argument("--tau2y", type=float, default=1.0)
    p.add_argument("--theta-x", type=float, default=0.75 * math.pi, help="radians")
    p.add_argument("--theta-y", type=float, default=0.75 * math.pi, help="radians")
    p.add_argument("--d", type=int, default=d_default)


def _params(args) -> SpikedParams:
    return SpikedParams(
        sigma2_x=args.sigma2x, tau2_x=args.tau2x, sigma2_y=args.sigma2y, tau2_y=args.tau2y,
        alpha=args.alpha, rho=args.rho, theta_x=args.theta_x, theta_y=args.theta_y, d=args.d,
    )


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, master_seed=args.seed)
    out = args.out or cfg.out_dir or "results"
    result = run_grid(cfg, threads=args.threads, out_dir=out)
    failed = sum(not r.ok for r in result.records)
    print(f"{len(result.records)} replications ({failed} failed) -> {out}")
    if args.print_summary:
        json.dump(summary_by_cell(result.summary), sys.stdout, indent=2)
        print()
    return 0


def cmd_predict(args) -> int:
    p = _params(args)
    out = predicted_limits(p, args.n).to_dict()
    if p.rho > 0:
        out["theorem1_constants"] = asdict(theorem1_constants(p.sigma2_x, p.sigma2_y, p.rho))
    json.dump(out, sys.stdout, indent=2)
    print()
    return 0


def cmd_fit(args) -> int:
    x = read_matrix_csv(args.x)
    y = read_matrix_csv(args.y)
    est = cca_fit(x, y, center=args.center, rank_tol=args.rank_tol, k=args.components)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(out / "rho_hat.csv", est.rho_hat[:, None])
    write_matrix_csv(out / "psi_x.csv", est.psi_x_hat)
    write_matrix_csv(out / "psi_y.csv", est.psi_y_hat)
    diag = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in est.diagnostics.items()}
    (out / "diagnostics.json").write_text(json.dumps(diag, indent=2) + "\n")
    print(" ".join(f"{r:.6f}" for r in est.rho_hat))
    return 0


def cmd_sample(args) -> int:
    p = _params(args)
    model = build_population_model(p)
    data = generate_dataset(model, joint_sqrt(model), args.n, make_stream(args.seed, 0),
                            seed_record=(args.seed, 0))
    paths = data.to_csv(args.out)
    write_matrix_csv(Path(args.out) / "z.csv", np.vstack([data.z1, data.z2]))
    print(" ".join(str(p) for p in paths))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdlss-cca", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo grid from a TOML config")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", default=None)
    sim.add_argument("--seed", type=int, default=None, help="override master_seed")
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--print-summary", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    pred = sub.add_parser("predict", help="print the d -> infinity limits as JSON")
    _add_model_args(pred, d_default=1000)
    pred.add_argument("--n", type=int, required=True)
    pred.set_defaults(func=cmd_predict)

    fit = sub.add_parser("fit", help="pseudoinverse CCA on two headerless CSV matrices")
    fit.add_argument("--x", required=True, help="d_x x n matrix, rows are variables")
    fit.add_argument("--y", required=True)
    fit.add_argument("--center", action="store_true")
    fit.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    fit.add_argument("--components", type=int, default=None)
    fit.add_argument("--out", default="cca_out")
    fit.set_defaults(func=cmd_fit)

    smp = sub.add_parser("sample", help="draw one data set from the spiked model as CSV")
    _add_model_args(smp, d_default=200)
    smp.add_argument("--n", type=int, required=True)
    smp.add_argument("--seed", type=int, default=0)
    smp.add_argument("--out", default="data")
    smp.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
