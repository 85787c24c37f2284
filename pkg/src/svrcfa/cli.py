"""Command line entry point: ``svrcfa {train,estimate,bench,complexity}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from svrcfa.array import NOISELESS, SourceTruth, simulate_snapshots
from svrcfa.config import ExperimentConfig, load_config
from svrcfa.features import sample_covariance
from svrcfa.linalg import NonConvergence

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGENCE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="INI experiment config")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--out", type=Path, help="output directory (overrides config)")
    p.add_argument("--model", type=Path, help="serialized SVR model")
    p.add_argument("--threads", type=int, help="worker processes (overrides config)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="svrcfa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train the azimuth SVR and write the model file")
    _common(p)
    p.add_argument("--n-elements", type=int, help="override N")

    p = sub.add_parser("estimate", help="estimate one DOA; prints a single JSON line")
    _common(p)
    p.add_argument("--covariance", type=Path, help="N x N complex covariance (numpy savetxt format or .npy)")
    p.add_argument("--theta", type=float, help="simulated source elevation (deg)")
    p.add_argument("--phi", type=float, help="simulated source azimuth (deg)")
    p.add_argument("--snr", type=float, default=10.0, help="simulated SNR in dB; 'inf' for noiseless")
    p.add_argument("--snapshots", type=int, help="simulated snapshot count (default from config)")
    p.add_argument("--music", action="store_true", help="also report the MUSIC estimate")
    p.add_argument("--n-elements", type=int, help="override N for simulated scenarios")

    p = sub.add_parser("bench", help="Monte Carlo RMSE sweeps")
    p.add_argument("sweep", choices=["rmse-vs-snr", "rmse-vs-n"])
    _common(p)
    p.add_argument("--trials", type=int, help="trials per (point, test azimuth)")

    p = sub.add_parser("complexity", help="cost-model table and gain curve")
    p.add_argument("--out", type=Path, help="write complexity.csv/.svg here instead of printing CSV")
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=16)
    p.add_argument("--snapshots", type=int, default=30)
    p.add_argument("--train-size", type=int, default=181)
    p.add_argument("--n-theta", type=int, default=90)
    p.add_argument("--n-phi", type=int, default=181)
    p.add_argument("--log2-p", type=int, default=10)
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out_dir"] = str(args.out)
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        changes["threads"] = args.threads
    if getattr(args, "trials", None) is not None:
        changes["n_trials"] = args.trials
    if getattr(args, "n_elements", None) is not None:
        changes["n_elements"] = args.n_elements
    return cfg.replace(**changes)


def _load_model(args, cfg):
    from svrcfa.bench import train_model
    from svrcfa.svr import load_model

    if args.model is not None and args.model.exists():
        return load_model(args.model)
    return train_model(cfg)


def cmd_train(args) -> int:
    from svrcfa.bench import train_model
    from svrcfa.svr import save_model

    cfg = _config(args)
    model = train_model(cfg)
    path = args.model or Path(cfg.out_dir) / f"svr_n{cfg.n_elements}.model"
    path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, path)
    print(json.dumps({"model": str(path), "n_elements": cfg.n_elements, "n_train": len(model.coefficients),
                      "bias_deg": model.bias_deg, "converged": model.converged}))
    return EXIT_OK


def _read_covariance(path: Path) -> np.ndarray:
    r = np.load(path) if path.suffix == ".npy" else np.loadtxt(path, dtype=complex, ndmin=2)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise UsageError(f"{path}: expected a square matrix, got shape {r.shape}")
    return r


def cmd_estimate(args) -> int:
    from svrcfa.estimator import estimate_doa
    from svrcfa.music import music_estimate

    cfg = _config(args)
    if args.covariance is not None:
        r = _read_covariance(args.covariance)
        cfg = cfg.replace(n_elements=r.shape[0])
        snr = NOISELESS
    elif args.theta is not None and args.phi is not None:
        snr = args.snr
        geom = cfg.geometry()
        x = simulate_snapshots(geom, SourceTruth(args.theta, args.phi), snr, args.snapshots or cfg.n_snapshots,
                               cfg.seed, cfg.signal_power)
        r = sample_covariance(x)
    else:
        raise UsageError("give --covariance FILE or both --theta and --phi")
    model = _load_model(args, cfg)
    if model.n_elements != cfg.n_elements:
        raise UsageError(f"model is for N={model.n_elements}, data has N={cfg.n_elements}")
    geom = cfg.geometry()
    est = estimate_doa(model, geom, r, boresight_tol=cfg.boresight_tol(cfg.n_elements, snr),
                       theta_max_deg=cfg.theta_max_deg, gamma_min=cfg.gamma_min, trim=cfg.trim_fraction)
    out = est.as_dict()
    if args.music:
        m = music_estimate(r, geom, cfg.music_grid())
        out["music"] = {"theta_deg": m.theta_deg, "phi_deg": m.phi_deg, "degenerate_subspace": m.degenerate_subspace}
    print(json.dumps(out))
    return EXIT_OK


def cmd_bench(args) -> int:
    from svrcfa.artifacts import emit_artifacts
    from svrcfa.bench import run_rmse_vs_n, run_rmse_vs_snr

    cfg = _config(args)
    if args.sweep == "rmse-vs-snr":
        records = run_rmse_vs_snr(cfg, _load_model(args, cfg))
        paths = emit_artifacts(records, cfg.out_dir, "rmse_vs_snr", "SNR (dB)", cfg)
    else:
        records = run_rmse_vs_n(cfg)
        paths = emit_artifacts(records, cfg.out_dir, "rmse_vs_n", "N", cfg)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_complexity(args) -> int:
    from svrcfa.artifacts import COMPLEXITY_COLUMNS, emit_complexity
    from svrcfa.complexity import cost_report

    if not 2 <= args.n_min <= args.n_max:
        raise UsageError("need 2 <= --n-min <= --n-max")
    reports = [cost_report(n, args.snapshots, args.train_size, args.n_theta, args.n_phi, args.log2_p)
               for n in range(args.n_min, args.n_max + 1)]
    if args.out is not None:
        for p in emit_complexity(reports, args.out):
            print(p)
    else:
        print(",".join(COMPLEXITY_COLUMNS))
        for r in reports:
            print(f"{r.n},{r.music_mults},{r.svr_cfa_mults},{round(r.gain_db, 6)!r}")
    return EXIT_OK


COMMANDS = {"train": cmd_train, "estimate": cmd_estimate, "bench": cmd_bench, "complexity": cmd_complexity}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"svrcfa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"svrcfa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergence as exc:
        print(f"svrcfa: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
