"""RMSE of SVR-CFA and MUSIC against the number of array elements.

    python3 scripts/rmse_vs_n.py [--config exp.ini] [--trials 200] [--out results]
"""

import argparse
import time

from svrcfa.artifacts import emit_artifacts
from svrcfa.bench import run_rmse_vs_n
from svrcfa.config import ExperimentConfig, load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {k: v for k, v in (("n_trials", args.trials), ("threads", args.threads),
                                   ("seed", args.seed), ("out_dir", args.out)) if v is not None}
    cfg = cfg.replace(**overrides)

    start = time.perf_counter()
    records = run_rmse_vs_n(cfg)
    print(f"{'N':>5} {'phi SVR':>9} {'theta SVR':>10} {'phi MUSIC':>10} {'theta MUSIC':>12}")
    for r in records:
        print(f"{r.axis_value:5.0f} {r.rmse_phi_svr:9.3f} {r.rmse_theta_svr:10.3f} "
              f"{r.rmse_phi_music:10.3f} {r.rmse_theta_music:12.3f}")
    for path in emit_artifacts(records, cfg.out_dir, "rmse_vs_n", "number of elements N", cfg):
        print("wrote", path)
    print(f"{time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
