"""Multiplication counts and complexity gain of SVR-CFA over MUSIC for a range of N.

Also sweeps the unstated log2(P) exponent to show which values reproduce the
reference gains of 11.24 dB (N=3) and 21.76 dB (N=10).
"""

import argparse

from svrcfa.artifacts import emit_complexity
from svrcfa.complexity import cost_report, log2_p_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-min", type=int, default=3)
    ap.add_argument("--n-max", type=int, default=10)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    reports = [cost_report(n) for n in range(args.n_min, args.n_max + 1)]
    print(f"{'N':>3} {'MUSIC':>10} {'SVR-CFA':>8} {'gain dB':>8}")
    for r in reports:
        print(f"{r.n:3d} {r.music_mults:10d} {r.svr_cfa_mults:8d} {r.gain_db:8.3f}")

    print("\nlog2_p  worst |gain - reference| (dB)")
    for k, err in log2_p_sweep({3: 11.24, 10: 21.76}).items():
        print(f"{k:6d}  {err:.4f}{'  <- within 0.01' if err <= 0.01 else ''}")

    for path in emit_complexity(reports, args.out):
        print("wrote", path)


if __name__ == "__main__":
    main()
