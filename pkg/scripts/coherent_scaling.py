"""Rate vs. relay count with coherent relays: cut-set bounds and DCM.

Usage: python scripts/coherent_scaling.py [--trials 200] [--out results/coherent.csv]
"""

import argparse
import os

from twrelay import SystemConfig
from twrelay.harness import SweepSpec, emit_csv, fit_path, fit_rows, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=0)
    ap.add_argument("--out", default="results/coherent.csv")
    args = ap.parse_args()

    spec = SweepSpec(SystemConfig(M=2, N=2, P=10, P_R=10), "relay_count",
                     [32, 64, 128, 256, 512, 1024, 2048], trials=args.trials, seed=args.seed,
                     metrics=("ub_bc", "ub_mac", "ub_coherent", "dcm"))
    rows = run_sweep(spec, threads=args.threads)
    fits = fit_rows(rows)
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    emit_csv(rows, fits, args.out)

    for (metric, d), f in fits.items():
        print(f"{metric:>12} {d}: {f.slope_bits_per_doubling:.3f} bits per doubling of K "
              f"(r^2 {f.r_squared:.4f})")
    print(f"wrote {args.out} and {fit_path(args.out)}")


if __name__ == "__main__":
    main()
