"""Rate vs. relay power without relay CSI: non-coherent bound and normalize-and-forward.

Usage: python scripts/noncoherent_scaling.py [--trials 200] [--out results/noncoherent.csv]
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
    ap.add_argument("--K", type=int, default=256)
    ap.add_argument("--out", default="results/noncoherent.csv")
    args = ap.parse_args()

    powers = [10.0 ** e for e in (1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5)]
    spec = SweepSpec(SystemConfig(M=2, N=2, K=args.K), "relay_power", powers,
                     trials=args.trials, seed=args.seed, metrics=("nc_ub", "nc_af"),
                     tie_power=True)
    rows = run_sweep(spec, threads=args.threads)
    fits = fit_rows(rows)
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    emit_csv(rows, fits, args.out)

    for (metric, d), f in fits.items():
        print(f"{metric:>6} {d}: {f.slope_bits_per_doubling:.3f} bits per doubling of P = P_R "
              f"(r^2 {f.r_squared:.4f})")
    print(f"wrote {args.out} and {fit_path(args.out)}")


if __name__ == "__main__":
    main()
