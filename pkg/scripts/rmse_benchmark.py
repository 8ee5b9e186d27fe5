#!/usr/bin/env python3
"""Full RMSE-reduction benchmark over groups, controllers, and periods.

Equivalent to `tilthex sweep`, kept as a script for interactive tweaking.
Writes per-run CSVs plus summary.csv into the output directory and prints
the reduction table. Expect 10-15 minutes for the default matrix.
"""

import argparse

from tilthex.config import load_config
from tilthex.harness import default_sweep_specs, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=None)
    ap.add_argument("--out-dir", default="benchmark_out")
    args = ap.parse_args()

    cfg = load_config(args.config)
    rows = sweep(default_sweep_specs(cfg), cfg, out_dir=args.out_dir)

    fmt = "{:<6}{:<9}{:>8}{:>13}{:>12}{:>11}{:>11}"
    print(fmt.format("group", "ctrl", "T [s]", "pos RMSE[m]", "quat RMSE",
                     "pos red%", "quat red%"))
    for r in rows:
        print(fmt.format(r["group"], r["controller"], f"{r['period_s']:g}",
                         f"{r['pos_rmse_m']:.4f}", f"{r['quat_rmse']:.5f}",
                         str(r["pos_reduction_pct"]),
                         str(r["quat_reduction_pct"])))
    print(f"\nwrote {args.out_dir}/summary.csv")


if __name__ == "__main__":
    main()
