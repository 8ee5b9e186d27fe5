#!/usr/bin/env python3
"""Plot a per-run CSV: position/attitude tracking and, when logged, the
estimated wrench uncertainty traces. Needs matplotlib."""

import argparse
import csv

import numpy as np


def load(path):
    with open(path) as fh:
        reader = csv.reader(fh)
        cols = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    return cols, data


def euler_from_quat(q):
    w, x, y, z = q.T
    roll = np.arctan2(2 * (w * x + y * z), 1 - 2 * (x * x + y * y))
    pitch = np.arcsin(np.clip(2 * (w * y - x * z), -1, 1))
    yaw = np.arctan2(2 * (w * z + x * y), 1 - 2 * (y * y + z * z))
    return np.stack([roll, pitch, yaw], axis=1)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="per-run CSV written by `tilthex run --out`")
    ap.add_argument("--save", default=None, help="save figure instead of showing")
    args = ap.parse_args()

    import matplotlib

    if args.save:
        matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cols, data = load(args.csv)
    c = {name: i for i, name in enumerate(cols)}
    t = data[:, c["t"]]
    p = data[:, [c["p_x"], c["p_y"], c["p_z"]]]
    p_ref = data[:, [c["p_ref_x"], c["p_ref_y"], c["p_ref_z"]]]
    eul = euler_from_quat(data[:, [c[f"q_{a}"] for a in "wxyz"]])
    eul_ref = euler_from_quat(data[:, [c[f"q_ref_{a}"] for a in "wxyz"]])

    has_sigma = "sigma_0" in c
    has_ekf = "f_ekf_0" in c
    nrows = 3 if (has_sigma or has_ekf) else 2
    fig, axes = plt.subplots(nrows, 3, figsize=(13, 3 * nrows), sharex=True)

    for i, name in enumerate("xyz"):
        axes[0, i].plot(t, p_ref[:, i], "k--", lw=1, label="ref")
        axes[0, i].plot(t, p[:, i], lw=1, label="actual")
        axes[0, i].set_ylabel(f"{name} [m]")
    axes[0, 0].legend(loc="best", fontsize=8)
    for i, name in enumerate(("roll", "pitch", "yaw")):
        axes[1, i].plot(t, np.rad2deg(eul_ref[:, i]), "k--", lw=1)
        axes[1, i].plot(t, np.rad2deg(eul[:, i]), lw=1)
        axes[1, i].set_ylabel(f"{name} [deg]")
    if has_sigma:
        names = ("force x", "force y", "force z")
        for i in range(3):
            axes[2, i].plot(t, data[:, c[f"sigma_{i}"]], lw=1, label="estimate")
            axes[2, i].plot(t, data[:, c[f"u_l1_{i}"]], lw=1, label="compensation")
            axes[2, i].set_ylabel(f"{names[i]} [N]")
        axes[2, 0].legend(loc="best", fontsize=8)
    elif has_ekf:
        for i in range(3):
            axes[2, i].plot(t, data[:, c[f"f_ekf_{i}"]], lw=1)
            axes[2, i].set_ylabel(f"est. force {'xyz'[i]} [N]")
    for ax in axes[-1]:
        ax.set_xlabel("t [s]")
    fig.tight_layout()
    if args.save:
        fig.savefig(args.save, dpi=130)
        print(f"saved {args.save}")
    else:
        plt.show()


if __name__ == "__main__":
    main()
