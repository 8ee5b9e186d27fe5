#!/usr/bin/env python3
"""Quick demo: the hardest plant (group D) with and without adaptation.

Runs the nominal and the adaptive MPC for one 15 s trajectory period each
and prints the tracking comparison. Takes about half a minute.
"""

import numpy as np

from tilthex.config import default_config
from tilthex.harness import ExperimentSpec, run_experiment


def main():
    cfg = default_config()
    results = {}
    for controller in ("nominal", "l1"):
        spec = ExperimentSpec(group="D", controller=controller, period=15.0)
        print(f"running D/{controller} ...")
        results[controller] = run_experiment(spec, cfg).metrics

    nom, ada = results["nominal"], results["l1"]
    print()
    print(f"{'':14}{'pos RMSE [m]':>14}{'quat RMSE':>12}{'mean z err [cm]':>17}")
    for name, m in results.items():
        print(f"{name:<14}{m.pos_rmse:>14.4f}{m.quat_rmse:>12.5f}"
              f"{m.mean_err[2] * 100:>17.2f}")
    print()
    print(f"position RMSE reduction: "
          f"{100 * (1 - ada.pos_rmse / nom.pos_rmse):.1f}%")
    print(f"attitude RMSE reduction: "
          f"{100 * (1 - ada.quat_rmse / nom.quat_rmse):.1f}%")


if __name__ == "__main__":
    main()
