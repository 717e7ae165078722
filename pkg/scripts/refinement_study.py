"""Node-refinement study: reflection and decomposition residuals, invariant drift.

    python scripts/refinement_study.py --nodes 50 100 200 --interp cubic
"""
import argparse
import time

import numpy as np

from pistonlab.diagnostics import (decomposition_residual, invariant_drift, piston_reflection_residual,
                                   shock_reflection_residual)
from pistonlab.moc import StepConfig, run
from pistonlab.piston import Decaying, LogPeriodic, a3_amplitude


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, default=1.4)
    ap.add_argument("--rho-inf", type=float, default=0.1)
    ap.add_argument("--family", choices=("decaying", "log_periodic"), default="decaying")
    ap.add_argument("--nodes", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--t-end", type=float, default=100.0)
    ap.add_argument("--t-min", type=float, default=60.0, help="start of the residual window")
    ap.add_argument("--drift-start", type=float, nargs="+", default=[30.0, 34.5])
    ap.add_argument("--interp", choices=("pchip", "cubic"), default="cubic")
    a = ap.parse_args()

    wb = a3_amplitude(a.rho_inf, a.gamma)
    spec = Decaying(1.0, wb) if a.family == "decaying" else LogPeriodic(1.0, wb / 2.0, 2.0)
    rows = []
    for n in a.nodes:
        t0 = time.perf_counter()
        tr = run(spec, a.rho_inf, a.gamma, 1.0, a.t_end, n, StepConfig(interp=a.interp))
        if not tr.ok:
            print(f"N={n}: run failed: {tr.failure}")
            return
        dec = np.array([(p, m) for _, p, m in decomposition_residual(tr, t_min=a.t_min)])
        drift = max(invariant_drift(tr, ts, fam, xi) for ts in a.drift_start
                    for fam, xi in [(1, 0.0), (1, 0.3), (1, 0.6), (0, 1.0), (0, 0.7), (0, 0.4)])
        row = (max(v for _, v in shock_reflection_residual(tr, t_min=a.t_min)),
               max(v for _, v in piston_reflection_residual(tr, spec, t_min=a.t_min)),
               dec[:, 0].max(), dec[:, 1].max(), drift)
        rows.append(row)
        print(f"N={n:4d}  shock={row[0]:.3e}  piston={row[1]:.3e}  decomp+={row[2]:.3e}  "
              f"decomp-={row[3]:.3e}  drift={row[4]:.3e}  ({time.perf_counter() - t0:.1f}s)")
    if len(rows) > 1:
        errs = np.array(rows)
        orders = -np.polyfit(np.log(a.nodes), np.log(errs), 1)[0]
        print("orders: " + "  ".join(f"{k}={p:.2f}" for k, p in
                                     zip(("shock", "piston", "decomp+", "decomp-", "drift"), orders)))


if __name__ == "__main__":
    main()
