"""Steady, reflection-coefficient and (optionally) unsteady power-law sweeps.

    python scripts/asymptotic_sweeps.py --svg out/plots
    python scripts/asymptotic_sweeps.py --unsteady 2.0 --jobs 4
"""
import argparse
import os

import numpy as np

from pistonlab import svg
from pistonlab.asymptotics import SweepConfig, geometric_grid, kg_grid, sweep_kg, sweep_steady, sweep_unsteady


def report(title, res):
    print(title)
    for f in res.fits:
        target = "n/a" if np.isnan(f.target_prefactor) else f"{f.prefactor_ratio:.4f}"
        print(f"  gamma={f.gamma:<4g} {f.quantity:24s} exponent {f.fit.exponent:+.4f} "
              f"(claim {f.target_exponent:+.4f}, {f.relation})  prefactor ratio {target}  "
              f"{'pass' if f.passed else 'FAIL'}")


def plot(res, path, xlabel):
    for g in sorted({f.gamma for f in res.fits}):
        series = []
        for f in (f for f in res.fits if f.gamma == g):
            pts = [(x, v) for gg, x, q, v in res.values if gg == g and q == f.quantity and v > 0]
            x, y = map(np.array, zip(*pts))
            series.append((f.quantity, x, y, (f.fit.exponent, f.fit.log_prefactor)))
        with open(os.path.join(path, f"{xlabel}_gamma{g:g}.svg"), "w") as fh:
            fh.write(svg.loglog(series, f"gamma = {g:g}", xlabel, "value"))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gammas", type=float, nargs="+", default=[1.4, 2.0, 2.5])
    ap.add_argument("--unsteady", type=float, default=None, metavar="GAMMA",
                    help="also run the unsteady sweep at this gamma (slow at small rho_inf)")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--svg", default=None, help="directory for log-log plots")
    a = ap.parse_args()

    steady = sweep_steady(SweepConfig(gammas=tuple(a.gammas), rho_grid=geometric_grid()), jobs=a.jobs)
    report("steady laws vs rho_inf on [1e-10, 1e-6]", steady)
    kg = sweep_kg(tuple(a.gammas), kg_grid())
    report("1 - k_g vs k on [1e4, 1e8]", kg)
    if a.svg:
        os.makedirs(a.svg, exist_ok=True)
        plot(steady, a.svg, "rho_inf")
        plot(kg, a.svg, "k")
    if a.unsteady is not None:
        res = sweep_unsteady(a.unsteady, geometric_grid(1e-4, 0.1, 5), jobs=a.jobs)
        report(f"unsteady bound sweep, gamma={a.unsteady:g}", res)
        for p in res.extra["points"]:
            print(f"  rho_inf={p['rho_inf']:.0e} max|t d c|={p['max_t_dc']:.3e} "
                  f"pass rate={p['pass_rate']:.3f} rho/rho_lead in [{p['rho_ratio_lo']:.5f}, {p['rho_ratio_hi']:.5f}]")


if __name__ == "__main__":
    main()
