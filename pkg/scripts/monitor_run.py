"""Continuation-hypothesis and narrow-estimate monitors on long runs.

    python scripts/monitor_run.py --rho-inf 1e-6 1e-8
"""
import argparse
import time

import numpy as np

from pistonlab.diagnostics import hypothesis_monitor, narrow_check
from pistonlab.moc import run
from pistonlab.piston import Decaying, a3_amplitude, validate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, default=1.4)
    ap.add_argument("--rho-inf", type=float, nargs="+", default=[1e-6, 1e-8])
    ap.add_argument("--nodes", type=int, default=50)
    ap.add_argument("--t-end", type=float, default=100.0)
    ap.add_argument("--delta", type=float, default=0.1, help="delta1 = delta2")
    ap.add_argument("--samples", type=int, default=100)
    a = ap.parse_args()

    for r in a.rho_inf:
        spec = Decaying(1.0, a3_amplitude(r, a.gamma))
        rep = validate(spec, r, a.gamma)
        t0 = time.perf_counter()
        tr = run(spec, r, a.gamma, 1.0, a.t_end, a.nodes)
        hyp = hypothesis_monitor(tr, a.delta, a.delta)
        nar = narrow_check(tr, spec, a.gamma, r, a.delta, sample_points=a.samples)
        worst = max((max(s["dt_plus"], s["dt_minus"]) / s["bound"] for s in nar.conclusive), default=np.nan)
        counts = {k: sum(s["status"] == k for s in nar.samples) for k in ("pass", "fail", "inconclusive")}
        m = hyp.worst_margins()
        print(f"rho_inf={r:.0e} assumptions={'ok' if rep.ok else 'violated'} levels={hyp.t.size} "
              f"({time.perf_counter() - t0:.1f}s)")
        print(f"  H: max h/bound = {m[0]:.4f}, {m[1]:.4f}, {m[2]:.4f}; all hold: {hyp.all_pass}; nu_hat={hyp.nu_hat:.3f}")
        print(f"  narrow: {counts}, worst exit/bound = {worst:.3f}; "
              f"width/bound max = {float(np.max(nar.width_ratio)):.3f}")


if __name__ == "__main__":
    main()
