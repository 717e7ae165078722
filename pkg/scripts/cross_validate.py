"""MOC against the Lagrangian finite-volume oracle on one scenario.

    python scripts/cross_validate.py --rho-inf 1e-4 --cells 4000
"""
import argparse
import time

import numpy as np

from pistonlab.lagrangian import run_oracle
from pistonlab.moc import run
from pistonlab.piston import Decaying, a3_amplitude


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, default=1.4)
    ap.add_argument("--rho-inf", type=float, default=1e-4)
    ap.add_argument("--nodes", type=int, default=50)
    ap.add_argument("--cells", type=int, default=4000)
    ap.add_argument("--t-end", type=float, default=20.0)
    ap.add_argument("--samples", type=int, default=16)
    a = ap.parse_args()

    spec = Decaying(1.0, a3_amplitude(a.rho_inf, a.gamma))
    t0 = time.perf_counter()
    tr = run(spec, a.rho_inf, a.gamma, 1.0, a.t_end, a.nodes)
    t1 = time.perf_counter()
    times = np.linspace(a.t_end / 4.0, a.t_end, a.samples)
    orc = run_oracle(spec, a.rho_inf, a.gamma, a.t_end, a.cells, sample_times=times)
    t2 = time.perf_counter()
    h, o = tr.shock_history(), orc.arrays()
    u_moc = np.interp(o["t"], h["t"], h["s_prime"] * (1.0 - 1.0 / h["k"]))
    s_moc = np.interp(o["t"], h["t"], h["s"])
    print(f"MOC {tr.n_steps} steps in {t1 - t0:.1f}s; oracle {orc.n_steps} steps in {t2 - t1:.1f}s"
          f" (tainted={orc.tainted}, momentum error {orc.momentum_error:.1e})")
    print("      t      u_moc      u_orc    rel_u      s_moc      s_orc    rel_s")
    for row in zip(o["t"], u_moc, o["plateau_u"], s_moc, o["shock_x"]):
        t, um, uo, sm, so = row
        print(f"{t:7.2f} {um:10.6f} {uo:10.6f} {abs(um / uo - 1):8.1e} {sm:10.5f} {so:10.5f} {abs(sm / so - 1):8.1e}")


if __name__ == "__main__":
    main()
