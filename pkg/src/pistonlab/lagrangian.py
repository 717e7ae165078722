"""First-order Godunov-type reference solver in mass coordinates.

The gas occupies m in [0, M]; the piston is the fixed left boundary m = 0
and the right boundary holds the undisturbed state. The system is

    v_t - u_m = 0,    u_t + p_m = 0,    p = v**(-gamma),

with v = 1/rho. Interfaces use a two-wave acoustic solver whose impedance
picks up a shock term under compression.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gas import DomainError, check_gamma
from .shock_polar import solve_steady_piston

SHOCK_THRESHOLD = 1.5
TAINT_FRACTION = 0.9


class PositivityError(RuntimeError):
    """Specific volume became non-positive."""


class NoShockError(ValueError):
    """No density jump above the detection threshold."""


@dataclass
class LagGrid:
    m_edges: np.ndarray
    v: np.ndarray
    u: np.ndarray
    t: float = 0.0
    rho_inf: float = 1.0
    momentum_flux: float = 0.0  # time-integrated p(piston) - p(far field)

    def __post_init__(self):
        if self.v.size < 1:
            raise DomainError("oracle grid needs at least one cell")
        if self.m_edges.size != self.v.size + 1 or np.any(np.diff(self.m_edges) <= 0.0):
            raise DomainError("mass edges must be strictly increasing, one more than cells")
        if np.any(self.v <= 0.0):
            raise PositivityError("non-positive specific volume")

    @property
    def n(self) -> int:
        return self.v.size

    @property
    def dm(self) -> np.ndarray:
        return np.diff(self.m_edges)

    def momentum(self) -> float:
        return float(np.sum(self.u * self.dm))


def init(rho_inf: float, total_mass: float, n_cells: int) -> LagGrid:
    """Gas at rest with density rho_inf on [0, total_mass]."""
    if not (rho_inf > 0.0 and total_mass > 0.0 and n_cells > 0):
        raise DomainError("rho_inf, total_mass and n_cells must be positive")
    return LagGrid(m_edges=np.linspace(0.0, total_mass, n_cells + 1),
                   v=np.full(n_cells, 1.0 / rho_inf), u=np.zeros(n_cells), rho_inf=rho_inf)


def _impedance(v, c, du_comp, gamma):
    # acoustic impedance rho*c plus a strong-shock term under compression
    return (c + 0.5 * (gamma + 1.0) * np.maximum(du_comp, 0.0)) / v


def _interfaces(grid: LagGrid, w_prime: float, gamma: float):
    """Interface velocities and pressures, n+1 of each, plus the largest impedance."""
    v, u = grid.v, grid.u
    p = v ** -gamma
    c = np.sqrt(gamma * p * v)
    v_far = 1.0 / grid.rho_inf
    p_far = v_far ** -gamma
    c_far = math.sqrt(gamma * p_far * v_far)
    vl = v[:-1]; vr = v[1:]
    ul = u[:-1]; ur = u[1:]
    jump = ul - ur
    zl = _impedance(vl, c[:-1], jump, gamma)
    zr = _impedance(vr, c[1:], jump, gamma)
    zs = zl + zr
    us = np.empty(grid.n + 1)
    ps = np.empty(grid.n + 1)
    us[1:-1] = (zl * ul + zr * ur + p[:-1] - p[1:]) / zs
    ps[1:-1] = (zr * p[:-1] + zl * p[1:] + zl * zr * jump) / zs
    # piston: prescribed velocity, pressure from the right-going wave
    z0 = _impedance(v[0], c[0], w_prime - u[0], gamma)
    us[0] = w_prime
    ps[0] = p[0] + z0 * (w_prime - u[0])
    # far field: undisturbed ghost state
    zfl = _impedance(v[-1], c[-1], u[-1], gamma)
    zfr = _impedance(v_far, c_far, u[-1], gamma)
    us[-1] = (zfl * u[-1] + p[-1] - p_far) / (zfl + zfr)
    ps[-1] = (zfr * p[-1] + zfl * p_far + zfl * zfr * u[-1]) / (zfl + zfr)
    zmax = max(float(zl.max()), float(zr.max()), float(z0), float(zfl), float(zfr))
    return us, ps, zmax


def stable_dt(grid: LagGrid, w_prime: float, gamma: float, cfl: float) -> float:
    _, _, zmax = _interfaces(grid, w_prime, gamma)
    return cfl * float(grid.dm.min()) / zmax


def step_fv(grid: LagGrid, w_prime: float, gamma: float, cfl: float = 0.9,
            dt: float | None = None) -> LagGrid:
    """One conservative update; dt defaults to the CFL limit and is capped by it."""
    if not 0.0 < cfl < 1.0:
        raise DomainError(f"cfl={cfl!r} outside (0, 1)")
    us, ps, zmax = _interfaces(grid, w_prime, gamma)
    dm = grid.dm
    dt_max = cfl * float(dm.min()) / zmax
    dt = dt_max if dt is None else min(dt, dt_max)
    v = grid.v + dt / dm * np.diff(us)
    u = grid.u - dt / dm * np.diff(ps)
    if np.any(v <= 0.0):
        i = int(np.argmin(v))
        raise PositivityError(f"v={v[i]:.3e} in cell {i} at t={grid.t + dt:.6g}")
    return LagGrid(m_edges=grid.m_edges, v=v, u=u, t=grid.t + dt, rho_inf=grid.rho_inf,
                   momentum_flux=grid.momentum_flux + dt * (ps[0] - ps[-1]))


def to_eulerian(grid: LagGrid, piston_x: float) -> np.ndarray:
    """Rows (x, rho, u) at cell centres."""
    lengths = grid.v * grid.dm
    right = piston_x + np.cumsum(lengths)
    return np.column_stack([right - 0.5 * lengths, 1.0 / grid.v, grid.u])


@dataclass(frozen=True)
class ShockFix:
    m: float
    x: float
    index: int  # interface index (edge between cells index-1 and index)
    rho: float
    u: float


def locate_shock(grid: LagGrid, piston_x: float = 0.0, offset: int = 4, window: int = 10,
                 threshold: float = SHOCK_THRESHOLD) -> ShockFix:
    """Steepest density jump and the average state over a window behind it."""
    rho = 1.0 / grid.v
    if grid.n < 2 or not rho.max() > threshold * grid.rho_inf:
        raise NoShockError("no shock detected")
    drho = np.abs(np.diff(rho))
    j = int(np.argmax(drho)) + 1
    hi = max(j - offset, 1)
    lo = max(hi - window, 0)
    x_edges = piston_x + np.concatenate([[0.0], np.cumsum(grid.v * grid.dm)])
    return ShockFix(m=float(grid.m_edges[j]), x=float(x_edges[j]), index=j,
                    rho=float(rho[lo:hi].mean()), u=float(grid.u[lo:hi].mean()))


@dataclass
class OracleTrace:
    gamma: float
    rho_inf: float
    n_cells: int
    total_mass: float
    t: list = field(default_factory=list)
    shock_m: list = field(default_factory=list)
    shock_x: list = field(default_factory=list)
    plateau_rho: list = field(default_factory=list)
    plateau_u: list = field(default_factory=list)
    tainted: bool = False
    momentum_error: float = 0.0
    grid: LagGrid | None = None
    n_steps: int = 0

    def arrays(self):
        return {k: np.asarray(getattr(self, k)) for k in ("t", "shock_m", "shock_x", "plateau_rho", "plateau_u")}


def default_mass(spec, rho_inf: float, gamma: float, t_end: float, margin: float = 1.25) -> float:
    """Mass the shock sweeps by t_end at the fastest piston speed, times a margin."""
    b = spec.bounds()
    if b is None:
        _, wp, _ = spec.evaluate(np.linspace(0.0, t_end, 2001))
        w_hi = float(wp.max())
    else:
        w_hi = b[1]
    st = solve_steady_piston(w_hi, rho_inf, gamma)
    return margin * rho_inf * st.s0 * t_end


def run_oracle(spec, rho_inf: float, gamma: float, t_end: float, n_cells: int,
               sample_times=None, cfl: float = 0.9, total_mass: float | None = None,
               offset: int = 4, window: int = 10) -> OracleTrace:
    """March from rest at t=0 to t_end, recording shock data at ``sample_times``."""
    gamma = check_gamma(gamma)
    if total_mass is None:
        total_mass = default_mass(spec, rho_inf, gamma, t_end)
    grid = init(rho_inf, total_mass, n_cells)
    samples = sorted(float(s) for s in (sample_times if sample_times is not None else [t_end]))
    out = OracleTrace(gamma=gamma, rho_inf=rho_inf, n_cells=n_cells, total_mass=total_mass)
    mom0 = grid.momentum()
    k = 0
    while k < len(samples):
        target = samples[k]
        while grid.t < target:
            _, wp, _ = spec.evaluate(grid.t)
            grid = step_fv(grid, float(wp), gamma, cfl, dt=target - grid.t)
            out.n_steps += 1
        w, _, _ = spec.evaluate(grid.t)
        try:
            fix = locate_shock(grid, float(w), offset, window)
        except NoShockError:
            k += 1
            continue
        if fix.index > TAINT_FRACTION * n_cells:
            out.tainted = True
        out.t.append(grid.t)
        out.shock_m.append(fix.m)
        out.shock_x.append(fix.x)
        out.plateau_rho.append(fix.rho)
        out.plateau_u.append(fix.u)
        k += 1
    scale = max(abs(grid.momentum()), abs(grid.momentum_flux), 1e-300)
    out.momentum_error = abs(grid.momentum() - mom0 - grid.momentum_flux) / scale
    out.grid = grid
    return out
