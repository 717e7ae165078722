"""Shock-fitting method of characteristics on the wedge w(t) <= x <= s(t).

Nodes sit at fixed fractions xi_i = i/(N-1) of the current interval.  Each
step transports the Riemann invariants along traced characteristics (two-pass
foot location) and closes the piston and shock nodes with their boundary
conditions.  Positions inside a level are handled as offsets from the piston
so that the thin wedge keeps its relative precision at large x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .gas import DomainError, invariants, primitives, sound_speed
from .piston import evaluate
from .shock_polar import (ConvergenceError, ShockSample, f_polar, shock_state_from_k,
                          shock_speed_interleaved, solve_k_from_r_plus,
                          solve_steady_piston)

EPS_GUARD = 1e-300
SPAN_SLACK = 1e-9


class StepError(RuntimeError):
    """Base for failures inside a time step."""


class FootPointError(StepError):
    """Characteristic foot outside the previous level; retry with a smaller step."""


class VacuumError(StepError):
    pass


class EntropyViolation(StepError):
    pass


@dataclass
class StepConfig:
    theta: float = 0.8
    shock_passes: int = 2
    interp: str = "pchip"
    snapshot_every: int = 1
    max_retries: int = 6
    max_steps: int = 2_000_000
    tol: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.theta <= 1.0:
            raise DomainError(f"theta must lie in (0, 1], got {self.theta!r}")
        if self.interp not in ("pchip", "cubic"):
            raise DomainError(f"unknown interpolation {self.interp!r}")
        if self.snapshot_every < 1 or self.shock_passes < 1:
            raise DomainError("snapshot_every and shock_passes must be >= 1")


@dataclass
class TimeLevel:
    t: float
    step: int
    piston_x: float
    shock: ShockSample
    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    r_minus: np.ndarray
    r_plus: np.ndarray

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def width(self) -> float:
        return self.shock.s - self.piston_x

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    def c(self, gamma):
        return sound_speed(self.rho, gamma)

    def check(self, spec, gamma: float, tol: float = 1e-9) -> list[str]:
        """List of violated level invariants (empty when valid)."""
        bad = []
        if not np.all(np.diff(self.x) > 0.0):
            bad.append("node positions not increasing")
        if self.x[0] != self.piston_x or self.x[-1] != self.shock.s:
            bad.append("end nodes off the boundaries")
        if not np.all(self.rho > 0.0):
            bad.append("non-positive density")
        wp = evaluate(spec, self.t)[1]
        if abs(self.u[0] - wp) > tol * max(1.0, abs(wp)):
            bad.append("piston node velocity differs from w'")
        st = self.shock.state
        if abs(self.rho[-1] - st.rho) > tol * st.rho or abs(self.u[-1] - st.u) > tol * max(1.0, abs(st.u)):
            bad.append("shock node state differs from shock sample")
        if not self.shock.k > 1.0:
            bad.append("entropy condition k > 1 violated")
        if not shock_speed_interleaved(self.shock, gamma):
            bad.append("shock speed not between post-shock characteristic speeds")
        return bad


def _level(t, step, piston_x, shock, y, rho, u, rm, rp) -> TimeLevel:
    x = piston_x + y
    x[0], x[-1] = piston_x, shock.s
    return TimeLevel(t=t, step=step, piston_x=piston_x, shock=shock, x=x, rho=rho, u=u,
                     r_minus=rm, r_plus=rp)


def init_from_steady(spec, rho_inf: float, gamma: float, t0: float, n_nodes: int,
                     tol: float = 1e-12) -> TimeLevel:
    """Self-similar constant-speed state at t0 with w0 = w'(t0)."""
    if not t0 > 0.0:
        raise DomainError("t0 must be positive: piston and shock coincide at t = 0")
    if n_nodes < 3:
        raise DomainError("need at least 3 nodes")
    w, wp, _ = evaluate(spec, t0)
    st = solve_steady_piston(wp, rho_inf, gamma, tol=tol)
    s = w + (st.s0 - wp) * t0
    shock = shock_state_from_k(st.tau, rho_inf, gamma, t=t0, s=s)
    rho = np.full(n_nodes, shock.state.rho)
    u = np.full(n_nodes, shock.state.u)
    u[0] = wp
    rm, rp = invariants(rho, u, gamma)
    y = np.linspace(0.0, s - w, n_nodes)
    return _level(t0, 0, w, shock, y, rho, u, rm, rp)


class _Sampler:
    """Interpolants of the invariants on one level, addressed by piston offset."""

    def __init__(self, level: TimeLevel, gamma: float, kind: str):
        self.width = level.width
        self.gamma = gamma
        cls = PchipInterpolator if kind == "pchip" else CubicSpline
        xi = level.xi
        self._r = cls(xi, np.column_stack((level.r_minus, level.r_plus)))

    def xi_of(self, y, strict: bool = True):
        xi = np.asarray(y, dtype=float) / self.width
        if strict and np.any((xi < -SPAN_SLACK) | (xi > 1.0 + SPAN_SLACK)):
            raise FootPointError("characteristic foot outside previous level")
        return np.clip(xi, 0.0, 1.0)

    def invariants(self, y, strict: bool = True):
        r = self._r(self.xi_of(y, strict))
        return r[..., 0], r[..., 1]

    def speeds(self, y, strict: bool = True):
        rm, rp = self.invariants(y, strict)
        u = 0.5 * (rp + rm)
        c = 0.25 * (self.gamma - 1.0) * (rp - rm)
        return u - c, u + c


def _speeds_from(rm, rp, gamma):
    u = 0.5 * (rp + rm)
    c = 0.25 * (gamma - 1.0) * (rp - rm)
    return u - c, u + c


def time_step(level: TimeLevel, gamma: float, theta: float) -> float:
    c = level.c(gamma)
    spread = np.max(level.u + c) - np.min(level.u - c)
    return theta * (level.width / (level.n - 1)) / spread


def _shock_speeds(k, rho_inf, gamma):
    """(lambda+ behind the shock, s') for density ratio k."""
    scale = rho_inf ** (0.5 * (gamma - 1.0))
    f = f_polar(k, gamma)
    u = scale * f
    c = math.sqrt(gamma) * (k * rho_inf) ** (0.5 * (gamma - 1.0))
    return u + c, scale * k * f / (k - 1.0)


def _shock_node(level, sampler, dt, t1, w_old, rho_inf, gamma, cfg):
    sh = level.shock
    c_sh = sound_speed(sh.state.rho, gamma)
    s_prime_new = sh.s_prime
    lam_head = sh.state.u + c_sh
    for _ in range(cfg.shock_passes):
        s1 = sh.s + 0.5 * dt * (sh.s_prime + s_prime_new)
        y_head = s1 - w_old
        slope = lam_head
        for _ in range(2):
            y_f = y_head - dt * slope
            rm_f, rp_f = sampler.invariants(y_f)
            lam_foot = _speeds_from(rm_f, rp_f, gamma)[1]
            try:
                k = solve_k_from_r_plus(float(rp_f), rho_inf, gamma, tol=cfg.tol, k_guess=sh.k)
            except DomainError as exc:
                raise EntropyViolation(str(exc)) from exc
            lam_head, s_prime_new = _shock_speeds(k, rho_inf, gamma)
            slope = 0.5 * (lam_head + lam_foot)
    s1 = sh.s + 0.5 * dt * (sh.s_prime + s_prime_new)
    return shock_state_from_k(k, rho_inf, gamma, t=t1, s=s1)


def step(level: TimeLevel, spec, rho_inf: float, gamma: float, cfg: StepConfig,
         dt: float | None = None) -> TimeLevel:
    """Advance one level; dt defaults to the characteristic CFL step."""
    if dt is None:
        dt = time_step(level, gamma, cfg.theta)
    t1 = level.t + dt
    w_old = level.piston_x
    w1, wp1, _ = evaluate(spec, t1)
    sampler = _Sampler(level, gamma, cfg.interp)

    shock = _shock_node(level, sampler, dt, t1, w_old, rho_inf, gamma, cfg)

    n = level.n
    xi = level.xi
    width1 = shock.s - w1
    if not width1 > 0.0:
        raise FootPointError("piston overtook the shock")
    y = (w1 - w_old) + xi * width1
    y[-1] = shock.s - w_old

    # C- from the piston and interior nodes, C+ from interior nodes
    ym, yp = y[:-1], y[1:-1]
    lm_slope = sampler.speeds(ym, strict=False)[0]
    lp_slope = sampler.speeds(yp, strict=False)[1]
    rm_new, rp_new = np.empty(n), np.empty(n)
    for p in range(2):
        rm_m, rp_m = sampler.invariants(ym - dt * lm_slope)
        rm_p, rp_p = sampler.invariants(yp - dt * lp_slope)
        rm_new[:-1] = rm_m
        rp_new[0] = 2.0 * wp1 - rm_m[0]
        rp_new[1:-1] = rp_p
        if p == 0:
            # second pass: average of head and foot slopes
            lm_head, lp_head = _speeds_from(rm_new[:-1], rp_new[:-1], gamma)
            lm_slope = 0.5 * (lm_head + _speeds_from(rm_m, rp_m, gamma)[0])
            lp_slope = 0.5 * (lp_head[1:] + _speeds_from(rm_p, rp_p, gamma)[1])
    st = shock.state
    c_s = sound_speed(st.rho, gamma)
    rm_new[-1] = st.u - 2.0 * c_s / (gamma - 1.0)
    rp_new[-1] = st.u + 2.0 * c_s / (gamma - 1.0)
    if np.any(~(rp_new > rm_new)):
        raise VacuumError(f"vacuum (c <= 0) at t={t1:.6g}")
    rho, u = primitives(rm_new, rp_new, gamma)
    u[0] = wp1
    rho[-1], u[-1] = st.rho, st.u
    # y is measured from the old piston; stored positions are absolute
    return _level(t1, level.step + 1, w1, shock, y - (w1 - w_old), rho, u, rm_new, rp_new)


@dataclass
class SolutionTrace:
    gamma: float
    rho_inf: float
    spec: object
    n_nodes: int
    interp: str = "pchip"
    levels: list = field(default_factory=list)
    shock_t: list = field(default_factory=list)
    shock_s: list = field(default_factory=list)
    shock_sp: list = field(default_factory=list)
    shock_k: list = field(default_factory=list)
    shock_kg: list = field(default_factory=list)
    shock_a: list = field(default_factory=list)
    shock_b: list = field(default_factory=list)
    failure: dict | None = None
    stamps: list = field(default_factory=list)
    n_steps: int = 0

    def record_shock(self, sh: ShockSample):
        self.shock_t.append(sh.t)
        self.shock_s.append(sh.s)
        self.shock_sp.append(sh.s_prime)
        self.shock_k.append(sh.k)
        self.shock_kg.append(sh.k_g)
        self.shock_a.append(sh.a)
        self.shock_b.append(sh.b)

    def shock_history(self) -> dict:
        return {"t": np.array(self.shock_t), "s": np.array(self.shock_s),
                "s_prime": np.array(self.shock_sp), "k": np.array(self.shock_k),
                "k_g": np.array(self.shock_kg), "a": np.array(self.shock_a),
                "b": np.array(self.shock_b)}

    @property
    def ok(self) -> bool:
        return self.failure is None

    def consecutive(self):
        """Pairs of stored levels one step apart."""
        return [(a, b) for a, b in zip(self.levels, self.levels[1:]) if b.step == a.step + 1]


def _keep(step_idx: int, every: int) -> bool:
    return every == 1 or step_idx % every < 3


def run(spec, rho_inf: float, gamma: float, t0: float, t_end: float, n_nodes: int,
        cfg: StepConfig | None = None) -> SolutionTrace:
    """March from the steady start at t0 to t_end.

    With snapshot_every = k > 1, levels are stored in bursts of three
    consecutive steps every k steps, so derivative diagnostics stay available.
    """
    cfg = cfg or StepConfig()
    if not t_end > t0:
        raise DomainError("t_end must exceed t0")
    trace = SolutionTrace(gamma=gamma, rho_inf=rho_inf, spec=spec, n_nodes=n_nodes, interp=cfg.interp)
    level = init_from_steady(spec, rho_inf, gamma, t0, n_nodes, tol=cfg.tol)
    trace.levels.append(level)
    trace.record_shock(level.shock)
    while level.t < t_end:
        if level.step >= cfg.max_steps:
            trace.failure = {"kind": "max_steps", "t": level.t, "message": "step budget exhausted"}
            break
        theta = cfg.theta
        new = None
        for attempt in range(cfg.max_retries + 1):
            dt = time_step(level, gamma, theta)
            # avoid a sliver final step
            if level.t + 1.5 * dt >= t_end:
                dt = t_end - level.t if level.t + dt >= t_end else 0.5 * (t_end - level.t)
            try:
                new = step(level, spec, rho_inf, gamma, cfg, dt=dt)
                break
            except FootPointError as exc:
                theta *= 0.5
                err = exc
            except (StepError, ConvergenceError, DomainError) as exc:
                err = exc
                break
        if new is None:
            trace.failure = {"kind": type(err).__name__, "t": level.t, "step": level.step,
                             "message": str(err)}
            break
        level = new
        trace.record_shock(level.shock)
        if _keep(level.step, cfg.snapshot_every) or level.t >= t_end:
            trace.levels.append(level)
    trace.n_steps = level.step
    return trace
