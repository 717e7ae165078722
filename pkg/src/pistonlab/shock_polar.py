"""Shock-front algebra for a piston driving a shock into still gas (rho_inf, 0).

Everything here is expressed through the density ratio k = rho_S/rho_inf > 1
across the leading shock, so that the small-density limit shows up as k -> oo.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .gas import DomainError, GasState, sound_speed

RHO_INF_FLOOR = 1e-300
DEFAULT_TOL = 1e-12
MAX_ITER = 200


class EntropyError(DomainError):
    """Density ratio k <= 1: not an admissible (compressive) shock."""


class ShockVanishes(DomainError):
    """Incoming invariant too small to support a shock with k > 1."""


class ConvergenceError(RuntimeError):
    pass


def _check_k(k):
    if isinstance(k, float):
        if not k > 1.0:
            raise EntropyError("entropy condition requires k > 1")
        return k
    k = np.asarray(k, dtype=float)
    if np.any(~(k > 1.0)):
        raise EntropyError("entropy condition requires k > 1")
    return k


def _out(v):
    return v if np.ndim(v) else float(v)


def f_polar(k, gamma: float):
    """Shock polar f(k) = sqrt((1 - 1/k)(k**gamma - 1)), so that u_S = rho_inf**((g-1)/2) f(k)."""
    k = _check_k(k)
    if isinstance(k, float):
        lk = math.log(k)
        return math.exp(0.5 * (math.log(-math.expm1(-lk)) + _log_expm1(gamma * lk)))
    lk = np.log(k)
    x = gamma * lk
    # log(expm1(x)) without overflow for large k
    log_em1 = np.where(x > 1.0, x + np.log(-np.expm1(-np.maximum(x, 1.0))),
                       np.log(np.expm1(np.minimum(x, 1.0))))
    return _out(np.exp(0.5 * (np.log(-np.expm1(-lk)) + log_em1)))


def f_polar_prime(k, gamma: float):
    k = _check_k(k)
    # numerator divided by k**2 so that large k does not overflow
    num = gamma * k ** (gamma - 1.0) + (1.0 - gamma) * k ** (gamma - 2.0) - k ** -2.0
    return _out(num / (2.0 * f_polar(k, gamma)))


def h_of_tau(tau, gamma: float):
    """h(tau) = (tau-1)(tau**gamma-1)/tau; the steady problem is h(tau) = w0**2 rho_inf**(1-gamma)."""
    try:
        tau = _check_k(tau)
    except EntropyError:
        raise DomainError("h(tau) needs tau > 1") from None
    return _out((tau - 1.0) * np.expm1(gamma * np.log(tau)) / tau)


def _check_rho_inf(rho_inf: float, gamma: float) -> None:
    if not rho_inf > 0.0:
        raise DomainError(f"rho_inf must be positive, got {rho_inf!r}")
    if rho_inf < RHO_INF_FLOOR / gamma:
        raise DomainError(f"rho_inf={rho_inf!r} below the double-precision floor")


def _log_expm1(x: float) -> float:
    return x + math.log(-math.expm1(-x)) if x > 1.0 else math.log(math.expm1(x))


def _solve_log_excess(g, guess: float, what: str, half_width: float = 1.0) -> float:
    """Root of an increasing function g(z), z = log(k - 1), bracketed outward from log(guess)."""
    z0 = math.log(guess)
    lo, hi = z0 - half_width, z0 + half_width
    lo_floor = math.log(1e-13)
    for _ in range(MAX_ITER):
        if g(lo) < 0.0:
            break
        if lo <= lo_floor:
            raise ConvergenceError(f"{what}: cannot bracket root from below")
        lo = max(lo - 2.0 * (hi - lo), lo_floor)
    for _ in range(MAX_ITER):
        if g(hi) > 0.0:
            break
        hi += 2.0 * (hi - lo)
    else:
        raise ConvergenceError(f"{what}: cannot bracket root from above")
    z, info = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                     maxiter=MAX_ITER, full_output=True, disp=False)
    if not info.converged:
        raise ConvergenceError(f"{what}: brentq did not converge ({info.flag})")
    return z


@dataclass(frozen=True)
class SteadySolution:
    rho0: float
    u0: float
    s0: float
    tau: float
    rho_inf: float
    gamma: float

    def residuals(self) -> tuple[float, float]:
        return rh_residuals(self.rho0, self.u0, self.s0, self.rho_inf, self.gamma)


def rh_residuals(rho, u, s, rho_inf, gamma) -> tuple[float, float]:
    """Relative residuals of mass and momentum jump conditions across the shock."""
    m1 = (rho - rho_inf) * s
    m2 = rho * u
    r1 = abs(m1 - m2) / max(abs(m1), abs(m2))
    terms = (rho * u * s, rho * u * u, rho ** gamma, rho_inf ** gamma)
    r2 = abs(terms[0] - terms[1] - terms[2] + terms[3]) / max(abs(x) for x in terms)
    return r1, r2


def solve_steady_piston(w0: float, rho_inf: float, gamma: float,
                        tol: float = DEFAULT_TOL) -> SteadySolution:
    """Exact post-shock state for a piston moving at constant speed w0."""
    if not w0 > 0.0:
        raise DomainError(f"piston speed must be positive, got {w0!r}")
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    _check_rho_inf(rho_inf, gamma)
    log_target = 2.0 * math.log(w0) + (1.0 - gamma) * math.log(rho_inf)

    def g(z):
        tm1 = math.exp(z)
        lt = math.log1p(tm1)
        return z + _log_expm1(gamma * lt) - lt - log_target

    # h ~ gamma (tau-1)**2 near 1 and ~ tau**gamma for large tau
    if log_target < 0.0:
        guess = math.exp(0.5 * (log_target - math.log(gamma)))
    else:
        guess = max(math.expm1(log_target / gamma), 1e-3)
    z = _solve_log_excess(g, guess, "steady shock ratio")
    tm1 = math.exp(z)
    tau = 1.0 + tm1
    sol = SteadySolution(rho0=tau * rho_inf, u0=w0, s0=tau / tm1 * w0, tau=tau,
                         rho_inf=rho_inf, gamma=gamma)
    r1, r2 = sol.residuals()
    # rho0 - rho_inf loses log10(tau/(tau-1)) digits for weak shocks
    if max(r1, r2) > tol + 8.0 * np.finfo(float).eps * tau / tm1:
        raise ConvergenceError(f"steady solve residuals {r1:.3e}, {r2:.3e} exceed tol={tol:g}")
    return sol


def steady_leading_order(w0: float, rho_inf: float, gamma: float) -> SteadySolution:
    """Closed-form small-rho_inf surrogate of :func:`solve_steady_piston`."""
    if not (w0 > 0.0 and rho_inf > 0.0):
        raise DomainError("w0 and rho_inf must be positive")
    rho0 = w0 ** (2.0 / gamma) * rho_inf ** (1.0 / gamma)
    gap = w0 ** ((gamma - 2.0) / gamma) * rho_inf ** ((gamma - 1.0) / gamma)
    return SteadySolution(rho0=rho0, u0=w0, s0=w0 + gap, tau=rho0 / rho_inf,
                          rho_inf=rho_inf, gamma=gamma)


@dataclass(frozen=True)
class ShockSample:
    t: float
    s: float
    k: float
    s_prime: float
    state: GasState
    k_g: float
    a: float
    b: float

    @property
    def u_s(self) -> float:
        return self.state.u


def shock_state_from_k(k: float, rho_inf: float, gamma: float,
                       t: float = math.nan, s: float = math.nan) -> ShockSample:
    k = float(_check_k(k))
    _check_rho_inf(rho_inf, gamma)
    scale = rho_inf ** (0.5 * (gamma - 1.0))
    f = f_polar(k, gamma)
    a, b = shock_tangent_coeffs(k, gamma)
    return ShockSample(t=t, s=s, k=k, s_prime=scale * k * f / (k - 1.0),
                       state=GasState(k * rho_inf, scale * f),
                       k_g=reflection_coefficient(k, gamma), a=a, b=b)


def r_plus_of_k(k, rho_inf: float, gamma: float):
    """R+ = u_S + 2 c_S/(gamma-1) carried by the post-shock state of ratio k."""
    k = _check_k(k)
    scale = rho_inf ** (0.5 * (gamma - 1.0))
    L = 2.0 * math.sqrt(gamma) / (gamma - 1.0)
    return _out(scale * (f_polar(k, gamma) + L * k ** (0.5 * (gamma - 1.0))))


def solve_k_from_r_plus(r_plus: float, rho_inf: float, gamma: float,
                        tol: float = DEFAULT_TOL, k_guess: float | None = None) -> float:
    """Density ratio k > 1 whose post-shock state carries the invariant ``r_plus``.

    ``k_guess`` (e.g. the previous time level) narrows the initial bracket.
    """
    _check_rho_inf(rho_inf, gamma)
    scale = rho_inf ** (0.5 * (gamma - 1.0))
    L = 2.0 * math.sqrt(gamma) / (gamma - 1.0)
    excess = r_plus / scale - L
    if not excess > 0.0:
        raise ShockVanishes(f"R+={r_plus!r} at or below the weak-shock limit {L * scale!r}")
    e = 0.5 * (gamma - 1.0)

    log_excess = math.log(excess)

    def g(z):
        lk = math.log1p(math.exp(z))
        log_f = 0.5 * (math.log(-math.expm1(-lk)) + _log_expm1(gamma * lk))
        return np.logaddexp(log_f, math.log(L) + _log_expm1(e * lk)) - log_excess

    # F - L ~ 2 sqrt(g) (k-1) near k = 1 and ~ k**(g/2) for large k
    if excess < 1.0:
        guess = excess / (2.0 * math.sqrt(gamma))
    else:
        guess = max(math.expm1(2.0 / gamma * math.log(excess + L)), 1e-3)
    half_width = 1.0
    if k_guess is not None and k_guess > 1.0:
        guess, half_width = k_guess - 1.0, 1e-3
    k = 1.0 + math.exp(_solve_log_excess(g, guess, "shock ratio from R+", half_width))
    # residual of F(k) = R+/scale, relative to R+/scale
    if abs(excess * math.expm1(g(math.log(k - 1.0)))) > tol * (excess + L):
        raise ConvergenceError("shock closure did not reach tolerance")
    return k


def shock_tangent_coeffs(k, gamma: float):
    """(a, b) with d/dt + s' d/dx = a d+ + b d- along the shock."""
    k = _check_k(k)
    A = math.sqrt(gamma) * (k - 1.0) * k ** (0.5 * (gamma - 1.0))
    f = f_polar(k, gamma)
    return _out((f + A) / (2.0 * A)), _out((A - f) / (2.0 * A))


def _slope_ratio(k, gamma, weight):
    M = weight / math.sqrt(gamma) * f_polar_prime(k, gamma) * np.power(k, 0.5 * (3.0 - gamma))
    return (M - 1.0) / (M + 1.0)


def reflection_coefficient(k, gamma: float):
    """k_g in d+c + k_g d-c = 0 on the shock.

    The slope factor is f'(k) k**((3-g)/2) / sqrt(g), obtained by
    differentiating u_S = rho_inf**((g-1)/2) f(k) along the shock and
    eliminating d+-u with d+-u = -+2/(g-1) d+-c.  Gives 1 - k_g ~ 6/sqrt(g) k**-1/2.
    """
    k = _check_k(k)
    A = math.sqrt(gamma) * (k - 1.0) * k ** (0.5 * (gamma - 1.0))
    f = f_polar(k, gamma)
    return _out((A - f) / (A + f) * _slope_ratio(k, gamma, 1.0))


def reflection_coefficient_doubled(k, gamma: float):
    """Variant with slope factor 2 f'(k) k**((3-g)/2)/sqrt(g).

    Kept for comparison only: it does not satisfy the shock reflection
    relation and behaves like 1 - 4/sqrt(g) k**-1/2 for large k.
    """
    k = _check_k(k)
    A = math.sqrt(gamma) * (k - 1.0) * k ** (0.5 * (gamma - 1.0))
    f = f_polar(k, gamma)
    return _out((A - f) / (A + f) * _slope_ratio(k, gamma, 2.0))


def kg_leading_order(k, gamma: float):
    return _out(1.0 - 6.0 / math.sqrt(gamma) * np.asarray(k, dtype=float) ** -0.5)


def shock_speed_interleaved(sample: ShockSample, gamma: float) -> bool:
    """Lax ordering lambda- < s' < lambda+ at the post-shock state."""
    c = sound_speed(sample.state.rho, gamma)
    return sample.state.u - c < sample.s_prime < sample.state.u + c
