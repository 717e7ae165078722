"""Gamma-law isentropic gas: p = rho**gamma.

Sound speed, characteristic speeds, Riemann invariants and the two
rescalings that map the small-density piston problem onto an O(1) one.
All quantities are nondimensional.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Input outside the physical domain of the gas model."""


def check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 1.0 < gamma < 3.0:
        raise DomainError(f"gamma={gamma!r} outside the admissible range γ∈(1,3)")
    return gamma


@dataclass(frozen=True)
class GasState:
    rho: float
    u: float

    def __post_init__(self):
        if not self.rho >= 0.0:
            raise DomainError(f"negative density rho={self.rho!r}")

    def c(self, gamma: float) -> float:
        return float(sound_speed(self.rho, gamma))


def sound_speed(rho, gamma: float):
    """c = sqrt(gamma) * rho**((gamma-1)/2). Works elementwise on arrays."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0.0):
        raise DomainError("negative density")
    c = np.sqrt(gamma) * rho ** (0.5 * (gamma - 1.0))
    return c if c.ndim else float(c)


def eigenvalues(state: GasState, gamma: float) -> tuple[float, float]:
    """(lambda_minus, lambda_plus) = (u - c, u + c)."""
    c = sound_speed(state.rho, gamma)
    return state.u - c, state.u + c


def riemann_invariants(state: GasState, gamma: float) -> tuple[float, float]:
    """(R-, R+) = u -/+ 2c/(gamma-1)."""
    q = 2.0 * sound_speed(state.rho, gamma) / (gamma - 1.0)
    return state.u - q, state.u + q


def invariants(rho, u, gamma: float):
    """Array version of :func:`riemann_invariants`; returns (R-, R+)."""
    q = 2.0 * sound_speed(rho, gamma) / (gamma - 1.0)
    return u - q, u + q


def primitives(r_minus, r_plus, gamma: float):
    """Array inverse of :func:`invariants`; returns (rho, u)."""
    r_minus = np.asarray(r_minus, dtype=float)
    r_plus = np.asarray(r_plus, dtype=float)
    c = 0.25 * (gamma - 1.0) * (r_plus - r_minus)
    if np.any(c < 0.0):
        raise DomainError("R+ < R-: negative sound speed")
    u = 0.5 * (r_plus + r_minus)
    rho = (c * c / gamma) ** (1.0 / (gamma - 1.0))
    return rho, u


def state_from_invariants(r_minus: float, r_plus: float, gamma: float) -> GasState:
    if r_plus < r_minus:
        raise DomainError(f"non-physical invariants: R+={r_plus!r} < R-={r_minus!r}")
    rho, u = primitives(r_minus, r_plus, gamma)
    return GasState(float(rho), float(u))


def rescale(state: GasState, rho_inf: float, t: float, x: float,
            mode: str = "vanishing_pressure", gamma: float | None = None):
    """Map (state, t, x) to the scaled variables of the small-density limit.

    ``vanishing_pressure``: (rho/rho_inf, u), t, x.
    ``high_speed``: (rho/rho_inf, u*rho_inf**((1-g)/2)), t*rho_inf**((g-1)/2), x;
    this mode needs ``gamma``.
    """
    if not rho_inf > 0.0:
        raise DomainError(f"rho_inf must be positive, got {rho_inf!r}")
    if mode == "vanishing_pressure":
        return GasState(state.rho / rho_inf, state.u), t, x
    if mode == "high_speed":
        if gamma is None:
            raise DomainError("high_speed rescaling needs gamma")
        e = 0.5 * (gamma - 1.0)
        return GasState(state.rho / rho_inf, state.u * rho_inf ** (-e)), t * rho_inf ** e, x
    raise DomainError(f"unknown rescale mode {mode!r}")


def unscale(state: GasState, rho_inf: float, t: float, x: float,
            mode: str = "vanishing_pressure", gamma: float | None = None):
    """Inverse of the rescalings."""
    if not rho_inf > 0.0:
        raise DomainError(f"rho_inf must be positive, got {rho_inf!r}")
    if mode == "vanishing_pressure":
        return GasState(state.rho * rho_inf, state.u), t, x
    if mode == "high_speed":
        if gamma is None:
            raise DomainError("high_speed rescaling needs gamma")
        e = 0.5 * (gamma - 1.0)
        return GasState(state.rho * rho_inf, state.u * rho_inf ** e), t * rho_inf ** (-e), x
    raise DomainError(f"unknown rescale mode {mode!r}")
