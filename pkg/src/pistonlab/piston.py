"""Piston trajectories w(t) with w(0) = 0 and the hypotheses a trajectory must meet.

Each family returns (w, w', w'') and, where possible, closed-form bounds for
inf w', sup w' and sup |(1+t) w''| over t >= 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .gas import DomainError

WIDE_VARIATION_LIMIT = 3.0


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise DomainError("piston trajectory is defined for t >= 0 only")
    return t


def _out(*arrays):
    return tuple(a if np.ndim(a) else float(a) for a in arrays)


@dataclass(frozen=True)
class Constant:
    w0: float

    kind = "constant"

    def evaluate(self, t):
        t = _check_t(t)
        return _out(self.w0 * t, self.w0 + 0.0 * t, 0.0 * t)

    def bounds(self):
        return self.w0, self.w0, 0.0


@dataclass(frozen=True)
class LogPeriodic:
    """w'(t) = w_a + w_b cos(omega ln(1+t))."""
    w_a: float
    w_b: float
    omega: float

    kind = "log_periodic"

    def evaluate(self, t):
        t = _check_t(t)
        lt = np.log1p(t)
        ph = self.omega * lt
        cos, sin = np.cos(ph), np.sin(ph)
        # int_0^t cos(omega ln(1+s)) ds = [(1+t)(cos + omega sin) - 1] / (1 + omega^2)
        w = self.w_a * t + self.w_b * ((1.0 + t) * (cos + self.omega * sin) - 1.0) / (1.0 + self.omega ** 2)
        return _out(w, self.w_a + self.w_b * cos, -self.w_b * self.omega * sin / (1.0 + t))

    def bounds(self):
        amp = abs(self.w_b) if self.omega != 0.0 else 0.0
        lo = self.w_a - amp if self.omega != 0.0 else self.w_a + self.w_b
        hi = self.w_a + amp if self.omega != 0.0 else self.w_a + self.w_b
        return lo, hi, abs(self.w_b * self.omega)


@dataclass(frozen=True)
class Decaying:
    """w'(t) = w_a + w_b/(1+t)."""
    w_a: float
    w_b: float

    kind = "decaying"

    def evaluate(self, t):
        t = _check_t(t)
        return _out(self.w_a * t + self.w_b * np.log1p(t),
                    self.w_a + self.w_b / (1.0 + t),
                    -self.w_b / (1.0 + t) ** 2)

    def bounds(self):
        ends = (self.w_a, self.w_a + self.w_b)
        return min(ends), max(ends), abs(self.w_b)


@dataclass(frozen=True)
class Tabulated:
    """Piecewise monotone-cubic w' through knots (t_i, w'_i), constant past the last knot."""
    knots: tuple
    rule: str = "pchip"
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)

    kind = "tabulated"

    def __post_init__(self):
        if self.rule != "pchip":
            raise DomainError(f"unsupported interpolation rule {self.rule!r}")
        tk = np.array([k[0] for k in self.knots], dtype=float)
        vk = np.array([k[1] for k in self.knots], dtype=float)
        if tk.size < 2 or tk[0] != 0.0 or np.any(np.diff(tk) <= 0.0):
            raise DomainError("tabulated piston needs >= 2 knots, strictly increasing, starting at t=0")
        object.__setattr__(self, "knots", tuple((float(a), float(b)) for a, b in zip(tk, vk)))
        object.__setattr__(self, "_interp", PchipInterpolator(tk, vk, extrapolate=False))

    def evaluate(self, t):
        t = _check_t(t)
        tk = self._interp.x
        t_end = tk[-1]
        tc = np.minimum(t, t_end)
        prim = self._interp.antiderivative()
        wp_end = float(self._interp(t_end))
        w = prim(tc) + wp_end * np.maximum(t - t_end, 0.0)
        wp = self._interp(tc)
        wpp = np.where(t < t_end, self._interp.derivative()(tc), 0.0)
        return _out(w, wp, wpp)

    def bounds(self):
        return None


PistonSpec = Constant | LogPeriodic | Decaying | Tabulated


def evaluate(spec, t):
    """(w, w', w'') of the trajectory at time(s) t >= 0."""
    return spec.evaluate(t)


@dataclass
class AssumptionReport:
    w_star: float
    w_upper: float
    ratio: float
    a1_ok: bool
    ratio_ok: bool
    a3_sup: float
    a3_bound: float
    a3_ok: bool
    kappa: float
    varrho: float
    details: str = ""

    @property
    def ok(self) -> bool:
        return self.a1_ok and self.ratio_ok and self.a3_ok


def validate(spec, rho_inf: float, gamma: float, kappa: float = 1.0, varrho: float = 0.1,
             horizon: float = 100.0, samples: int = 4001) -> AssumptionReport:
    """Check positivity of w', the wide-variation ratio and the decay of (1+t) w''.

    Uses closed-form bounds for the analytic families; a tabulated trajectory
    is sampled densely on [0, horizon].
    """
    if not horizon > 0.0 or samples < 2:
        raise DomainError("validate needs horizon > 0 and samples >= 2")
    notes = [f"kappa={kappa:g} varrho={varrho:g} (monitor defaults, not derived)"]
    b = spec.bounds()
    if b is not None:
        w_star, w_upper, a3_sup = b
        notes.append("bounds: closed form over t >= 0")
    else:
        t = np.linspace(0.0, horizon, samples)
        _, wp, wpp = spec.evaluate(t)
        w_star, w_upper = float(wp.min()), float(wp.max())
        a3_sup = float(np.max(np.abs((1.0 + t) * wpp)))
        notes.append(f"bounds: sampled {samples} points on [0, {horizon:g}] (dt={horizon / (samples - 1):.3g})")
    a3_bound = kappa * rho_inf ** ((gamma - 1.0) / gamma + varrho)
    ratio = w_upper / w_star if w_star > 0.0 else math.inf
    rep = AssumptionReport(w_star=w_star, w_upper=w_upper, ratio=ratio, a1_ok=w_star > 0.0,
                           ratio_ok=ratio < WIDE_VARIATION_LIMIT, a3_sup=a3_sup, a3_bound=a3_bound,
                           a3_ok=a3_sup < a3_bound, kappa=kappa, varrho=varrho)
    if not rep.a1_ok:
        notes.append("positivity fails: piston speed not bounded away from 0")
    if not rep.ratio_ok:
        notes.append(f"wide-variation ratio {ratio:.4g} >= 3")
    if not rep.a3_ok:
        notes.append(f"decay fails: sup|(1+t)w''|={a3_sup:.4g} >= {a3_bound:.4g}")
    rep.details = "; ".join(notes)
    return rep


def a3_amplitude(rho_inf: float, gamma: float, kappa: float = 1.0, varrho: float = 0.1,
                 fraction: float = 0.5) -> float:
    """A perturbation size that meets the decay hypothesis with a safety fraction."""
    return fraction * kappa * rho_inf ** ((gamma - 1.0) / gamma + varrho)


def spec_to_dict(spec) -> dict:
    if isinstance(spec, Constant):
        return {"type": "constant", "w0": spec.w0}
    if isinstance(spec, LogPeriodic):
        return {"type": "log_periodic", "w_a": spec.w_a, "w_b": spec.w_b, "omega": spec.omega}
    if isinstance(spec, Decaying):
        return {"type": "decaying", "w_a": spec.w_a, "w_b": spec.w_b}
    return {"type": "tabulated", "knots": [list(k) for k in spec.knots], "rule": spec.rule}


def spec_from_dict(d: dict):
    kind = d.get("type")
    if kind == "constant":
        return Constant(float(d["w0"]))
    if kind == "log_periodic":
        return LogPeriodic(float(d["w_a"]), float(d["w_b"]), float(d["omega"]))
    if kind == "decaying":
        return Decaying(float(d["w_a"]), float(d["w_b"]))
    if kind == "tabulated":
        return Tabulated(tuple(tuple(k) for k in d["knots"]), d.get("rule", "pchip"))
    raise DomainError(f"unknown piston type {kind!r}")
