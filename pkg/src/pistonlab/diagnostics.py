"""Characteristic-derivative diagnostics and continuation monitors on a MOC trace."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .gas import DomainError, sound_speed
from .moc import EPS_GUARD, FootPointError, SolutionTrace, TimeLevel, _Sampler, _speeds_from
from .piston import evaluate, validate


DT_RATIO_SLACK = 0.05
# half-width, in xi, of the band around the start-up front left out of the
# residuals; fixed in xi so that refinement studies compare the same region
FRONT_BAND = 0.15
# derivatives below NOISE_FLOOR * c / t are round-off in a uniform state
NOISE_FLOOR = 1e-9


@dataclass
class CharDiagnostics:
    t: float
    x: np.ndarray
    c: np.ndarray
    dpc: np.ndarray
    dmc: np.ndarray
    gamma: float
    decomposition_residual_plus: float = math.nan
    decomposition_residual_minus: float = math.nan

    @property
    def dpu(self):
        return -2.0 / (self.gamma - 1.0) * self.dpc

    @property
    def dmu(self):
        return 2.0 / (self.gamma - 1.0) * self.dmc


def _offsets(A: TimeLevel, B: TimeLevel) -> np.ndarray:
    """Positions of B's nodes measured from A's piston."""
    y = (B.piston_x - A.piston_x) + B.xi * B.width
    y[-1] = B.shock.s - A.piston_x
    return y


def _feet(sampler: _Sampler, y, lam_head, dt, family: int, gamma: float):
    """Two-pass backward trace; returns invariants (R-, R+) at the feet."""
    foot = y - dt * lam_head
    lam_foot = _speeds_from(*sampler.invariants(foot), gamma)[family]
    return sampler.invariants(y - dt * 0.5 * (lam_head + lam_foot))


def _dx_end(c, h, side):
    if side == 0:
        return (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * h)
    return (3.0 * c[-1] - 4.0 * c[-2] + c[-3]) / (2.0 * h)


def char_derivatives(A: TimeLevel, B: TimeLevel, gamma: float, interp: str = "pchip") -> CharDiagnostics:
    """d+-c at B's nodes by differences along characteristics traced back to A.

    Where one family leaves the domain (C+ at the piston, C- at the shock) the
    missing derivative comes from d+c - d-c = 2c c_x with a one-sided c_x.
    """
    dt = B.t - A.t
    if not dt > 0.0:
        raise DomainError("levels must be ordered in time")
    if B.n < 3:
        raise DomainError("need at least 3 nodes")
    sampler = _Sampler(A, gamma, interp)
    y = _offsets(A, B)
    lm, lp = _speeds_from(B.r_minus, B.r_plus, gamma)
    cB = 0.25 * (gamma - 1.0) * (B.r_plus - B.r_minus)
    rm, rp = _feet(sampler, y[1:], lp[1:], dt, 1, gamma)
    dpc = np.empty(B.n)
    dpc[1:] = (cB[1:] - 0.25 * (gamma - 1.0) * (rp - rm)) / dt
    rm, rp = _feet(sampler, y[:-1], lm[:-1], dt, 0, gamma)
    dmc = np.empty(B.n)
    dmc[:-1] = (cB[:-1] - 0.25 * (gamma - 1.0) * (rp - rm)) / dt
    h = B.width / (B.n - 1)
    dpc[0] = dmc[0] + 2.0 * cB[0] * _dx_end(cB, h, 0)
    dmc[-1] = dpc[-1] - 2.0 * cB[-1] * _dx_end(cB, h, 1)
    return CharDiagnostics(t=B.t, x=B.x, c=cB, dpc=dpc, dmc=dmc, gamma=gamma)


def derivative_series(trace: SolutionTrace, interp: str | None = None):
    """(level, diagnostics) for every stored level with a stored predecessor."""
    interp = trace.interp if interp is None else interp
    return [(B, char_derivatives(A, B, trace.gamma, interp)) for A, B in trace.consecutive()]


def _lambda_at(level: TimeLevel, x, family: int, gamma: float):
    lam = _speeds_from(level.r_minus, level.r_plus, gamma)[family]
    return np.interp((x - level.piston_x) / level.width, level.xi, lam)


def weak_front(trace: SolutionTrace) -> np.ndarray:
    """xi of the start-up weak discontinuity on every stored level.

    The uniform start does not match w''(t0), so a kink in the characteristic
    derivatives leaves the piston along C+ at t0 and then alternates families
    at each boundary.  Tracking stops (NaN) at the first gap between stored
    levels.
    """
    gamma = trace.gamma
    levels = trace.levels
    out = np.full(len(levels), np.nan)
    if not levels or levels[0].step != 0:
        return out
    x, family = levels[0].piston_x, 1
    out[0] = 0.0
    for j, (A, B) in enumerate(zip(levels, levels[1:]), start=1):
        if B.step != A.step + 1:
            break
        dt = B.t - A.t
        la = _lambda_at(A, x, family, gamma)
        xn = x + 0.5 * dt * (la + _lambda_at(B, x + dt * la, family, gamma))
        ga = A.shock.s - x if family == 1 else x - A.piston_x
        gb = B.shock.s - xn if family == 1 else xn - B.piston_x
        if gb < 0.0:
            rest = dt * (1.0 - ga / (ga - gb))
            family = 1 - family
            if family == 0:
                x = B.shock.s + rest * (_lambda_at(B, B.shock.s, 0, gamma) - B.shock.s_prime)
            else:
                wp = evaluate(trace.spec, B.t)[1]
                x = B.piston_x + rest * (_lambda_at(B, B.piston_x, 1, gamma) - wp)
        else:
            x = xn
        out[j] = (x - B.piston_x) / B.width
    return out


def _near_front(xi, fronts, band):
    mask = np.zeros(np.shape(xi), dtype=bool)
    for f in fronts:
        if np.isfinite(f):
            mask |= np.abs(xi - f) <= band
    return mask


def decomposition_residual(trace: SolutionTrace, gamma: float | None = None,
                           front_band: float | None = FRONT_BAND, t_min: float = -math.inf):
    """Residuals of the two characteristic decompositions at interior nodes.

    Returns a list of (t, res_plus, res_minus): res_plus is for the d+d-c
    equation, res_minus for d-d+c, each max over nodes divided by
    max(|d+c|, |d-c|, eps)/t.  Nodes within ``front_band`` (in xi) of the
    start-up weak discontinuity are left out (None keeps every node).
    """
    gamma = trace.gamma if gamma is None else gamma
    lv = trace.levels
    fronts = weak_front(trace)
    level_index = {id(L): i for i, L in enumerate(lv)}
    # each first-order difference sits at its segment midpoint, so unequal
    # consecutive steps (retries, the final step) would bias the nested difference
    triples = [(a, b, c) for a, b, c in zip(lv, lv[1:], lv[2:])
               if b.step == a.step + 1 and c.step == b.step + 1
               and abs((c.t - b.t) / (b.t - a.t) - 1.0) < DT_RATIO_SLACK and c.t >= t_min]
    if not triples:
        raise DomainError("decomposition residual needs three consecutive levels")
    coef = (gamma + 1.0) / (gamma - 1.0)
    out = []
    for L0, L1, L2 in triples:
        D1 = char_derivatives(L0, L1, gamma, trace.interp)
        D2 = char_derivatives(L1, L2, gamma, trace.interp)
        dt = L2.t - L1.t
        y = _offsets(L1, L2)[1:-1]
        lm, lp = _speeds_from(L2.r_minus[1:-1], L2.r_plus[1:-1], gamma)
        # feet of interior nodes on L1, then the derivative fields sampled there
        s1 = _Sampler(L1, gamma, trace.interp)
        xi_p = s1.xi_of(y - dt * 0.5 * (lp + _speeds_from(*s1.invariants(y - dt * lp), gamma)[1]))
        xi_m = s1.xi_of(y - dt * 0.5 * (lm + _speeds_from(*s1.invariants(y - dt * lm), gamma)[0]))
        # linear sampling keeps the boundary values (one-sided c_x) out of the
        # brackets of the interior feet
        dmc_foot = np.interp(xi_p, L1.xi, D1.dmc)
        dpc_foot = np.interp(xi_m, L1.xi, D1.dpc)
        c = D2.c[1:-1]
        dpc, dmc = D2.dpc[1:-1], D2.dmc[1:-1]
        r_plus = (dmc - dmc_foot) / dt - coef / (2.0 * c) * (dpc + dmc) * dmc
        r_minus = (dpc - dpc_foot) / dt - coef / (2.0 * c) * (dpc + dmc) * dpc
        scale = max(np.max(np.abs(D2.dpc)), np.max(np.abs(D2.dmc)), NOISE_FLOOR * np.max(c) / L2.t, EPS_GUARD) / L2.t
        D2.profile = (r_plus, r_minus)
        keep = np.ones(r_plus.size, dtype=bool)
        if front_band is not None:
            i2 = level_index[id(L2)]
            keep = ~_near_front(L2.xi[1:-1], fronts[i2 - 2:i2 + 1], front_band)
        if not keep.any():
            continue
        rp_n = float(np.max(np.abs(r_plus[keep])) / scale)
        rm_n = float(np.max(np.abs(r_minus[keep])) / scale)
        D2.decomposition_residual_plus, D2.decomposition_residual_minus = rp_n, rm_n
        out.append((L2.t, rp_n, rm_n))
    return out


def _clear_levels(trace, front_band, end, t_min):
    """Consecutive pairs whose levels keep the start-up front away from one boundary."""
    fronts = weak_front(trace)
    idx = {id(L): i for i, L in enumerate(trace.levels)}
    for A, B in trace.consecutive():
        if B.t < t_min:
            continue
        if front_band is not None:
            near = _near_front(np.array([end]), fronts[[idx[id(A)], idx[id(B)]]], front_band)
            if near[0]:
                continue
        yield B, char_derivatives(A, B, trace.gamma, trace.interp)


def shock_reflection_residual(trace: SolutionTrace, gamma: float | None = None, kg=None,
                              front_band: float | None = FRONT_BAND, t_min: float = -math.inf):
    """(t, |d+c + k_g d-c| / max(|d-c|, eps)) at the shock node; ``kg`` overrides k_g(k).

    Levels where the start-up front sits within ``front_band`` (in xi) of the
    shock are skipped.
    """
    gamma = trace.gamma if gamma is None else gamma
    out = []
    for B, D in _clear_levels(trace, front_band, 1.0, t_min):
        k_g = B.shock.k_g if kg is None else kg(B.shock.k, gamma)
        num = abs(D.dpc[-1] + k_g * D.dmc[-1])
        floor = NOISE_FLOOR * D.c[-1] / B.t
        out.append((B.t, num / max(abs(D.dmc[-1]), floor, EPS_GUARD) if num else 0.0))
    return out


def piston_reflection_residual(trace: SolutionTrace, spec, gamma: float | None = None,
                               front_band: float | None = FRONT_BAND, t_min: float = -math.inf):
    """(t, |d+c - d-c - (1-g) w''| / scale) at the piston node.

    scale = max(|d+c|, |d-c|, |(1-g) w''|, eps); levels with the start-up
    front near the piston are skipped.
    """
    gamma = trace.gamma if gamma is None else gamma
    out = []
    for B, D in _clear_levels(trace, front_band, 0.0, t_min):
        forcing = (1.0 - gamma) * evaluate(spec, B.t)[2]
        num = abs(D.dpc[0] - D.dmc[0] - forcing)
        scale = max(abs(D.dpc[0]), abs(D.dmc[0]), abs(forcing), NOISE_FLOOR * D.c[0] / B.t, EPS_GUARD)
        out.append((B.t, num / scale if num else 0.0))
    return out


@dataclass
class HypothesisReport:
    t: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h3: np.ndarray
    bound1: np.ndarray
    bound2: np.ndarray
    bound3: np.ndarray
    tilde1: np.ndarray
    tilde2: np.ndarray
    tilde3: np.ndarray
    nu_hat: float
    delta1: float
    delta2: float

    @property
    def pass1(self):
        return self.h1 <= self.bound1

    @property
    def pass2(self):
        return self.h2 <= self.bound2

    @property
    def pass3(self):
        return self.h3 <= self.bound3

    @property
    def all_pass(self) -> bool:
        return bool(np.all(self.pass1) and np.all(self.pass2) and np.all(self.pass3))

    @property
    def pass_rate(self) -> float:
        """Fraction of levels where all three inequalities hold."""
        ok = self.pass1 & self.pass2 & self.pass3
        return float(ok.mean()) if ok.size else math.nan

    @property
    def tilde_pass(self) -> bool:
        return bool(np.all(self.h1 <= self.tilde1) and np.all(self.h2 <= self.tilde2)
                    and np.all(self.h3 <= self.tilde3))

    def worst_margins(self) -> tuple[float, float, float]:
        """Largest h/bound over the trace for each of the three inequalities."""
        def m(h, b):
            return float(np.max(h / b)) if h.size else math.nan
        return m(self.h1, self.bound1), m(self.h2, self.bound2), m(self.h3, self.bound3)


def hypothesis_monitor(trace: SolutionTrace, delta1: float = 0.1, delta2: float = 0.1,
                       gamma: float | None = None, rho_inf: float | None = None) -> HypothesisReport:
    """The three continuation inequalities at every level that has derivative data.

    The tilde bounds use half of bound 1, 2 delta1/3 in bound 2 and the margin
    factor (1 - nu_hat/2 rho_inf**((g-1)/(2g))) on bound 3, with nu_hat the
    empirical candidate min over levels of 2 (1 - h3/bound3) rho_inf**(-(g-1)/(2g)).
    """
    gamma = trace.gamma if gamma is None else gamma
    rho_inf = trace.rho_inf if rho_inf is None else rho_inf
    rows = []
    for B, D in derivative_series(trace):
        wp = evaluate(trace.spec, B.t)[1]
        h1 = float(np.max(np.abs(B.rho - B.shock.state.rho)))
        h2 = float(np.max(np.abs(B.shock.s_prime - B.u)))
        h3 = B.t * float(max(np.max(np.abs(D.dpc)), np.max(np.abs(D.dmc))))
        rows.append((B.t, h1, h2, h3, wp))
    arr = np.array(rows, dtype=float).reshape(-1, 5)
    t, h1, h2, h3, wp = arr.T
    e_half = (gamma - 1.0) / (2.0 * gamma)
    b1 = np.full_like(t, rho_inf ** ((gamma + 1.0) / (2.0 * gamma)))
    b2 = (wp ** ((gamma - 2.0) / gamma) + delta1) * rho_inf ** ((gamma - 1.0) / gamma)
    b3 = np.full_like(t, delta2 * rho_inf ** e_half)
    nu_hat = float(np.min(2.0 * (1.0 - h3 / b3)) * rho_inf ** -e_half) if t.size else math.nan
    return HypothesisReport(
        t=t, h1=h1, h2=h2, h3=h3, bound1=b1, bound2=b2, bound3=b3,
        tilde1=0.5 * b1,
        tilde2=(wp ** ((gamma - 2.0) / gamma) + 2.0 * delta1 / 3.0) * rho_inf ** ((gamma - 1.0) / gamma),
        tilde3=b3 * (1.0 - 0.5 * nu_hat * rho_inf ** e_half),
        nu_hat=nu_hat, delta1=delta1, delta2=delta2)


def _exit_time(trace_levels, j0: int, x0: float, family: int, gamma: float):
    """Forward Heun trace of C+ (family 1, exits at the shock) or C- (exits at the piston)."""
    if family == 1 and x0 >= trace_levels[j0].shock.s:
        return trace_levels[j0].t
    if family == 0 and x0 <= trace_levels[j0].piston_x:
        return trace_levels[j0].t
    x = x0
    for A, B in zip(trace_levels[j0:], trace_levels[j0 + 1:]):
        if B.step != A.step + 1:
            return None
        dt = B.t - A.t
        la = _lambda_at(A, x, family, gamma)
        xp = x + dt * la
        xn = x + 0.5 * dt * (la + _lambda_at(B, xp, family, gamma))
        ga = A.shock.s - x if family == 1 else x - A.piston_x
        gb = B.shock.s - xn if family == 1 else xn - B.piston_x
        if gb <= 0.0:
            return A.t + dt * ga / (ga - gb)
        x = xn
    return None


@dataclass
class NarrowReport:
    samples: list = field(default_factory=list)
    width_ratio: np.ndarray = None
    width_ok: bool = True
    coefficient: float = math.nan
    width_coefficient: float = math.nan

    @property
    def conclusive(self):
        return [s for s in self.samples if s["status"] != "inconclusive"]

    @property
    def all_pass(self) -> bool:
        return all(s["status"] == "pass" for s in self.conclusive)


def narrow_check(trace: SolutionTrace, spec, gamma: float, rho_inf: float, delta1: float = 0.1,
                 sigma: float = 0.1, sample_points: int = 100, seed: int = 0,
                 horizon: float = 100.0) -> NarrowReport:
    """Exit times of both characteristics from random interior points, and the wedge width.

    A sample whose characteristic has not reached a boundary before the end of
    the stored levels (or crosses a gap in them) is marked inconclusive.
    """
    rep = validate(spec, rho_inf, gamma, horizon=horizon)
    w_lo, w_hi = rep.w_star, rep.w_upper
    if not w_lo > 0.0:
        raise DomainError("narrow estimate needs inf w' > 0")
    denom = math.sqrt(gamma) * w_lo ** ((gamma - 1.0) / gamma) - sigma
    if not denom > 0.0:
        raise DomainError("sigma too large: exit-time bound has a non-positive denominator")
    num = delta1 + w_lo ** (-1.0 / gamma) * w_hi ** ((gamma - 1.0) / gamma)
    coef = num / denom * rho_inf ** ((gamma - 1.0) / (2.0 * gamma))
    out = NarrowReport(coefficient=coef, width_coefficient=num * rho_inf ** ((gamma - 1.0) / gamma))
    levels = trace.levels
    t = np.array([L.t for L in levels])
    width = np.array([L.width for L in levels])
    out.width_ratio = width / (out.width_coefficient * t)
    out.width_ok = bool(np.all(out.width_ratio <= 1.0))
    rng = np.random.default_rng(seed)
    for _ in range(sample_points):
        j = int(rng.integers(0, len(levels)))
        xi = float(rng.uniform(0.0, 1.0))
        L = levels[j]
        x0 = L.piston_x + xi * L.width
        t_plus = _exit_time(levels, j, x0, 1, gamma)
        t_minus = _exit_time(levels, j, x0, 0, gamma)
        bound = coef * L.t
        rec = {"t": L.t, "xi": xi, "bound": bound,
               "dt_plus": None if t_plus is None else t_plus - L.t,
               "dt_minus": None if t_minus is None else t_minus - L.t}
        if t_plus is None or t_minus is None:
            rec["status"] = "inconclusive"
        else:
            rec["status"] = "pass" if max(rec["dt_plus"], rec["dt_minus"]) <= bound else "fail"
        out.samples.append(rec)
    return out


def mass_balance(trace: SolutionTrace) -> np.ndarray:
    """Relative defect of d/dt(mass in the wedge) = rho_inf s' per stored level."""
    L0 = trace.levels[0]
    m0 = np.trapezoid(L0.rho, L0.x - L0.piston_x)
    out = []
    for L in trace.levels:
        m = np.trapezoid(L.rho, L.x - L.piston_x)
        out.append(abs(m - m0 - trace.rho_inf * (L.shock.s - L0.shock.s)) / (trace.rho_inf * L.shock.s))
    return np.array(out)


def invariant_drift(trace: SolutionTrace, t_start: float, family: int = 1, xi0: float | None = None) -> float:
    """Change of the transported invariant along one traced characteristic.

    Starts at the first stored level with t >= t_start, at xi0 (default: the
    piston for C+, the shock for C-) and follows the characteristic to the
    opposite boundary.  Exact solutions give zero.
    """
    gamma = trace.gamma
    levels = trace.levels
    j = next(i for i, L in enumerate(levels) if L.t >= t_start)
    xi0 = (0.0 if family == 1 else 1.0) if xi0 is None else xi0

    def r_at(L, x):
        r = L.r_plus if family == 1 else L.r_minus
        return float(PchipInterpolator(L.xi, r)(np.clip((x - L.piston_x) / L.width, 0.0, 1.0)))

    L = levels[j]
    x = L.piston_x + xi0 * L.width
    r0 = r_at(L, x)
    for A, B in zip(levels[j:], levels[j + 1:]):
        if B.step != A.step + 1:
            raise DomainError("invariant drift needs consecutive levels")
        dt = B.t - A.t
        la = _lambda_at(A, x, family, gamma)
        xp = x + dt * la
        xn = x + 0.5 * dt * (la + _lambda_at(B, xp, family, gamma))
        if (family == 1 and xn >= B.shock.s) or (family == 0 and xn <= B.piston_x):
            return abs(r_at(A, x) - r0)
        x = xn
    raise DomainError("characteristic did not reach a boundary within the trace")
