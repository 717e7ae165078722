import numpy as np
import pytest

from pistonlab.diagnostics import (char_derivatives, decomposition_residual, hypothesis_monitor,
                                   invariant_drift, mass_balance, narrow_check, piston_reflection_residual,
                                   shock_reflection_residual, weak_front)
from pistonlab.gas import DomainError
from pistonlab.moc import StepConfig, run
from pistonlab.piston import Constant, Decaying, a3_amplitude
from pistonlab.shock_polar import reflection_coefficient


@pytest.fixture(scope="module")
def constant_trace():
    return run(Constant(1.0), 1e-3, 1.4, 1.0, 3.0, 20)


@pytest.fixture(scope="module")
def decaying_trace():
    spec = Decaying(1.0, a3_amplitude(0.1, 1.4))
    return run(spec, 0.1, 1.4, 1.0, 12.0, 40, StepConfig(interp="cubic"))


def test_constant_piston_derivatives_vanish(constant_trace):
    A, B = constant_trace.levels[3], constant_trace.levels[4]
    D = char_derivatives(A, B, 1.4)
    assert np.max(np.abs(D.dpc)) < 1e-9 and np.max(np.abs(D.dmc)) < 1e-9
    with pytest.raises(DomainError):
        char_derivatives(B, A, 1.4)


def test_constant_piston_residuals_zero(constant_trace):
    for _, rp, rm in decomposition_residual(constant_trace, front_band=None):
        assert rp < 1e-6 and rm < 1e-6
    # round-off over a 1e-9 c/t floor
    assert all(v < 1e-4 for _, v in shock_reflection_residual(constant_trace, front_band=None))
    assert all(v < 1e-4 for _, v in piston_reflection_residual(constant_trace, Constant(1.0), front_band=None))


def test_constant_mass_balance(constant_trace):
    assert np.max(mass_balance(constant_trace)) < 1e-12


def test_constant_drift_zero(constant_trace):
    assert invariant_drift(constant_trace, 1.0, 1) < 1e-12
    assert invariant_drift(constant_trace, 1.0, 0) < 1e-12


def test_hypothesis_bound_example():
    tr = run(Constant(1.0), 1e-8, 2.0, 1.0, 1.2, 10)
    rep = hypothesis_monitor(tr)
    np.testing.assert_allclose(rep.bound1, 1e-6, rtol=1e-12)
    assert rep.all_pass and rep.pass_rate == 1.0
    assert rep.tilde_pass


def test_front_tracking_alternates(decaying_trace):
    f = weak_front(decaying_trace)
    assert f[0] == 0.0 and np.all((f >= -1e-9) & (f <= 1 + 1e-9))
    # the front reaches the shock and comes back
    assert f.max() > 0.95 and f[-1] < f.max()


def test_reflection_residuals_small(decaying_trace):
    shock = np.array([v for _, v in shock_reflection_residual(decaying_trace, t_min=6.0)])
    piston = np.array([v for _, v in piston_reflection_residual(decaying_trace, decaying_trace.spec, t_min=6.0)])
    assert shock.size and piston.size
    assert np.median(shock) < 0.1 and np.median(piston) < 0.1


def test_shock_residual_prefers_reflection_law(decaying_trace):
    """The solver never uses k_g; its shock-node ratio still follows the corrected coefficient."""
    right = np.median([v for _, v in shock_reflection_residual(decaying_trace, t_min=6.0)])
    wrong = np.median([v for _, v in shock_reflection_residual(
        decaying_trace, kg=lambda k, g: 3.0 * reflection_coefficient(k, g) + 0.2, t_min=6.0)])
    assert right < wrong


def test_narrow_boundary_point_and_statuses(decaying_trace):
    rep = narrow_check(decaying_trace, decaying_trace.spec, 1.4, 0.1, sample_points=30)
    assert len(rep.samples) == 30
    assert {s["status"] for s in rep.samples} <= {"pass", "fail", "inconclusive"}
    for s in rep.samples:
        if s["status"] != "inconclusive":
            assert s["dt_plus"] >= 0.0 and s["dt_minus"] >= 0.0


def test_drift_needs_boundary_hit(decaying_trace):
    with pytest.raises(DomainError):
        invariant_drift(decaying_trace, 11.9, 1)
