import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pistonlab.gas import DomainError
from pistonlab.moc import StepConfig, init_from_steady, run, step, time_step
from pistonlab.piston import Constant, Decaying, LogPeriodic, a3_amplitude
from pistonlab.shock_polar import solve_steady_piston


def test_init_example():
    L = init_from_steady(Constant(1.0), 2 / 3, 2.0, 1.0, 20)
    np.testing.assert_allclose(L.rho, 4 / 3, rtol=1e-12)
    np.testing.assert_allclose(L.u, 1.0, rtol=1e-12)
    assert L.shock.s == pytest.approx(2.0, rel=1e-12)
    assert L.shock.s_prime == pytest.approx(2.0, rel=1e-12)
    assert L.check(Constant(1.0), 2.0) == []


def test_init_errors_and_minimal_level():
    with pytest.raises(DomainError):
        init_from_steady(Constant(1.0), 2 / 3, 2.0, 0.0, 10)
    with pytest.raises(DomainError):
        init_from_steady(Constant(1.0), 2 / 3, 2.0, 1.0, 2)
    L = init_from_steady(Constant(1.0), 2 / 3, 2.0, 1.0, 3)
    assert L.check(Constant(1.0), 2.0) == []
    L1 = step(L, Constant(1.0), 2 / 3, 2.0, StepConfig())
    assert L1.check(Constant(1.0), 2.0) == []


@pytest.mark.parametrize("gamma,rho_inf", [(2.0, 2 / 3), (1.4, 1e-4), (2.5, 1e-6)])
def test_constant_piston_self_similar(gamma, rho_inf):
    spec = Constant(1.0)
    s0 = solve_steady_piston(1.0, rho_inf, gamma).s0
    L = init_from_steady(spec, rho_inf, gamma, 1.0, 30)
    for _ in range(20):
        L1 = step(L, spec, rho_inf, gamma, StepConfig())
        np.testing.assert_allclose(L1.rho, L.rho, rtol=1e-12)
        np.testing.assert_allclose(L1.u, L.u, rtol=1e-12)
        assert L1.shock.s == pytest.approx(s0 * L1.t, rel=1e-10)
        L = L1


def test_time_step_and_config():
    L = init_from_steady(Constant(1.0), 0.1, 1.4, 1.0, 11)
    assert 0.0 < time_step(L, 1.4, 0.8) < time_step(L, 1.4, 1.0)
    with pytest.raises(DomainError):
        StepConfig(theta=1.5)
    with pytest.raises(DomainError):
        StepConfig(interp="linear")


def test_run_trace_and_snapshots():
    spec = Decaying(1.0, a3_amplitude(1e-2, 1.4))
    tr = run(spec, 1e-2, 1.4, 1.0, 3.0, 20, StepConfig(snapshot_every=5))
    assert tr.ok and tr.levels[-1].t == pytest.approx(3.0)
    assert len(tr.consecutive()) > 0
    h = tr.shock_history()
    assert np.all(np.diff(h["t"]) > 0.0) and h["t"].size == tr.n_steps + 1
    with pytest.raises(DomainError):
        run(spec, 1e-2, 1.4, 2.0, 1.0, 20)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([1.2, 1.4, 2.0, 2.5]), st.floats(-6, -1), st.sampled_from(["dec", "lp"]),
       st.sampled_from(["pchip", "cubic"]))
def test_levels_satisfy_invariants(gamma, lr, fam, interp):
    rho_inf = 10.0 ** lr
    wb = a3_amplitude(rho_inf, gamma)
    spec = Decaying(1.0, wb) if fam == "dec" else LogPeriodic(1.0, wb / 2.0, 2.0)
    tr = run(spec, rho_inf, gamma, 1.0, 2.5, 12, StepConfig(interp=interp))
    assert tr.ok
    for L in tr.levels:
        assert L.check(spec, gamma) == []
    # shock position is non-decreasing, post-shock velocity above the piston speed
    s = tr.shock_history()["s"]
    assert np.all(np.diff(s) > 0.0)
