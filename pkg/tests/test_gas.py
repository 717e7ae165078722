import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pistonlab.gas import (DomainError, GasState, check_gamma, eigenvalues, invariants, primitives,
                           rescale, riemann_invariants, sound_speed, state_from_invariants, unscale)

gammas = st.floats(1.05, 2.95)
rhos = st.floats(1e-12, 1e3)


def test_sound_speed_examples():
    assert sound_speed(0.0, 1.4) == 0.0
    assert sound_speed(1.0, 2.0) == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert sound_speed(4 / 3, 2.0) == pytest.approx(1.632993, abs=1e-6)
    with pytest.raises(DomainError):
        sound_speed(-1.0, 1.4)


def test_eigenvalue_examples():
    assert eigenvalues(GasState(0.0, 5.0), 2.0) == (5.0, 5.0)
    lm, lp = eigenvalues(GasState(1.0, 0.0), 2.0)
    assert lm == pytest.approx(-math.sqrt(2.0)) and lp == pytest.approx(math.sqrt(2.0))
    lm, lp = eigenvalues(GasState(4 / 3, 1.0), 2.0)
    assert (lm, lp) == pytest.approx((-0.632993, 2.632993), abs=1e-6)


def test_invariant_examples():
    assert riemann_invariants(GasState(0.0, 3.0), 1.4) == (3.0, 3.0)
    assert riemann_invariants(GasState(4 / 3, 1.0), 2.0) == pytest.approx((-2.265986, 4.265986), abs=1e-6)
    s = state_from_invariants(3.0, 3.0, 1.4)
    assert s.rho == 0.0 and s.u == 3.0
    s = state_from_invariants(-2.265986, 4.265986, 2.0)
    assert s.rho == pytest.approx(4 / 3, abs=2e-6) and s.u == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        state_from_invariants(1.0, 0.0, 1.4)


def test_gamma_range():
    with pytest.raises(DomainError, match="γ∈\\(1,3\\)"):
        check_gamma(3.5)
    assert check_gamma(1.4) == 1.4


def test_rescale_examples():
    s, t, x = rescale(GasState(4 / 3, 1.0), 2 / 3, 1.0, 1.0)
    assert s.rho == pytest.approx(2.0, abs=1e-15)
    for mode in ("vanishing_pressure", "high_speed"):
        s, t, x = rescale(GasState(0.7, 0.3), 1.0, 2.0, 3.0, mode=mode, gamma=1.4)
        assert (s.rho, s.u, t, x) == (0.7, 0.3, 2.0, 3.0)
    with pytest.raises(DomainError):
        rescale(GasState(1.0, 0.0), 0.0, 1.0, 1.0)


@given(rhos, rhos, gammas)
def test_sound_speed_monotone(r1, r2, g):
    if r1 < r2:
        assert sound_speed(r1, g) < sound_speed(r2, g) or math.isclose(r1, r2, rel_tol=1e-15)


@given(rhos, st.floats(-10, 10), gammas)
def test_eigenvalue_gap(rho, u, g):
    lm, lp = eigenvalues(GasState(rho, u), g)
    assert lp - lm == pytest.approx(2.0 * sound_speed(rho, g), rel=1e-14, abs=1e-14)


@given(st.floats(1e-6, 1e3), st.floats(-10, 10), gammas)
def test_invariant_round_trip(rho, u, g):
    rm, rp = riemann_invariants(GasState(rho, u), g)
    back = state_from_invariants(rm, rp, g)
    assert back.rho == pytest.approx(rho, rel=1e-12)
    assert back.u == pytest.approx(u, rel=1e-12, abs=1e-12)


@given(st.floats(1e-6, 1e3), st.floats(-10, 10), st.floats(1e-10, 1.0), gammas,
       st.sampled_from(["vanishing_pressure", "high_speed"]))
def test_rescale_inverse(rho, u, rho_inf, g, mode):
    s, t, x = rescale(GasState(rho, u), rho_inf, 2.5, 0.5, mode=mode, gamma=g)
    back, t2, x2 = unscale(s, rho_inf, t, x, mode=mode, gamma=g)
    assert back.rho == pytest.approx(rho, rel=1e-14)
    assert back.u == pytest.approx(u, rel=1e-14, abs=1e-300)
    assert t2 == pytest.approx(2.5, rel=1e-14) and x2 == 0.5


def test_array_invariants_round_trip():
    rho = np.geomspace(1e-8, 10.0, 50)
    u = np.linspace(-1.0, 2.0, 50)
    r, v = primitives(*invariants(rho, u, 1.4), 1.4)
    np.testing.assert_allclose(r, rho, rtol=1e-12)
    np.testing.assert_allclose(v, u, rtol=1e-12, atol=1e-14)
