import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from magneto_spectra.halfline import (HalfLineDisc, degennes_constants, dmu_dxi, moment,
                                      reduced_resolvent, solve_mu)
from oracles import mu_parabolic, theta0_parabolic


def test_constants_match_parabolic_cylinder_oracle(constants):
    xi0, th0 = theta0_parabolic()
    assert_allclose(constants.theta0, th0, atol=1e-9)
    assert_allclose(constants.xi0, xi0, atol=1e-6)


def test_constants_reference_digits(constants):
    assert_allclose(constants.theta0, 0.5901061, atol=1e-7)
    assert_allclose(constants.xi0, -0.7681837, atol=1e-7)
    assert_allclose(constants.c1, 0.2540681, atol=1e-7)


def test_xi0_squared_is_theta0(constants):
    assert_allclose(constants.xi0**2, constants.theta0, atol=1e-8)


@pytest.mark.parametrize("xi", [-1.5, -0.77, -0.3, 0.0, 0.8])
def test_mu_matches_parabolic_cylinder(xi):
    eig = solve_mu(xi, HalfLineDisc(T=15.0, n=6000))
    assert_allclose(eig.mu, mu_parabolic(xi), atol=2e-6)


def test_mu_at_zero_is_harmonic_ground_state():
    assert_allclose(solve_mu(0.0, HalfLineDisc(n=6000)).mu, 1.0, atol=2e-6)


def test_fd_and_fem_schemes_agree():
    a = solve_mu(-0.7, HalfLineDisc(n=4000, scheme="fd")).mu
    b = solve_mu(-0.7, HalfLineDisc(n=4000, scheme="fem")).mu
    assert_allclose(a, b, atol=1e-5)


def test_feynman_hellmann_derivative_vanishes_at_minimum(constants):
    eig = solve_mu(constants.xi0, constants.disc)
    assert abs(dmu_dxi(eig)) < 1e-5


@given(st.floats(-1.6, 0.6))
def test_mu_bounded_below_by_theta0(xi):
    assert solve_mu(xi, HalfLineDisc(n=800)).mu >= 0.5901061 - 1e-4


def test_ground_state_normalized_and_positive(constants):
    u = constants.u0
    assert_allclose(constants.disc.inner(u, u), 1.0, atol=1e-10)
    assert np.all(u[: len(u) // 2] > 0)


@pytest.mark.parametrize("k,expected", [(0, 1.0), (1, 0.0)])
def test_low_moments(constants, k, expected):
    assert_allclose(moment(k, constants), expected, atol=1e-6)


def test_reduced_resolvent_is_orthogonal_and_inverts(constants):
    c = constants
    rhs = (c.t + c.xi0) * c.u0
    v = reduced_resolvent(rhs, c)
    assert abs(c.disc.inner(v, c.u0)) < 1e-10
    # apply (H - Theta0) by finite differences away from the wall
    d = c.disc
    h = d.h
    lap = np.empty_like(v)
    lap[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
    Hv = -lap + ((c.t + c.xi0) ** 2 - c.theta0) * v
    proj = rhs - d.inner(c.u0, rhs) * c.u0
    inner = slice(5, len(v) // 3)
    assert_allclose(Hv[inner], proj[inner], atol=1e-4)


def test_invalid_discretisations_rejected():
    with pytest.raises(ValueError):
        HalfLineDisc(T=5.0)
    with pytest.raises(ValueError):
        HalfLineDisc(n=10)
    with pytest.raises(ValueError):
        HalfLineDisc(scheme="spectral")


def test_constants_are_cached():
    assert degennes_constants() is degennes_constants()


def test_to_dict_has_residuals(constants):
    d = constants.to_dict()
    assert {"xi0", "theta0", "c1", "residuals"} <= set(d)
