import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from magneto_spectra.field import (FieldError, FieldModel, StripGauge, boundary_trace_derivatives,
                                   gauge_A1, locate_minimum)
from magneto_spectra.geometry import BoundaryCurve, TubularMap


def test_trace_of_linear_field(var_field):
    s = np.linspace(0, 2 * np.pi, 9)
    assert_allclose(var_field.trace(s), 1 + 2 * np.sin(s / 2) ** 2, atol=1e-12)


def test_flux(var_field, disk):
    assert_allclose(var_field.flux(), 2 * np.pi, rtol=1e-10)
    assert_allclose(FieldModel("1", disk).flux(), np.pi, rtol=1e-10)


def test_trace_derivatives(var_field):
    tb = boundary_trace_derivatives(var_field)
    s = tb["s"]
    assert_allclose(tb["dbeta_dt"], np.cos(s), atol=1e-8)
    assert_allclose(tb["dbeta_ds"], np.sin(s), atol=1e-9)
    assert_allclose(tb["d2beta_ds2"], np.cos(s), atol=1e-8)


def test_minimum_data_of_linear_field(var_field):
    m = locate_minimum(var_field)
    assert abs((m.s_star + np.pi) % (2 * np.pi) - np.pi) < 1e-10
    assert_allclose([m.b_prime, m.b, m.alpha, m.dbeta_dt, m.kappa0], [1.0, 1.0, 0.5, 1.0, 1.0],
                    atol=1e-7)
    assert m.unique and m.nondegenerate and m.spectral_assumption


def test_constant_trace_is_degenerate(disk):
    m = locate_minimum(FieldModel("1", disk))
    assert not m.nondegenerate
    assert m.alpha == pytest.approx(0.0, abs=1e-8)


def test_two_minima_not_unique(disk):
    m = locate_minimum(FieldModel("2 - x**2", disk))
    assert not m.unique
    assert len(m.minima) == 2


def test_spectral_assumption_flag(disk):
    # interior minimum 0.2 < Theta0 * b' = 0.59 * 1
    m = locate_minimum(FieldModel("0.2 + 0.8*(x**2 + y**2)", disk))
    assert not m.spectral_assumption


@pytest.mark.parametrize("expr", ["-1", "x", "1/(x - 0.5)", "import os", "y +"])
def test_invalid_fields_rejected(disk, expr):
    with pytest.raises(FieldError):
        FieldModel(expr, disk)


@given(st.floats(0, 2 * np.pi), st.floats(0, 0.4))
def test_gauge_curl_and_quadrature(s, t):
    disk = BoundaryCurve.disk()
    g = StripGauge(FieldModel("2 - x + 0.3*y**2", disk), TubularMap(disk, 0.5))
    assert abs(float(g.curl_residual(s, t))) < 1e-7
    assert_allclose(float(g.A1(s, t)), gauge_A1(g, s, t), atol=1e-12)


def test_A1_constant_field_closed_form(disk):
    g = StripGauge(FieldModel("1", disk), TubularMap(disk, 0.5))
    t = np.linspace(0, 0.5, 6)
    assert_allclose(g.A1(0.3 * np.ones_like(t), t), t - t**2 / 2, atol=1e-14)


def test_model_potential_matches_taylor_expansion(var_field, disk):
    m = locate_minimum(var_field)
    g = StripGauge(var_field, TubularMap(disk, 0.5))
    s, t = 1e-2, 1e-2
    # A1 = t - k1 t^2/2 + alpha s^2 t + O(|s|^4 + t^3 + s^2 t^2) with k1 = k0 - d_t beta = 0
    assert abs(float(g.A1(s, t)) - float(g.A1_bar(s, t, m))) < 1e-6
