import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from magneto_spectra import FieldModel, locate_minimum
from magneto_spectra.asymptotics import (CONJECTURAL, UPPER_BOUND_ONLY, AsymptoticsError,
                                         magnetic_curvature, predict_constant_field,
                                         predict_nth, predict_two_term, predictions,
                                         sign_lemma, theta_half, theta_half_degenerate,
                                         theta_half_model)
from magneto_spectra.geometry import BoundaryCurve
from magneto_spectra.halfline import moment
from magneto_spectra.identities import reduction_web


def test_theta_half_of_linear_field(var_field, constants):
    c = constants
    m = locate_minimum(var_field)
    expected = -c.c1 + (c.c1 / 2 - c.theta0 * c.xi0) + c.theta0**0.75 * np.sqrt(1.5 * c.c1)
    assert_allclose(theta_half(m, c), expected, rtol=1e-7)
    assert_allclose(theta_half(m, c), 0.74192, atol=1e-5)


def test_sign_lemma_positive(constants):
    c = constants
    assert_allclose(sign_lemma(c), c.c1 / 2 - c.theta0 * c.xi0, rtol=1e-15)
    assert sign_lemma(c) > 0.5


@given(st.floats(-2, 3), st.floats(-2, 2), st.floats(0, 4), st.floats(0.2, 3))
def test_full_law_equals_model_operator(kappa, dt, d2, bp):
    """k1 = k0 - d_t beta / b', alpha = d_s^2 beta / (2 b')."""
    from magneto_spectra.asymptotics import _theta_half_point
    from magneto_spectra.halfline import degennes_constants

    c = degennes_constants()
    full = _theta_half_point(kappa, dt, d2, bp, c)
    model = theta_half_model(kappa, kappa - dt / bp, d2 / (2 * bp), c)
    assert abs(full - model) <= 1e-12 * max(1.0, abs(full))


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_model_alpha_zero_is_degenerate_coefficient(k0, k1):
    assert abs(theta_half_model(k0, k1, 0.0) - theta_half_degenerate(k0, k1)) < 1e-12


def test_reduction_web(constants):
    assert all(abs(v) <= 1e-12 for v in reduction_web(constants).values())


def test_constant_field_prediction(constants):
    assert_allclose(predict_constant_field(100.0, 1.0, constants),
                    constants.theta0 * 100 - constants.c1 * 10)


def test_predictions_for_constant_disk(disk):
    f = FieldModel("1", disk)
    preds = {p.model: p for p in predictions(f, locate_minimum(f))}
    assert {"rough", "constant_field", "constant_boundary"} <= set(preds)
    assert "two_term" not in preds
    assert UPPER_BOUND_ONLY in preds["constant_boundary"].flags
    assert_allclose(preds["constant_field"].b, -0.2540681, atol=1e-7)
    # with a constant field the magnetic curvature is C1 k
    assert_allclose(preds["constant_boundary"].b, preds["constant_field"].b, rtol=1e-9)


def test_predictions_for_linear_field(var_field):
    m = locate_minimum(var_field)
    preds = {p.model: p for p in predictions(var_field, m, nev=3)}
    assert {"rough", "two_term", "model_op", "nth(2)", "nth(3)"} <= set(preds)
    assert CONJECTURAL in preds["nth(2)"].flags
    assert_allclose(preds["model_op"].b, preds["two_term"].b, rtol=1e-12)
    assert preds["nth(2)"].b > preds["two_term"].b


def test_nth_formula_multiplies_square_root_term(var_field, constants):
    m = locate_minimum(var_field)
    c = constants
    root = c.theta0**0.75 * np.sqrt(1.5 * c.c1 * 2 * m.alpha / m.b_prime)
    assert_allclose(predict_nth(3, m, c).b - predict_two_term(m, c).b, 4 * root, rtol=1e-12)


def test_magnetic_curvature_selects_normal_derivative(disk, constants):
    # trace constant (=1 on the unit circle), normal derivative varies
    f = FieldModel("1 + 0.5*(1 - x**2 - y**2)*(1 + x)", disk)
    vals, arg = magnetic_curvature(f.tables, 1.0, constants)
    assert arg.size >= 1
    # d_t beta = (1 + cos s) is smallest at s = pi, where the magnetic curvature peaks
    assert abs(abs(arg[0]) - np.pi) < 1e-2


def test_two_term_rejects_degenerate(disk):
    f = FieldModel("1", disk)
    with pytest.raises(AsymptoticsError):
        predict_two_term(locate_minimum(f))


def test_prediction_callable_and_serializable(var_field):
    p = predict_two_term(locate_minimum(var_field))
    assert_allclose(p(np.array([4.0])), [4 * p.a + 2 * p.b])
    assert p.to_dict()["model"] == "two_term"
