import numpy as np
import pytest
from numpy.testing import assert_allclose

from magneto_spectra import FieldModel, SpectralProblem, locate_minimum
from magneto_spectra.critical_field import CriticalFieldError, hc3_formula, hc3_root


def test_formula_conventions_agree_for_unit_minimum(var_field, constants):
    m = locate_minimum(var_field)
    a = hc3_formula(10.0, m, constants, "displayed")
    b = hc3_formula(10.0, m, constants, "inverted")
    assert_allclose(a, b, rtol=1e-14)
    assert_allclose(a, 10 / constants.theta0 - 0.74192 / constants.theta0**1.5, rtol=2e-5)


def test_inverted_convention_inverts_two_term_law(disk, constants):
    f = FieldModel("2*(2 - x)", disk)  # b' = 2
    m = locate_minimum(f)
    from magneto_spectra.asymptotics import theta_half

    th = theta_half(m, constants)
    kappa = 40.0
    H = hc3_formula(kappa, m, constants, "inverted")
    B = kappa * H
    lhs = constants.theta0 * m.b_prime * B + th * np.sqrt(m.b_prime * B)
    # inversion is exact to the next order: relative error O(kappa^-1)
    assert abs(lhs - kappa**2) / kappa**2 < 1e-2
    assert hc3_formula(kappa, m, constants, "displayed") != H


def test_formula_requires_nondegenerate(disk):
    f = FieldModel("1", disk)
    with pytest.raises(CriticalFieldError):
        hc3_formula(5.0, locate_minimum(f))


def test_root_residual_and_certificate(var_problem):
    r = hc3_root(10.0, var_problem)
    assert r.residual <= 1e-5
    assert r.fields_coincide
    hs, vals = zip(*r.certificate)
    assert np.all(np.diff(vals) > 0)
    assert r.gap < 0.05


def test_unknown_convention(var_field):
    with pytest.raises(ValueError):
        hc3_formula(5.0, locate_minimum(var_field), convention="other")
