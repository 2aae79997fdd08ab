"""Discretisation error against exact references, and the origin of the
finite-B fit bias on the constant-field disk."""
import numpy as np
from numpy.testing import assert_allclose

from magneto_spectra.asymptotics import AsymptoticPrediction
from magneto_spectra.sweep import fit, run_sweep
from oracles import radial_lambda

B5 = [50.0, 100.0, 200.0, 400.0, 800.0]


def test_strip_sweep_tracks_exact_disk_eigenvalues(const_problem):
    recs = run_sweep(const_problem, B5, jobs=1)
    exact = np.array([radial_lambda(b) for b in B5])
    lam = np.array([r.lambda1 for r in recs])
    assert np.all(lam >= exact)  # conforming discretisation: upper bounds
    assert_allclose(lam, exact, rtol=5e-4)


def test_fit_bias_is_present_in_exact_eigenvalues(const_problem, constants):
    """Fitting the exact eigenvalues gives the same second coefficient as the
    strip values: the deviation from -C1 is a property of the B range, not of
    the discretisation."""
    model = AsymptoticPrediction("constant_field", constants.theta0, -constants.c1, 1 / 3)
    exact = fit([(b, radial_lambda(b)) for b in B5], model)
    strip = fit(run_sweep(const_problem, B5, jobs=1), model)
    assert abs(exact.a / constants.theta0 - 1) < 5e-3
    assert abs(strip.b - exact.b) < 0.05 * abs(constants.c1)
