import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.special import ellipe

from magneto_spectra.geometry import BoundaryCurve, GeometryError, TubularMap


def test_disk_length_and_curvature(disk):
    assert_allclose(disk.L, 2 * np.pi, rtol=1e-12)
    assert_allclose(disk.curvature(np.linspace(0, 6, 13)), 1.0, atol=1e-10)


def test_disk_frame_is_counter_clockwise_with_inward_normal(disk):
    g, tg, nu, _ = disk.frame(np.array([0.0, np.pi / 2]))
    assert_allclose(g[:, 0], [1, 0], atol=1e-12)
    assert_allclose(tg[:, 0], [0, 1], atol=1e-12)
    assert_allclose(nu[:, 0], [-1, 0], atol=1e-12)
    assert_allclose(g[:, 1], [0, 1], atol=1e-12)


def test_ellipse_perimeter_matches_complete_elliptic_integral():
    a, b = 2.0, 1.0
    e = BoundaryCurve.ellipse(a, b)
    assert_allclose(e.L, 4 * a * ellipe(1 - (b / a) ** 2), rtol=1e-11)


def test_ellipse_curvature_closed_form():
    a, b = 1.5, 0.8
    e = BoundaryCurve.ellipse(a, b)
    s = np.linspace(0, e.L, 37)[:-1]
    x, y = e.point(s)
    # k = a b / (b^4 x^2/a^2 ... ) written through the point: k = 1/(a^2 b^2 (x^2/a^4 + y^2/b^4)^{3/2})
    k = 1.0 / (a**2 * b**2 * (x**2 / a**4 + y**2 / b**4) ** 1.5)
    assert_allclose(e.curvature(s), k, rtol=1e-9)
    assert_allclose(e.kmax, a / b**2, rtol=1e-6)


def test_curvature_integrates_to_two_pi():
    c = BoundaryCurve.fourier(1.0, cos=[0.0, 0.1], sin=[0.05])
    s = c.s_table
    assert_allclose(np.sum(c.curvature(s)) * (c.L / s.size), 2 * np.pi, rtol=1e-9)


@given(st.floats(0.0, 2 * np.pi - 1e-9))
def test_arclength_parametrization_has_unit_speed(s):
    c = BoundaryCurve.ellipse(1.3, 0.9)
    h = 1e-5
    d = (c.point(s + h) - c.point(s - h))[:, 0] / (2 * h)
    assert_allclose(np.hypot(*d), 1.0, atol=1e-8)


def test_area_quadrature_integrates_area_and_moments():
    e = BoundaryCurve.ellipse(2.0, 1.0)
    pts, w = e.area_quadrature(256, 32)
    assert_allclose(w.sum(), 2 * np.pi, rtol=1e-12)
    assert_allclose(np.sum(w * pts[0] ** 2), np.pi * 2 * 1 * 4 / 4, rtol=1e-12)


@given(st.floats(0.0, 6.28), st.floats(0.0, 0.5))
def test_project_inverts_tubular_map(s, t):
    c = BoundaryCurve.ellipse(1.4, 1.0)
    tube = TubularMap(c, 0.6 / c.kmax)
    t = min(t, 0.5 / c.kmax)
    s2, t2 = c.project(tube(s, t)[:, 0] if np.ndim(tube(s, t)) > 1 else tube(s, t))
    assert_allclose(t2, t, atol=1e-9)
    assert abs((s2 - s + c.L / 2) % c.L - c.L / 2) < 1e-8


def test_tube_jacobian(disk):
    tube = TubularMap(disk, 0.5)
    assert_allclose(tube.jacobian(np.array([0.3]), np.array([0.2])), 0.8)


def test_tube_depth_guard(disk):
    with pytest.raises(GeometryError):
        TubularMap(disk, 1.0)
    with pytest.raises(GeometryError):
        TubularMap(disk, 0.5)(0.0, 0.7)


def test_config_round_trip():
    c = BoundaryCurve.ellipse(1.5, 1.0)
    c2 = BoundaryCurve.from_config(c.to_config())
    assert_allclose(c2.L, c.L)


@pytest.mark.parametrize("cfg", [{"type": "square"}, {"type": "ellipse", "a": 1.0},
                                 {"type": "disk", "radius": 2.0}])
def test_bad_configs(cfg):
    with pytest.raises(GeometryError):
        BoundaryCurve.from_config(cfg)
