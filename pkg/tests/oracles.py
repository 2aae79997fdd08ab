"""Independent reference computations used only by the tests."""
from __future__ import annotations

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq, minimize_scalar
from scipy.special import pbdv


def radial_level(B: float, m: int, N: int) -> float:
    """Lowest eigenvalue of the angular-momentum-``m`` radial problem on the unit
    disk with unit field, symmetric-gauge, Neumann at ``r = 1`` (cell-centred FV)."""
    h = 1.0 / N
    r = (np.arange(N) + 0.5) * h
    rf = np.arange(1, N + 1) * h
    rl = np.concatenate([[0.0], rf[:-1]])
    rr = rf.copy()
    rr[-1] = 0.0
    d = (rl + rr) / h**2 + r * (m / r - B * r / 2) ** 2
    e = -rf[:-1] / h**2
    sq = np.sqrt(r)
    return float(eigh_tridiagonal(d / r, e / (sq[:-1] * sq[1:]), select="i",
                                  select_range=(0, 0))[0][0])


def radial_lambda(B: float, N: int = 4000, half_window: int = 3) -> float:
    """Ground state energy of the unit-field unit disk: minimum over angular
    momenta of the Richardson-extrapolated radial levels.  The minimizing
    momentum is located on a coarse grid first; the fine levels are computed
    in a window around it (the minimum must be interior to the window)."""
    ms = np.arange(int(B / 2 - 3 * np.sqrt(B)) - 2, int(B / 2 + 3 * np.sqrt(B)) + 3)
    m0 = int(ms[int(np.argmin([radial_level(B, m, 400) for m in ms]))])
    window = range(m0 - half_window, m0 + half_window + 1)
    vals = [(4 * radial_level(B, m, 2 * N) - radial_level(B, m, N)) / 3 for m in window]
    j = int(np.argmin(vals))
    assert 0 < j < len(vals) - 1, "minimizing angular momentum at the window edge"
    return float(vals[j])


def mu_parabolic(xi: float) -> float:
    """Lowest Neumann eigenvalue of ``-d^2 + (t + xi)^2`` on the half-line from
    parabolic cylinder functions: ``u = D_nu(sqrt2 (t + xi))``, ``mu = 2 nu + 1``,
    with ``nu`` the smallest root of ``D_nu'(sqrt2 xi) = 0``."""
    x = np.sqrt(2.0) * xi

    def g(nu):
        return pbdv(nu, x)[1]

    nus = np.linspace(-0.49, 1.5, 400)
    vals = np.array([g(v) for v in nus])
    k = int(np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0][0])
    nu = brentq(g, nus[k], nus[k + 1], xtol=1e-15, rtol=1e-15)
    return 2 * nu + 1


def theta0_parabolic() -> tuple[float, float]:
    """``(xi0, Theta0)`` by minimizing :func:`mu_parabolic`."""
    r = minimize_scalar(mu_parabolic, bounds=(-1.0, -0.5), method="bounded",
                        options={"xatol": 1e-10})
    return float(r.x), float(r.fun)


def dirichlet_laplacian_1d(n: int):
    """``K = tridiag(-1, 2, -1)/h^2`` on ``n`` interior nodes of ``[0, 1]`` and its
    exact eigenvalues ``4/h^2 sin^2(j pi h/2)``."""
    import scipy.sparse as sp

    h = 1.0 / (n + 1)
    K = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]) / h**2
    j = np.arange(1, n + 1)
    return K.tocsr(), sp.identity(n, format="csr"), 4 / h**2 * np.sin(j * np.pi * h / 2) ** 2
