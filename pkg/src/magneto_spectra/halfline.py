"""Neumann harmonic oscillator on the half-line and the de Gennes constants.

The family ``-d^2/dt^2 + (t + xi)^2`` on ``[0, T]`` with ``u'(0) = 0`` and an
artificial Dirichlet wall at ``T`` is discretized on a uniform grid.  The
``"fd"`` scheme is the ghost-point finite-difference stencil written in
symmetric (trapezoid-weighted) form, so it is a plain symmetric tridiagonal
problem; ``"fem"`` uses P1 elements with the consistent mass matrix.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import minimize_scalar

__all__ = [
    "HalfLineDisc",
    "HalfLineEig",
    "DeGennesConstants",
    "solve_mu",
    "find_minimum",
    "moment",
    "reduced_resolvent",
    "dmu_dxi",
    "degennes_constants",
]

SCAN_WINDOW = (-1.2, -0.4)


class HalfLineError(RuntimeError):
    """Raised when a half-line computation cannot be trusted."""


@dataclass(frozen=True)
class HalfLineDisc:
    """Uniform grid on ``[0, T]`` with ``n`` points (the last one is the wall)."""

    T: float = 15.0
    n: int = 3000
    scheme: str = "fd"

    def __post_init__(self):
        if self.T < 10:
            raise ValueError(f"truncation length T={self.T} must be >= 10")
        if self.n < 200:
            raise ValueError(f"grid size n={self.n} must be >= 200")
        if self.scheme not in ("fd", "fem"):
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def h(self) -> float:
        return self.T / (self.n - 1)

    @cached_property
    def t(self) -> np.ndarray:
        """Free nodes (the Dirichlet node at ``T`` is dropped)."""
        return np.arange(self.n - 1) * self.h

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid weights on the free nodes; used for every inner product."""
        w = np.full(self.n - 1, self.h)
        w[0] = 0.5 * self.h
        return w

    def refined(self) -> "HalfLineDisc":
        """Grid with half the spacing whose nodes contain the current ones."""
        return replace(self, n=2 * self.n - 1)

    def inner(self, f, g) -> float:
        return float(np.sum(self.weights * np.conj(f) * g).real)

    def derivative(self, f: np.ndarray) -> np.ndarray:
        """Centered first derivative; zero at ``t=0`` (Neumann) and one-sided at the wall."""
        h = self.h
        g = np.empty_like(f)
        g[1:-1] = (f[2:] - f[:-2]) / (2 * h)
        g[0] = 0.0
        g[-1] = (0.0 - f[-2]) / (2 * h)
        return g


@dataclass(frozen=True)
class HalfLineEig:
    xi: float
    mu: float
    u: np.ndarray
    disc: HalfLineDisc
    neumann_residual: float = 0.0


@dataclass(frozen=True)
class DeGennesConstants:
    """Universal constants of the de Gennes model.

    When built with ``richardson=True`` the scalar fields are extrapolated
    from the grids ``h`` and ``h/2``; ``u0`` and ``disc`` refer to the finer
    grid and ``coarse`` keeps the ``h`` grid result for moment extrapolation.
    """

    xi0: float
    theta0: float
    c1: float
    moments: tuple
    mu2: float
    u0: np.ndarray = field(repr=False)
    disc: HalfLineDisc = field(repr=False)
    dmu_residual: float = 0.0
    coarse: "DeGennesConstants | None" = field(default=None, repr=False)

    @property
    def t(self) -> np.ndarray:
        return self.disc.t

    def residuals(self) -> dict:
        """Residuals of the moment identities and the curvature identity for ``mu''``."""
        m = self.moments
        return {
            "M0-1": m[0] - 1.0,
            "M1": m[1],
            "M2-theta0/2": m[2] - self.theta0 / 2,
            "M3-C1/2": m[3] - self.c1 / 2,
            "mu2/2-3C1*sqrt(theta0)": self.mu2 / 2 - 3 * self.c1 * np.sqrt(self.theta0),
            "xi0^2-theta0": self.xi0**2 - self.theta0,
        }

    def to_dict(self) -> dict:
        out = {
            "xi0": self.xi0,
            "theta0": self.theta0,
            "c1": self.c1,
            "mu2": self.mu2,
            **{f"M{k}": float(v) for k, v in enumerate(self.moments)},
            "residuals": {k: float(v) for k, v in self.residuals().items()},
            "grid": {"T": self.disc.T, "n": self.disc.n, "scheme": self.disc.scheme},
            "richardson": self.coarse is not None,
        }
        return out


def _fd_tridiagonal(xi: float, disc: HalfLineDisc):
    h, t, w = disc.h, disc.t, disc.weights
    diag = np.full(t.size, 2.0 / h)
    diag[0] = 1.0 / h
    diag += w * (t + xi) ** 2
    off = np.full(t.size - 1, -1.0 / h)
    return diag, off


def _fem_matrices(xi: float, disc: HalfLineDisc):
    h, n = disc.h, disc.n - 1
    nodes = np.arange(disc.n) * h
    # 3-point Gauss on each element for the potential term
    gp, gw = np.polynomial.legendre.leggauss(3)
    a, b = nodes[:-1, None], nodes[1:, None]
    tq = 0.5 * (a + b) + 0.5 * h * gp[None, :]
    wq = 0.5 * h * gw[None, :]
    phi0 = (b - tq) / h
    phi1 = (tq - a) / h
    V = (tq + xi) ** 2
    m00 = np.sum(wq * phi0 * phi0, axis=1)
    m01 = np.sum(wq * phi0 * phi1, axis=1)
    m11 = np.sum(wq * phi1 * phi1, axis=1)
    v00 = np.sum(wq * V * phi0 * phi0, axis=1)
    v01 = np.sum(wq * V * phi0 * phi1, axis=1)
    v11 = np.sum(wq * V * phi1 * phi1, axis=1)
    ne = nodes.size - 1

    def assemble(d0, d01, d1):
        main = np.zeros(nodes.size)
        main[:-1] += d0
        main[1:] += d1
        mat = sp.diags([d01, main, d01], [-1, 0, 1], shape=(ne + 1, ne + 1), format="csc")
        return mat[:n, :n]

    K = assemble(v00 + 1.0 / h, v01 - 1.0 / h, v11 + 1.0 / h)
    M = assemble(m00, m01, m11)
    return K.tocsc(), M.tocsc()


def solve_mu(xi: float, disc: HalfLineDisc | None = None) -> HalfLineEig:
    """Lowest eigenpair of the de Gennes operator at momentum ``xi``.

    The eigenvector is normalized in the grid inner product and made
    positive at ``t = 0``.
    """
    disc = disc or HalfLineDisc()
    if abs(xi) > disc.T / 2:
        raise ValueError(f"|xi|={abs(xi)} exceeds T/2={disc.T / 2}")
    if disc.scheme == "fd":
        diag, off = _fd_tridiagonal(xi, disc)
        sw = np.sqrt(disc.weights)
        try:
            vals, vecs = eigh_tridiagonal(
                diag / disc.weights, off / (sw[:-1] * sw[1:]),
                select="i", select_range=(0, 0),
            )
        except np.linalg.LinAlgError as exc:
            raise HalfLineError(f"tridiagonal eigensolve failed at xi={xi}") from exc
        mu = float(vals[0])
        u = vecs[:, 0] / sw
        u /= np.sqrt(disc.inner(u, u))
        resid = abs(diag[0] * u[0] + off[0] * u[1] - mu * disc.weights[0] * u[0])
    else:
        K, M = _fem_matrices(xi, disc)
        try:
            vals, vecs = spla.eigsh(K, k=1, M=M, sigma=0.0, which="LM")
        except spla.ArpackError as exc:
            raise HalfLineError(f"sparse eigensolve failed at xi={xi}") from exc
        mu = float(vals[0])
        u = vecs[:, 0].real
        u /= np.sqrt(float(u @ (M @ u)))
        resid = abs((K @ u - mu * (M @ u))[0])
    if u[0] < 0:
        u = -u
    if abs(u[-1]) > 1e-8:
        warnings.warn(
            f"half-line truncation: |u(T-h)|={abs(u[-1]):.2e} at xi={xi}; increase T",
            RuntimeWarning,
            stacklevel=2,
        )
    return HalfLineEig(xi=float(xi), mu=mu, u=u, disc=disc, neumann_residual=float(resid))


def dmu_dxi(eig: HalfLineEig) -> float:
    """Derivative of the discrete eigenvalue in ``xi`` (Feynman-Hellmann)."""
    d = eig.disc
    if d.scheme == "fd":
        return 2.0 * d.inner(eig.u, (d.t + eig.xi) * eig.u)
    # consistent-mass variant: derivative of the potential matrix
    K1, _ = _fem_matrices(eig.xi + 1e-6, d)
    K0, _ = _fem_matrices(eig.xi - 1e-6, d)
    return float(eig.u @ ((K1 - K0) @ eig.u)) / 2e-6


def _second_difference(xi: float, mu: float, disc: HalfLineDisc, step: float) -> float:
    up = solve_mu(xi + step, disc).mu
    dn = solve_mu(xi - step, disc).mu
    return (up - 2 * mu + dn) / step**2


def _minimize_on_grid(disc: HalfLineDisc, step: float) -> DeGennesConstants:
    lo, hi = SCAN_WINDOW
    scan = np.linspace(lo, hi, 17)
    vals = np.array([solve_mu(x, disc).mu for x in scan])
    i = int(np.argmin(vals))
    if i == 0 or i == scan.size - 1:
        raise HalfLineError("mu(xi) is not unimodal on the scan window; refine the grid")
    res = minimize_scalar(
        lambda x: solve_mu(x, disc).mu,
        bracket=(scan[i - 1], scan[i], scan[i + 1]),
        method="brent",
        tol=1e-10,
    )
    xi = float(res.x)
    # Newton on the exact discrete derivative; mu'' ~ 1 so a few steps suffice
    eig = solve_mu(xi, disc)
    curv = _second_difference(xi, eig.mu, disc, step)
    for _ in range(20):
        g = dmu_dxi(eig)
        if abs(g) < 1e-13:
            break
        xi -= g / curv
        eig = solve_mu(xi, disc)
    g = dmu_dxi(eig)
    if abs(g) > 1e-8:
        raise HalfLineError(f"minimum not located: |mu'(xi0)|={abs(g):.2e}")
    d1 = _second_difference(xi, eig.mu, disc, step)
    d2 = _second_difference(xi, eig.mu, disc, step / 2)
    mu2 = (4 * d2 - d1) / 3
    u = eig.u
    tx = disc.t + xi
    moments = tuple(disc.inner(u, tx**k * u) for k in range(5))
    return DeGennesConstants(
        xi0=xi,
        theta0=eig.mu,
        c1=float(u[0] ** 2 / 3),
        moments=moments,
        mu2=float(mu2),
        u0=u,
        disc=disc,
        dmu_residual=float(abs(g)),
    )


def find_minimum(
    disc: HalfLineDisc | None = None, richardson: bool = True, step: float = 1e-2
) -> DeGennesConstants:
    """Locate ``xi0`` and fill every de Gennes constant.

    With ``richardson=True`` the computation is repeated on the grid with
    half the spacing and all scalars are extrapolated, which removes the
    ``O(h^2)`` discretization error.
    """
    disc = disc or HalfLineDisc()
    coarse = _minimize_on_grid(disc, step)
    if not richardson:
        return coarse
    fine = _minimize_on_grid(disc.refined(), step)

    def rx(a, b):
        return (4 * b - a) / 3

    return DeGennesConstants(
        xi0=rx(coarse.xi0, fine.xi0),
        theta0=rx(coarse.theta0, fine.theta0),
        c1=rx(coarse.c1, fine.c1),
        moments=tuple(rx(a, b) for a, b in zip(coarse.moments, fine.moments)),
        mu2=rx(coarse.mu2, fine.mu2),
        u0=fine.u0,
        disc=fine.disc,
        dmu_residual=fine.dmu_residual,
        coarse=coarse,
    )


_CACHE: dict = {}


def degennes_constants(disc: HalfLineDisc | None = None) -> DeGennesConstants:
    """Memoized :func:`find_minimum` for the default (or given) grid."""
    disc = disc or HalfLineDisc()
    if disc not in _CACHE:
        _CACHE[disc] = find_minimum(disc)
    return _CACHE[disc]


def moment(k: int, c: DeGennesConstants) -> float:
    """Grid quadrature of ``int (t + xi0)^k u0^2 dt`` (extrapolated when available)."""
    if not 0 <= k <= 4:
        raise ValueError("moment order must be in 0..4")

    def quad(u, d, xi):
        return d.inner(u, (d.t + xi) ** k * u)

    if c.coarse is None:
        return quad(c.u0, c.disc, c.xi0)
    return (4 * quad(c.u0, c.disc, _grid_xi(c)) - quad(c.coarse.u0, c.coarse.disc, c.coarse.xi0)) / 3


def _grid_xi(c: DeGennesConstants) -> float:
    """The ``xi0`` that belongs to the grid on which ``u0`` was computed."""
    if c.coarse is None:
        return c.xi0
    # extrapolated xi0 = (4 xf - xc)/3  =>  xf = (3 xi0 + xc)/4
    return (3 * c.xi0 + c.coarse.xi0) / 4


def _operator_pair(xi: float, d: HalfLineDisc):
    if d.scheme == "fd":
        diag, off = _fd_tridiagonal(xi, d)
        K = sp.diags([off, diag, off], [-1, 0, 1], format="csc")
        return K, sp.diags(d.weights, format="csc")
    return _fem_matrices(xi, d)


def _bordered_system(c: DeGennesConstants):
    d = c.disc
    K, M = _operator_pair(_grid_xi(c), d)
    mu = float(c.u0 @ (K @ c.u0)) / float(c.u0 @ (M @ c.u0))
    mu0 = (M @ c.u0)[:, None]
    top = sp.hstack([K - mu * M, sp.csc_matrix(mu0)])
    bottom = sp.hstack([sp.csc_matrix(mu0.T), sp.csc_matrix((1, 1))])
    return sp.vstack([top, bottom]).tocsc(), M


_LU_CACHE: dict = {}


def reduced_resolvent(rhs: np.ndarray, c: DeGennesConstants) -> np.ndarray:
    """Solve ``(H0 - Theta0) v = P rhs`` with ``<v, u0> = 0``.

    ``P`` removes the ``u0`` component of ``rhs``.  The constraint is imposed
    through a bordered (saddle-point) system, which is nonsingular as long as
    the second grid eigenvalue stays away from ``Theta0``.
    """
    d = c.disc
    rhs = np.asarray(rhs)
    if rhs.shape != d.t.shape:
        raise ValueError("rhs must live on the constants' grid")
    key = id(c)
    if key not in _LU_CACHE:
        try:
            _LU_CACHE.clear()
            system, mass = _bordered_system(c)
            _LU_CACHE[key] = (c, spla.splu(system), mass)
        except RuntimeError as exc:
            raise HalfLineError("reduced resolvent system is singular; refine the grid") from exc
    _, lu, mass = _LU_CACHE[key]
    mu0 = mass @ c.u0
    proj = rhs - (mu0 @ rhs) / (mu0 @ c.u0) * c.u0
    b = np.concatenate([mass @ proj, [0.0]])
    if np.iscomplexobj(b):
        sol = lu.solve(b.real.astype(float)) + 1j * lu.solve(b.imag.astype(float))
    else:
        sol = lu.solve(b)
    return sol[:-1]


def dudxi(c: DeGennesConstants, step: float = 1e-4) -> np.ndarray:
    """Centered difference of the normalized ground state in ``xi`` at ``xi0``."""
    xi = _grid_xi(c)
    up = solve_mu(xi + step, c.disc).u
    dn = solve_mu(xi - step, c.disc).u
    return (up - dn) / (2 * step)
