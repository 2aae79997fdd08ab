"""Smooth closed boundary curves in arclength parametrization.

Every curve is given by an analytic angular parametrization ``P(phi)``
(disk, ellipse, or a star-shaped radial Fourier series).  The arclength
``s(phi)`` is the antiderivative of ``|P'(phi)|`` computed from its Fourier
series, and the inverse map ``phi(s)`` is a periodic cubic spline polished by
one Newton step, so positions, tangents and curvatures are available at any
``s`` to near machine precision.

Conventions: counter-clockwise orientation, ``nu`` is the inward unit normal
with ``det(gamma'(s), nu(s)) = 1`` and ``gamma''(s) = k(s) nu(s)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

__all__ = ["BoundaryCurve", "TubularMap", "curvature", "boundary_map"]

TWO_PI = 2.0 * np.pi


class GeometryError(ValueError):
    pass


def _radial_derivs(c0, cos, sin, phi):
    k = np.arange(1, len(cos) + 1)[:, None]
    a = np.asarray(cos, float)[:, None]
    b = np.asarray(sin, float)[:, None]
    ph = np.atleast_1d(phi)[None, :]
    ck, sk = np.cos(k * ph), np.sin(k * ph)
    r = c0 + np.sum(a * ck + b * sk, axis=0)
    r1 = np.sum(k * (-a * sk + b * ck), axis=0)
    r2 = np.sum(-(k**2) * (a * ck + b * sk), axis=0)
    return r, r1, r2


@dataclass(frozen=True)
class _Parametrization:
    kind: str
    params: dict

    def derivs(self, phi):
        """Return ``P, P', P''`` as arrays of shape ``(2, n)``."""
        phi = np.atleast_1d(np.asarray(phi, float))
        c, s = np.cos(phi), np.sin(phi)
        if self.kind == "disk":
            R = self.params["R"]
            P = R * np.array([c, s])
            return P, R * np.array([-s, c]), -P
        if self.kind == "ellipse":
            a, b = self.params["a"], self.params["b"]
            P = np.array([a * c, b * s])
            return P, np.array([-a * s, b * c]), -P
        r, r1, r2 = _radial_derivs(self.params["c0"], self.params["cos"], self.params["sin"], phi)
        P = np.array([r * c, r * s])
        P1 = np.array([r1 * c - r * s, r1 * s + r * c])
        P2 = np.array([r2 * c - 2 * r1 * s - r * c, r2 * s + 2 * r1 * c - r * s])
        return P, P1, P2


@dataclass(frozen=True)
class BoundaryCurve:
    """Closed counter-clockwise boundary with a dense arclength table.

    Build with :meth:`disk`, :meth:`ellipse`, :meth:`fourier` or
    :meth:`from_config`.  ``samples`` is the number of equally spaced
    arclength samples in the table (at least 4096).
    """

    kind: str
    params: dict
    samples: int = 4096
    _par: _Parametrization = field(init=False, repr=False, compare=False)
    _tables: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.samples < 4096:
            raise GeometryError("the arclength table needs at least 4096 samples")
        par = _Parametrization(self.kind, dict(self.params))
        object.__setattr__(self, "_par", par)
        object.__setattr__(self, "_tables", self._build_tables())

    # -- constructors -----------------------------------------------------
    @classmethod
    def disk(cls, R: float = 1.0, samples: int = 4096) -> "BoundaryCurve":
        if R <= 0:
            raise GeometryError("disk radius must be positive")
        return cls("disk", {"R": float(R)}, samples)

    @classmethod
    def ellipse(cls, a: float, b: float, samples: int = 4096) -> "BoundaryCurve":
        if a <= 0 or b <= 0:
            raise GeometryError("ellipse semi-axes must be positive")
        return cls("ellipse", {"a": float(a), "b": float(b)}, samples)

    @classmethod
    def fourier(cls, c0: float, cos=(), sin=(), samples: int = 4096) -> "BoundaryCurve":
        """Star-shaped curve ``r(phi) = c0 + sum_k cos[k] cos(k phi) + sin[k] sin(k phi)``."""
        cos, sin = list(cos), list(sin)
        m = max(len(cos), len(sin))
        cos += [0.0] * (m - len(cos))
        sin += [0.0] * (m - len(sin))
        return cls("fourier", {"c0": float(c0), "cos": tuple(cos), "sin": tuple(sin)}, samples)

    @classmethod
    def from_config(cls, cfg: dict) -> "BoundaryCurve":
        cfg = dict(cfg)
        kind = cfg.pop("type", None)
        samples = int(cfg.pop("samples", 4096))
        builders = {
            "disk": lambda: cls.disk(cfg.pop("R", 1.0), samples),
            "ellipse": lambda: cls.ellipse(cfg.pop("a"), cfg.pop("b"), samples),
            "fourier": lambda: cls.fourier(
                cfg.pop("c0"), cfg.pop("cos", ()), cfg.pop("sin", ()), samples
            ),
        }
        if kind not in builders:
            raise GeometryError(f"unknown domain type {kind!r}")
        try:
            curve = builders[kind]()
        except KeyError as exc:
            raise GeometryError(f"missing domain parameter {exc}") from None
        if cfg:
            raise GeometryError(f"unknown domain keys: {sorted(cfg)}")
        return curve

    def to_config(self) -> dict:
        out = {"type": self.kind, **{k: list(v) if isinstance(v, tuple) else v
                                     for k, v in self.params.items()}}
        return out

    # -- arclength machinery ----------------------------------------------
    def _build_tables(self) -> dict:
        n = 4 * self.samples
        phi = TWO_PI * np.arange(n) / n
        P, P1, P2 = self._par.derivs(phi)
        if self.kind == "fourier":
            r = _radial_derivs(self.params["c0"], self.params["cos"], self.params["sin"], phi)[0]
            if np.any(r <= 0):
                raise GeometryError("radial Fourier curve must have r(phi) > 0")
        speed = np.hypot(*P1)
        cross = P1[0] * P2[1] - P1[1] * P2[0]
        if np.any(P[0] * P1[1] - P[1] * P1[0] <= 0):
            raise GeometryError("curve must be star-shaped about the origin and counter-clockwise")
        coef = np.fft.rfft(speed) / n
        keep = np.abs(coef) > 1e-17 * abs(coef[0])
        keep[0] = True
        modes = np.nonzero(keep)[0]
        L = TWO_PI * coef[0].real
        # s(phi) = c0*phi + sum_k 2 Re(c_k e^{ik phi} / (ik))  (minus its value at 0)
        ck = coef[modes[modes > 0]]
        kk = modes[modes > 0].astype(float)

        def s_of_phi(ph):
            ph = np.atleast_1d(ph)
            e = np.exp(1j * np.outer(ph, kk))
            val = coef[0].real * ph + 2.0 * np.real(e @ (ck / (1j * kk)))
            return val - 2.0 * np.real(np.sum(ck / (1j * kk)))

        def speed_of_phi(ph):
            return np.hypot(*self._par.derivs(ph)[1])

        m = self.samples
        s_grid = L * np.arange(m) / m
        # initial guess by interpolating s(phi) sampled on the fine phi grid
        s_fine = s_of_phi(phi)
        ph = np.interp(s_grid, np.append(s_fine, L), np.append(phi, TWO_PI))
        for _ in range(4):
            ph = ph - (s_of_phi(ph) - s_grid) / speed_of_phi(ph)
        periodic = ph - TWO_PI * s_grid / L
        spline = CubicSpline(np.append(s_grid, L), np.append(periodic, periodic[0]),
                             bc_type="periodic")
        kappa = cross / speed**3
        return {
            "L": L,
            "s": s_grid,
            "phi": ph,
            "spline": spline,
            "s_of_phi": s_of_phi,
            "speed_of_phi": speed_of_phi,
            "kmax": float(np.max(kappa)),
            "kmin": float(np.min(kappa)),
        }

    @property
    def L(self) -> float:
        """Perimeter."""
        return self._tables["L"]

    @property
    def s_table(self) -> np.ndarray:
        return self._tables["s"]

    @property
    def kmax(self) -> float:
        return self._tables["kmax"]

    def phi(self, s) -> np.ndarray:
        """Parameter angle at arclength ``s`` (any real ``s``, wrapped mod ``L``)."""
        tb = self._tables
        s = np.mod(np.atleast_1d(np.asarray(s, float)), self.L)
        ph = tb["spline"](s) + TWO_PI * s / self.L
        ph = ph - (tb["s_of_phi"](ph) - s) / tb["speed_of_phi"](ph)
        return ph

    def frame(self, s):
        """Return ``(gamma, tangent, normal, k)`` at arclength ``s``; vectors are ``(2, n)``."""
        P, P1, P2 = self._par.derivs(self.phi(s))
        speed = np.hypot(*P1)
        tangent = P1 / speed
        normal = np.array([-tangent[1], tangent[0]])
        k = (P1[0] * P2[1] - P1[1] * P2[0]) / speed**3
        return P, tangent, normal, k

    def point(self, s) -> np.ndarray:
        return self.frame(s)[0]

    def tangent(self, s) -> np.ndarray:
        return self.frame(s)[1]

    def normal(self, s) -> np.ndarray:
        return self.frame(s)[2]

    def curvature(self, s) -> np.ndarray:
        return self.frame(s)[3]

    def table(self) -> dict:
        """Dense arclength table ``(s, gamma, gamma', nu, k)``."""
        s = self.s_table
        g, tg, nu, k = self.frame(s)
        return {"s": s, "gamma": g, "tangent": tg, "normal": nu, "k": k}

    def project(self, x) -> tuple[float, float]:
        """Nearest boundary point: returns ``(s, t)`` with ``t`` the inward distance."""
        x = np.asarray(x, float).reshape(2)
        g = self.point(self.s_table)
        j = int(np.argmin(np.sum((g - x[:, None]) ** 2, axis=0)))
        h = self.L / self.samples
        s0 = self.s_table[j]
        res = minimize_scalar(
            lambda s: float(np.sum((self.point(s)[:, 0] - x) ** 2)),
            bounds=(s0 - 2 * h, s0 + 2 * h),
            method="bounded",
            options={"xatol": 1e-13},
        )
        s = float(res.x)
        # Newton on the orthogonality condition (x - gamma(s)) . tangent(s) = 0
        for _ in range(3):
            gamma, tg, nu, k = self.frame(s)
            d = x - gamma[:, 0]
            s += float(np.dot(d, tg[:, 0]) / (1.0 - k[0] * np.dot(d, nu[:, 0])))
        s = float(np.mod(s, self.L))
        gamma, _, nu, _ = self.frame(s)
        t = float(np.dot(x - gamma[:, 0], nu[:, 0]))
        return s, t

    def area_quadrature(self, n_phi: int = 512, n_rho: int = 64):
        """Quadrature points and weights for integrals over the enclosed domain.

        Uses the star-shaped map ``(rho, phi) -> rho P(phi)``.
        """
        phi = TWO_PI * np.arange(n_phi) / n_phi
        P, P1, _ = self._par.derivs(phi)
        jac_phi = P[0] * P1[1] - P[1] * P1[0]
        x, w = np.polynomial.legendre.leggauss(n_rho)
        rho = 0.5 * (x + 1.0)
        wr = 0.5 * w
        pts = rho[:, None, None] * P[None, :, :]  # (n_rho, 2, n_phi)
        weights = (wr * rho)[:, None] * jac_phi[None, :] * (TWO_PI / n_phi)
        return pts.transpose(1, 0, 2).reshape(2, -1), weights.reshape(-1)


def curvature(curve: BoundaryCurve, s) -> np.ndarray:
    """Signed curvature ``k(s)``; positive for convex counter-clockwise curves."""
    return curve.curvature(s)


@dataclass(frozen=True)
class TubularMap:
    """Boundary coordinates ``(s, t) -> gamma(s) + t nu(s)`` on ``0 <= t <= t0``."""

    curve: BoundaryCurve
    t0: float

    def __post_init__(self):
        if self.t0 <= 0:
            raise GeometryError("strip depth t0 must be positive")
        if self.t0 * max(self.curve.kmax, 0.0) >= 1.0:
            raise GeometryError(
                f"t0={self.t0} violates t0*max k < 1 (max k={self.curve.kmax:.4g})"
            )

    @classmethod
    def default(cls, curve: BoundaryCurve) -> "TubularMap":
        return cls(curve, 0.5 / max(curve.kmax, 1e-12))

    def __call__(self, s, t) -> np.ndarray:
        s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
        if np.any(t < 0) or np.any(t > self.t0 * (1 + 1e-12)):
            raise GeometryError("t outside the strip [0, t0]")
        gamma, _, nu, _ = self.curve.frame(s.ravel())
        out = gamma + t.ravel() * nu
        return out.reshape((2,) + s.shape)

    def jacobian(self, s, t) -> np.ndarray:
        return 1.0 - np.asarray(t) * self.curve.curvature(s).reshape(np.shape(s))


def boundary_map(tube: TubularMap, s, t) -> np.ndarray:
    """Cartesian point ``Phi(s, t)`` (inward normal)."""
    return tube(s, t)
