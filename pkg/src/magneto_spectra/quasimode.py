"""Explicit trial states on the strip and their Rayleigh quotients.

Two families are built from the half-line profiles:

* degenerate (``alpha = 0``):
  ``chi(t) psi(sqrt(B) t) exp(-s^2 B^{1/2 - 2 rho}) exp(i zeta s)`` with
  ``psi = u0 + B^{-1/2} u1`` and ``u1 = R0 (lambda1 - H1) u0``;
* non-degenerate (``alpha > 0``): the first one to three terms of
  ``U0 + B^{-1/4} U1 + B^{-1/2} U2`` in the variables
  ``sigma = B^{1/4}(s - s*)``, ``tau = B^{1/2} t``.

The expansion is written for ``(-i d_s + B A1)``; the strip operator uses
``(i d_s + B A1)``, so the trial states are complex-conjugated before being
sampled (the carrier becomes ``exp(-i xi0 sqrt(B) s)``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .field import MinimumData
from .halfline import DeGennesConstants, degennes_constants, reduced_resolvent
from .strip import OperatorPair

__all__ = [
    "QuasimodeSpec",
    "QuasimodeError",
    "Profiles",
    "build_profiles",
    "build_degenerate",
    "build_nondegenerate",
    "rayleigh",
    "cutoff",
]

SOLVABILITY_TOL = 1e-8


class QuasimodeError(ValueError):
    pass


@dataclass(frozen=True)
class QuasimodeSpec:
    """Description of a trial state; ``kind`` is ``"degenerate"`` or ``"nondegenerate"``."""

    kind: str
    B: float
    center: float
    order: int = 1
    rho: float = 1 / 12
    width: float = 0.0
    k0: float = 0.0
    k1: float = 0.0
    alpha: float = 0.0
    b_prime: float = 1.0
    diagnostics: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in ("degenerate", "nondegenerate"):
            raise QuasimodeError(f"unknown quasimode kind {self.kind!r}")
        if self.kind == "degenerate" and not 0 < self.rho < 0.25:
            raise QuasimodeError("rho must lie in (0, 1/4)")
        if self.kind == "nondegenerate" and self.order not in (1, 2, 3):
            raise QuasimodeError("order must be 1, 2 or 3")


@dataclass(frozen=True)
class Profiles:
    """Half-line profiles of the degenerate construction on the constants' grid."""

    u0: np.ndarray
    u1: np.ndarray
    lambda1: float
    solvability: float


def _H1(u, c: DeGennesConstants, k0: float, k1: float) -> np.ndarray:
    t = c.t
    xi = c.xi0
    return k0 * c.disc.derivative(u) - k1 * (t + xi) * t**2 * u + 2 * k0 * t * (t + xi) ** 2 * u


def build_profiles(c: DeGennesConstants | None = None, k0: float = 0.0, k1: float = 0.0) -> Profiles:
    """``u1 = R0 (lambda1 - H1) u0`` with ``lambda1`` fixed by solvability.

    ``H1 = k0 d_t - k1 (t + xi0) t^2 + 2 k0 t (t + xi0)^2``.  ``lambda1`` is the
    discrete ``<H1 u0, u0>``, which equals ``-(k0 + k1) C1/2 + Theta0 xi0 (k1 - k0)``
    up to discretization error.
    """
    c = c or degennes_constants()
    u0 = c.u0
    h1u0 = _H1(u0, c, k0, k1)
    lam1 = c.disc.inner(h1u0, u0)
    rhs = lam1 * u0 - h1u0
    solv = c.disc.inner(rhs, u0)
    if abs(solv) > SOLVABILITY_TOL:
        raise QuasimodeError(f"solvability defect {solv:.2e}")
    u1 = reduced_resolvent(rhs, c) if (k0 or k1) else np.zeros_like(u0)
    return Profiles(u0=u0, u1=u1, lambda1=float(lam1), solvability=float(solv))


def cutoff(t: np.ndarray, t0: float) -> np.ndarray:
    """C^2 bump: 1 on ``[0, 0.6 t0]``, 0 beyond ``0.9 t0``, quintic smoothstep between."""
    x = np.clip((np.asarray(t) - 0.6 * t0) / (0.3 * t0), 0.0, 1.0)
    return 1.0 - x**3 * (10 - 15 * x + 6 * x**2)


def _interp(c: DeGennesConstants, f: np.ndarray):
    """Cubic interpolant of a half-line grid function, extended by zero past ``T``."""
    tt = np.append(c.t, c.disc.T)
    ff = np.append(f, 0.0)
    spline = CubicSpline(tt, ff, bc_type=((1, 0.0), "not-a-knot"))

    def ev(x):
        x = np.asarray(x, float)
        return np.where(x <= c.disc.T, spline(np.minimum(x, c.disc.T)), 0.0)

    return ev


def _node_grid(op: OperatorPair, center: float):
    s = op.s[:-1]
    ds = (s - center + 0.5 * op.L) % op.L - 0.5 * op.L
    t = op.t[:-1]
    return ds[:, None], t[None, :]


def _finish(op: OperatorPair, U: np.ndarray, t: np.ndarray) -> np.ndarray:
    U = U * cutoff(t, op.disc.t0)
    x = op.from_physical(np.broadcast_to(U, op.shape))
    nrm = np.sqrt(np.vdot(x, op.M @ x).real)
    if nrm == 0:
        raise QuasimodeError("trial state vanishes on the grid")
    return x / nrm


def build_degenerate(op: OperatorPair, m: MinimumData, c: DeGennesConstants | None = None,
                     rho: float = 1 / 12, center: float | None = None,
                     k0: float | None = None, k1: float | None = None):
    """Degenerate-case trial state on the grid of ``op``, ``M``-normalized.

    Returns ``(x, spec)``.
    """
    c = c or degennes_constants()
    bp = m.b_prime
    Beff = bp * op.B
    k0 = m.kappa0 if k0 is None else k0
    k1 = (m.kappa0 - m.dbeta_dt / bp) if k1 is None else k1
    center = m.s_star if center is None else center
    spec = QuasimodeSpec("degenerate", op.B, center, rho=rho, k0=k0, k1=k1, b_prime=bp)
    pr = build_profiles(c, k0, k1)
    psi = _interp(c, pr.u0 + pr.u1 / np.sqrt(Beff))
    ds, t = _node_grid(op, center)
    U = psi(np.sqrt(Beff) * t) * np.exp(-ds**2 * Beff ** (0.5 - 2 * rho))
    U = U * np.exp(-1j * c.xi0 * np.sqrt(Beff) * ds)
    spec.diagnostics.update(lambda1=pr.lambda1, solvability=pr.solvability)
    return _finish(op, U, t), spec


def build_nondegenerate(op: OperatorPair, m: MinimumData, c: DeGennesConstants | None = None,
                        order: int = 3):
    """Non-degenerate trial state of the given order on the grid of ``op``.

    ``U0 = u0 psi0``, ``U1 = u1 psi0'`` with ``u1 = 2 i R0((t + xi0) u0)``, and
    ``U2 = psi0 R0 f0 + sigma^2 psi0 R0 f2`` where ``psi0 = exp(-a sigma^2/2)``.
    The right-hand side of the ``U2`` equation separates exactly on the
    s-profiles ``{psi0, sigma^2 psi0}``; ``a`` and ``Theta_{1/2}`` are fixed by
    the two solvability conditions (computed with the discrete inner product).

    Returns ``(x, spec)``.
    """
    if not m.nondegenerate:
        raise QuasimodeError("non-degenerate quasimode needs alpha > 0")
    c = c or degennes_constants()
    spec = QuasimodeSpec("nondegenerate", op.B, m.s_star, order=order)
    bp = m.b_prime
    Beff = bp * op.B
    alpha = m.alpha / bp
    k0 = m.kappa0
    k1 = m.kappa0 - m.dbeta_dt / bp
    d = c.disc
    tt = c.t
    xi = c.xi0
    u0 = c.u0
    w = tt + xi
    v = reduced_resolvent(w * u0, c)
    g = u0 - 4.0 * w * v
    one_m_4i2 = d.inner(g, u0)
    m2 = d.inner(w * tt * u0, u0)
    a = np.sqrt(2.0 * alpha * m2 / one_m_4i2)
    f2 = a**2 * g - 2.0 * alpha * w * tt * u0
    f0_wo = -a * g - k0 * d.derivative(u0) + k1 * w * tt**2 * u0 - 2 * k0 * tt * w**2 * u0
    theta_half = -d.inner(f0_wo, u0)
    f0 = f0_wo + theta_half * u0
    defects = (abs(d.inner(f0, u0)), abs(d.inner(f2, u0)))
    if max(defects) > SOLVABILITY_TOL:
        raise QuasimodeError(f"separable decomposition defect {max(defects):.2e}")
    spec = QuasimodeSpec("nondegenerate", op.B, m.s_star, order=order, width=float(a),
                         k0=k0, k1=k1, alpha=alpha, b_prime=bp,
                         diagnostics={"theta_half_discrete": float(theta_half),
                                      "one_minus_4I2": float(one_m_4i2),
                                      "solvability": defects})
    ds, t = _node_grid(op, m.s_star)
    sig = Beff**0.25 * ds
    tau = np.sqrt(Beff) * t
    psi0 = np.exp(-0.5 * a * sig**2)
    U = _interp(c, u0)(tau) * psi0 + 0j
    if order >= 2:
        # paper form: B^{-1/4} (2 i v) psi0'; conjugated for the strip convention
        U = U + Beff**-0.25 * (-2j) * _interp(c, v)(tau) * (-a * sig * psi0)
    if order >= 3:
        r0 = reduced_resolvent(f0, c)
        r2 = reduced_resolvent(f2, c)
        spec.diagnostics["u2_orthogonality"] = (abs(d.inner(r0, u0)), abs(d.inner(r2, u0)))
        U = U + Beff**-0.5 * (_interp(c, r0)(tau) * psi0 + _interp(c, r2)(tau) * sig**2 * psi0)
    U = U * np.exp(-1j * xi * np.sqrt(Beff) * ds)
    return _finish(op, U, t), spec


def rayleigh(x: np.ndarray, op: OperatorPair) -> float:
    """``x^H K x / x^H M x``."""
    x = np.asarray(x)
    if not np.any(x):
        raise QuasimodeError("zero trial vector")
    return op.rayleigh(x)
