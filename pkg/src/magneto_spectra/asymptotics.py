"""Closed-form spectral coefficients and two-term predictions.

All predictions have the form ``a B + b B^{1/2}``.  Formulas keep the
explicit ``b'`` factors, so they compare directly with raw eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .field import FieldModel, MinimumData, boundary_trace_derivatives
from .geometry import BoundaryCurve
from .halfline import DeGennesConstants, degennes_constants

__all__ = [
    "AsymptoticPrediction",
    "AsymptoticsError",
    "CONJECTURAL",
    "UPPER_BOUND_ONLY",
    "predict_constant_field",
    "theta_half",
    "theta_half_n",
    "theta_half_model",
    "theta_half_degenerate",
    "magnetic_curvature",
    "predict_constant_boundary",
    "predict_two_term",
    "predict_nth",
    "predictions",
    "sign_lemma",
]

CONJECTURAL = "CONJECTURAL"
UPPER_BOUND_ONLY = "UPPER_BOUND_ONLY"


class AsymptoticsError(ValueError):
    pass


@dataclass(frozen=True)
class AsymptoticPrediction:
    """``value(B) = a B + b sqrt(B)`` with remainder ``O(B^remainder_exponent)``."""

    model: str
    a: float
    b: float
    remainder_exponent: float
    flags: tuple = ()
    inputs: dict = field(default_factory=dict, repr=False)

    def __call__(self, B):
        B = np.asarray(B, float)
        return self.a * B + self.b * np.sqrt(B)

    def to_dict(self) -> dict:
        return {"model": self.model, "a": self.a, "b": self.b,
                "remainder_exponent": self.remainder_exponent, "flags": list(self.flags),
                "inputs": self.inputs}


def _c(c):
    return c if c is not None else degennes_constants()


def sign_lemma(c: DeGennesConstants | None = None) -> float:
    """``C1/2 - Theta0 xi0`` (equal to ``M3 - xi0^3``), always positive."""
    c = _c(c)
    return c.c1 / 2 - c.theta0 * c.xi0


def predict_constant_field(B, kappa_max: float, c: DeGennesConstants | None = None):
    """``Theta0 B - C1 kappa_max sqrt(B)`` for the unit field."""
    c = _c(c)
    B = np.asarray(B, float)
    return c.theta0 * B - c.c1 * kappa_max * np.sqrt(B)


def theta_half_model(k0: float, k1: float, alpha: float, c: DeGennesConstants | None = None) -> float:
    """Second coefficient of the model operator with curvatures ``k0, k1`` and
    tangential stiffness ``alpha``::

        -(k0 + k1)/2 C1 + (k1 - k0) Theta0 xi0 + sqrt(3 C1) Theta0^{3/4} sqrt(alpha)
    """
    if alpha < 0:
        raise AsymptoticsError("alpha must be non-negative")
    c = _c(c)
    return (-(k0 + k1) / 2 * c.c1 + (k1 - k0) * c.theta0 * c.xi0
            + np.sqrt(3 * c.c1) * c.theta0**0.75 * np.sqrt(alpha))


def theta_half_degenerate(k0: float, k1: float, c: DeGennesConstants | None = None) -> float:
    """``alpha = 0`` branch: ``-(k0 + k1)/2 C1 + Theta0 xi0 (k1 - k0)``."""
    c = _c(c)
    return -(k0 + k1) / 2 * c.c1 + c.theta0 * c.xi0 * (k1 - k0)


def _theta_half_point(kappa, dbeta_dt, d2beta_ds2, b_prime, c, n=1):
    if b_prime <= 0:
        raise AsymptoticsError("b' must be positive")
    if d2beta_ds2 < 0:
        raise AsymptoticsError("negative second tangential derivative: not a minimum")
    return (-kappa * c.c1 + sign_lemma(c) * dbeta_dt / b_prime
            + (2 * n - 1) * c.theta0**0.75 * np.sqrt(3 * c.c1 / (2 * b_prime) * d2beta_ds2))


def theta_half(m: MinimumData, c: DeGennesConstants | None = None) -> float:
    """Second coefficient at the boundary minimum::

        -kappa C1 + (C1/2 - Theta0 xi0) (1/b') d_t beta
            + Theta0^{3/4} (3 C1/(2 b') d_s^2 beta)^{1/2}

    With several minima the smallest value is returned.
    """
    c = _c(c)
    if m.minima:
        return min(_theta_half_point(p.kappa, p.dbeta_dt, 2 * p.alpha, m.b_prime, c) for p in m.minima)
    return _theta_half_point(m.kappa0, m.dbeta_dt, 2 * m.alpha, m.b_prime, c)


def theta_half_n(n: int, m: MinimumData, c: DeGennesConstants | None = None) -> float:
    """Suggested coefficient of the ``n``-th eigenvalue (conjectural): the square-root
    term is multiplied by ``2n - 1``."""
    if n < 1:
        raise AsymptoticsError("n must be at least 1")
    c = _c(c)
    if m.minima:
        return min(_theta_half_point(p.kappa, p.dbeta_dt, 2 * p.alpha, m.b_prime, c, n) for p in m.minima)
    return _theta_half_point(m.kappa0, m.dbeta_dt, 2 * m.alpha, m.b_prime, c, n)


def magnetic_curvature(tables: dict, b_prime: float, c: DeGennesConstants | None = None):
    """``C1 k + (Theta0 xi0 - C1/2)(1/b') d_t beta`` on the boundary table.

    Returns ``(values, argmax_set)`` where the argmax set lists every table
    arclength attaining the maximum within ``1e-10``.
    """
    c = _c(c)
    vals = c.c1 * np.asarray(tables["k"]) - sign_lemma(c) / b_prime * np.asarray(tables["dbeta_dt"])
    top = np.max(vals)
    arg = np.asarray(tables["s"])[vals >= top - 1e-10 * max(1.0, abs(top))]
    return vals, arg


def predict_constant_boundary(B, f: FieldModel, g: BoundaryCurve | None = None,
                              c: DeGennesConstants | None = None) -> AsymptoticPrediction:
    """Upper bound ``Theta0 b' B - max(magnetic curvature) b'^{1/2} B^{1/2}`` for a
    field that is constant on the boundary (flagged ``UPPER_BOUND_ONLY``)."""
    c = _c(c)
    g = g or f.curve
    tb = f.tables if g is f.curve else boundary_trace_derivatives(f, g)
    trace = tb["beta"]
    if np.ptp(trace) > 1e-8 * max(1.0, np.max(np.abs(trace))):
        raise AsymptoticsError("field is not constant on the boundary")
    bp = float(np.mean(trace))
    vals, arg = magnetic_curvature(tb, bp, c)
    kt = float(np.max(vals))
    pred = AsymptoticPrediction("constant_boundary", c.theta0 * bp, -kt * np.sqrt(bp), 1 / 3,
                                (UPPER_BOUND_ONLY,),
                                {"b_prime": bp, "magnetic_curvature_max": kt,
                                 "argmax": [float(a) for a in arg]})
    return pred


def predict_two_term(m: MinimumData, c: DeGennesConstants | None = None) -> AsymptoticPrediction:
    """``Theta0 b' B + Theta_{1/2} b'^{1/2} B^{1/2}`` for a non-degenerate minimum."""
    if not m.nondegenerate:
        raise AsymptoticsError("two-term law needs a non-degenerate boundary minimum")
    c = _c(c)
    th = theta_half(m, c)
    return AsymptoticPrediction("two_term", c.theta0 * m.b_prime, th * np.sqrt(m.b_prime), 2 / 5,
                                (), {"theta_half": th, **m.to_dict()})


def predict_nth(n: int, m: MinimumData, c: DeGennesConstants | None = None) -> AsymptoticPrediction:
    c = _c(c)
    th = theta_half_n(n, m, c)
    return AsymptoticPrediction(f"nth({n})", c.theta0 * m.b_prime, th * np.sqrt(m.b_prime), 1 / 4,
                                (CONJECTURAL,), {"n": n, "theta_half_n": th})


def predictions(f: FieldModel, m: MinimumData, c: DeGennesConstants | None = None,
                nev: int = 1) -> list[AsymptoticPrediction]:
    """Every prediction applicable to a field/domain pair."""
    c = _c(c)
    g = f.curve
    out = [AsymptoticPrediction("rough", c.theta0 * m.b_prime, 0.0, 1 / 2)]
    tb = f.tables
    trace = tb["beta"]
    constant_field = np.ptp(f(*g.area_quadrature(128, 16)[0])) <= 1e-12 and np.ptp(trace) <= 1e-12
    if constant_field:
        bp = float(trace[0])
        kmax = g.kmax
        out.append(AsymptoticPrediction("constant_field", c.theta0 * bp, -c.c1 * kmax * np.sqrt(bp),
                                        1 / 3, (), {"kappa_max": kmax}))
    if np.ptp(trace) <= 1e-8 * max(1.0, np.max(np.abs(trace))):
        out.append(predict_constant_boundary(None, f, g, c))
    if m.nondegenerate:
        out.append(predict_two_term(m, c))
        for n in range(2, nev + 1):
            out.append(predict_nth(n, m, c))
        k1 = m.kappa0 - m.dbeta_dt / m.b_prime
        out.append(AsymptoticPrediction(
            "model_op", c.theta0 * m.b_prime,
            theta_half_model(m.kappa0, k1, m.alpha / m.b_prime, c) * np.sqrt(m.b_prime), 1 / 4, (),
            {"k0": m.kappa0, "k1": k1, "alpha": m.alpha / m.b_prime}))
    return out
