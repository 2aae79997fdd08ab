"""Identity suites on the computed universal constants.

Each function returns a dict ``name -> residual`` so that callers (tests,
``selftest``) can apply their own tolerances.
"""
from __future__ import annotations

import numpy as np

from .asymptotics import _theta_half_point, sign_lemma, theta_half_degenerate, theta_half_model
from .halfline import DeGennesConstants, degennes_constants, reduced_resolvent

__all__ = ["degennes_identities", "resolvent_identity", "reduction_web", "DEGENNES_TOLERANCES"]

DEGENNES_TOLERANCES = {
    "M0-1": 1e-8,
    "M1": 1e-6,
    "M2-theta0/2": 1e-6,
    "M3-C1/2": 1e-6,
    "mu2/2-3C1*sqrt(theta0)": 1e-4,
}


def degennes_identities(c: DeGennesConstants | None = None) -> dict:
    """The five moment/curvature identities of the de Gennes ground state."""
    c = c or degennes_constants()
    r = c.residuals()
    return {k: float(r[k]) for k in DEGENNES_TOLERANCES}


def resolvent_identity(c: DeGennesConstants | None = None) -> dict:
    """``1 - 4 I2`` with ``I2 = <(t + xi0) R0((t + xi0) u0), u0>`` against
    ``mu''(xi0)/2`` and ``3 C1 sqrt(Theta0)``."""
    c = c or degennes_constants()
    w = c.t + c.xi0
    v = reduced_resolvent(w * c.u0, c)
    i2 = c.disc.inner(w * v, c.u0)
    val = 1.0 - 4.0 * i2
    return {
        "one_minus_4I2": float(val),
        "1-4I2 - mu2/2": float(val - c.mu2 / 2),
        "1-4I2 - 3C1*sqrt(theta0)": float(val - 3 * c.c1 * np.sqrt(c.theta0)),
    }


def reduction_web(c: DeGennesConstants | None = None, samples=None) -> dict:
    """Residuals linking the second-term coefficients of the various regimes.

    ``samples`` is a list of ``(kappa, d_t beta, d_s^2 beta, b')`` tuples;
    a fixed deterministic set is used by default.
    """
    c = c or degennes_constants()
    if samples is None:
        rng = np.random.default_rng(12345)
        samples = [(1.0, 1.0, 1.0, 1.0), (0.0, 0.0, 0.0, 1.0)] + [
            (float(rng.uniform(-1, 3)), float(rng.uniform(-2, 2)), float(rng.uniform(0, 4)),
             float(rng.uniform(0.2, 3))) for _ in range(6)]
    web = 0.0
    for kappa, dt, d2, bp in samples:
        full = _theta_half_point(kappa, dt, d2, bp, c)
        model = theta_half_model(kappa, kappa - dt / bp, 0.5 * d2 / bp, c)
        web = max(web, abs(full - model))
    const = max(abs(_theta_half_point(k, 0.0, 0.0, 1.0, c) + c.c1 * k) for k in (0.5, 1.0, 2.0))
    degen = max(abs(theta_half_model(k0, k1, 0.0, c) - theta_half_degenerate(k0, k1, c))
                for k0, k1 in ((1.0, 0.0), (0.3, -1.2), (2.0, 1.5)))
    unit = abs(theta_half_degenerate(1.0, 1.0, c) + c.c1)
    return {
        "full vs model operator": float(web),
        "zero field derivatives vs constant field": float(const),
        "model alpha=0 vs degenerate": float(degen),
        "k0=k1=1 vs -C1": float(unit),
        "sign lemma positive": float(min(0.0, sign_lemma(c))),
    }
