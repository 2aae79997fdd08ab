"""Third critical field: two-term formula and root of the linear criterion."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .asymptotics import theta_half
from .field import MinimumData
from .halfline import DeGennesConstants, degennes_constants

__all__ = ["CriticalFieldError", "CriticalFieldResult", "hc3_formula", "hc3_root"]

BRACKET = 0.30
CERTIFICATE_POINTS = 5


class CriticalFieldError(RuntimeError):
    pass


@dataclass
class CriticalFieldResult:
    """Root of ``lambda_1(kappa H F) = kappa^2`` with its diagnostics.

    ``certificate`` holds ``(H, lambda_1(kappa H))`` at five bracket points;
    the equality of the upper, lower and local critical fields is only
    claimed (``fields_coincide``) when these values increase strictly.
    """

    kappa: float
    h_formula: float
    h_root: float
    gap: float
    residual: float
    certificate: list = field(default_factory=list)
    fields_coincide: bool = False
    evaluations: int = 0

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "h_formula": self.h_formula, "h_root": self.h_root,
                "gap": self.gap, "residual": self.residual,
                "certificate": [[float(h), float(v)] for h, v in self.certificate],
                "fields_coincide": self.fields_coincide, "evaluations": self.evaluations}


def hc3_formula(kappa: float, m: MinimumData, c: DeGennesConstants | None = None,
                convention: str = "displayed") -> float:
    """Two-term value of the third critical field.

    ``convention="displayed"``:  ``kappa/(b' Theta0) - b'^{1/2} Theta_{1/2}/Theta0^{3/2}``.
    ``convention="inverted"``:   ``kappa/(b' Theta0) - Theta_{1/2}/(b' Theta0^{3/2})``, the
    inversion of ``Theta0 b' B + Theta_{1/2} (b' B)^{1/2} = kappa^2``.  Both agree for ``b' = 1``.
    """
    if not (m.unique and m.nondegenerate):
        raise CriticalFieldError("formula needs a unique non-degenerate boundary minimum")
    if not m.spectral_assumption or m.b_prime <= 0:
        raise CriticalFieldError("formula needs 0 < Theta0 b' < b")
    c = c or degennes_constants()
    th = theta_half(m, c)
    bp = m.b_prime
    lead = kappa / (bp * c.theta0)
    if convention == "displayed":
        return lead - np.sqrt(bp) * th / c.theta0**1.5
    if convention == "inverted":
        return lead - th / (bp * c.theta0**1.5)
    raise ValueError(f"unknown convention {convention!r}")


def hc3_root(kappa: float, problem, *, rtol: float = 1e-6, convention: str = "displayed",
             c: DeGennesConstants | None = None) -> CriticalFieldResult:
    """Solve ``lambda_1(kappa H) = kappa^2`` by Brent's method.

    The bracket is the formula value ``+-30 %``.  The strip grid is frozen at
    the resolution chosen for the formula value so that ``H -> lambda_1`` is a
    smooth function during the search.  ``problem`` is a
    :class:`~magneto_spectra.problem.SpectralProblem`.
    """
    c = c or degennes_constants()
    m = problem.minimum
    h0 = hc3_formula(kappa, m, c, convention)
    if h0 <= 0:
        raise CriticalFieldError("formula value is not positive; kappa too small")
    disc = problem.disc(kappa * h0 * (1 - BRACKET))
    count = [0]

    def lam(H):
        count[0] += 1
        return problem.lambda1(kappa * H, disc=disc)

    hs = np.linspace(h0 * (1 - BRACKET), h0 * (1 + BRACKET), CERTIFICATE_POINTS)
    vals = np.array([lam(h) for h in hs])
    cert = list(zip(hs.tolist(), vals.tolist()))
    increasing = bool(np.all(np.diff(vals) > 0))
    if not increasing:
        raise CriticalFieldError(
            f"lambda_1 not increasing on the bracket at kappa={kappa}: {vals.tolist()}")
    target = kappa**2
    g = vals - target
    if g[0] > 0 or g[-1] < 0:
        raise CriticalFieldError(f"bracket [{hs[0]:.4g}, {hs[-1]:.4g}] does not contain the root")
    j = int(np.nonzero(g >= 0)[0][0])
    if g[j] == 0:
        h = hs[j]
    else:
        h = brentq(lambda x: lam(x) - target, hs[j - 1], hs[j], xtol=1e-3 * rtol * h0,
                   rtol=max(rtol * 1e-3, 4 * np.finfo(float).eps))
    res = abs(lam(h) - target) / target
    return CriticalFieldResult(kappa=float(kappa), h_formula=float(h0), h_root=float(h),
                               gap=float(abs(h - h0) / h), residual=float(res), certificate=cert,
                               fields_coincide=increasing, evaluations=count[0])
