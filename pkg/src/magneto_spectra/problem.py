"""A domain/field pair with its strip gauge, resolution policy and solver knobs."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .eigensolve import EigResult, default_shift, lowest_pairs
from .field import FieldModel, MinimumData, StripGauge, locate_minimum
from .geometry import BoundaryCurve, TubularMap
from .halfline import degennes_constants
from .strip import OperatorPair, StripDisc, StripError, assemble, holonomy_phase

__all__ = ["SpectralProblem"]


@dataclass(frozen=True)
class SpectralProblem:
    """Everything needed to compute ``lambda_1(B)`` for one configuration.

    Parameters
    ----------
    curve, field_model : BoundaryCurve, FieldModel
        Domain and field.
    floquet : float or "holonomy"
        Seam phase; ``"holonomy"`` uses ``B * flux mod 2 pi``.
    t0_cap : float
        Largest strip depth as a fraction of ``1/max k``.
    t0_factor, h_layer, ns_scale : float
        Resolution policy (see :meth:`StripDisc.policy`).
    ns, nt : int, optional
        Fixed grid sizes overriding the policy.
    tol, seed : float, int
        Eigensolver tolerance and seed.
    """

    curve: BoundaryCurve
    field_model: FieldModel
    floquet: float | str = "holonomy"
    t0_cap: float = 0.9
    t0_factor: float = 8.0
    h_layer: float = 0.04
    ns_scale: float = 24.0
    ns: int | None = None
    nt: int | None = None
    tol: float = 1e-10
    seed: int = 0
    use_quasimode_start: bool = True
    extra: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not 0 < self.t0_cap < 1:
            raise StripError("t0_cap must lie in (0, 1)")
        if not (self.floquet == "holonomy" or isinstance(self.floquet, (int, float))):
            raise StripError("floquet must be a number or 'holonomy'")

    @cached_property
    def minimum(self) -> MinimumData:
        return locate_minimum(self.field_model, self.curve, degennes_constants().theta0)

    @cached_property
    def tube(self) -> TubularMap:
        return TubularMap(self.curve, self.t0_cap / self.curve.kmax)

    @cached_property
    def gauge(self) -> StripGauge:
        return StripGauge(self.field_model, self.tube)

    def theta(self, B: float) -> float:
        if self.floquet == "holonomy":
            return holonomy_phase(self.field_model, B)
        return float(np.mod(self.floquet, 2 * np.pi))

    def disc(self, B: float) -> StripDisc:
        return StripDisc.policy(self.tube, self.minimum, B, t0_factor=self.t0_factor,
                                h_layer=self.h_layer, ns_scale=self.ns_scale, ns=self.ns, nt=self.nt)

    def operator(self, B: float, *, theta: float | None = None, disc: StripDisc | None = None,
                 **kw) -> OperatorPair:
        disc = disc or self.disc(B)
        th = self.theta(B) if theta is None else theta
        return assemble(self.tube, self.gauge, B, th, disc, b_prime=self.minimum.b_prime, **kw)

    def solve(self, B: float, nev: int = 1, *, theta: float | None = None,
              disc: StripDisc | None = None, op: OperatorPair | None = None,
              tol: float | None = None) -> tuple[OperatorPair, EigResult]:
        """Assemble and solve; returns ``(op, result)``."""
        op = op or self.operator(B, theta=theta, disc=disc)
        v0 = None
        m = self.minimum
        if self.use_quasimode_start and m.nondegenerate and m.unique and nev == 1:
            from .quasimode import build_nondegenerate

            v0, _ = build_nondegenerate(op, m, order=1)
        res = lowest_pairs(op.K, op.M, nev, tol or self.tol,
                           sigma=default_shift(B, m.b_prime), v0=v0, seed=self.seed)
        return op, res

    def lambda1(self, B: float, **kw) -> float:
        return float(self.solve(B, 1, **kw)[1].values[0])
