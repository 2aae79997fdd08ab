"""Tangential Agmon distance and localization diagnostics on solved eigenvectors."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .field import FieldModel, MinimumData
from .strip import OperatorPair

__all__ = [
    "AgmonError",
    "AgmonReport",
    "NOT_APPLICABLE",
    "agmon_distance",
    "agmon_table",
    "decay_slope",
    "moment_report",
    "tangential_profile",
]

NOT_APPLICABLE = "NOT_APPLICABLE"
RADICAND_TOL = 1e-12
BOUNDED_RATIO = 4.0
PROFILE_FLOOR = 1e-12


class AgmonError(ValueError):
    pass


def _radicand(f: FieldModel, m: MinimumData, s):
    r = f.trace(np.asarray(s, float)) - m.b_prime
    if np.min(r) < -RADICAND_TOL * max(1.0, m.b_prime):
        raise AgmonError("boundary field dips below b' -- inconsistent minimum data")
    return np.sqrt(np.maximum(r, 0.0))


def agmon_distance(f: FieldModel, m: MinimumData, s: float) -> float:
    """``d(s) = int_0^{|s|} (beta(s* + sign(s) u, 0) - b')^{1/2} du`` by adaptive quadrature.

    ``s`` is measured from the minimum ``s*``.
    """
    sign = 1.0 if s >= 0 else -1.0
    val, _ = quad(lambda u: float(_radicand(f, m, m.s_star + sign * u)[0]), 0.0, abs(s),
                  epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(val)


def agmon_table(f: FieldModel, m: MinimumData, s: np.ndarray, n_gauss: int = 10) -> np.ndarray:
    """Vectorized ``d`` at offsets ``s`` from ``s*`` (``|s| <= L/2``).

    Integrates each side separately with Gauss-Legendre on the intervals
    between the sorted offsets, then accumulates.
    """
    s = np.asarray(s, float)
    out = np.zeros_like(s)
    x, w = np.polynomial.legendre.leggauss(n_gauss)
    for sign in (1.0, -1.0):
        mask = sign * s > 0
        if not np.any(mask):
            continue
        a = np.sort(np.abs(s[mask]))
        edges = np.concatenate([[0.0], a])
        h = np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        pts = mid[:, None] + 0.5 * h[:, None] * x[None, :]
        vals = _radicand(f, m, m.s_star + sign * pts.ravel()).reshape(pts.shape)
        cum = np.cumsum(0.5 * h * (vals @ w))
        order = np.argsort(np.abs(s[mask]), kind="stable")
        res = np.empty(order.size)
        res[order] = cum
        out[mask] = res
    return out


def _offsets(op: OperatorPair, center: float) -> np.ndarray:
    return (op.s[:-1] - center + 0.5 * op.L) % op.L - 0.5 * op.L


def tangential_profile(op: OperatorPair, x: np.ndarray) -> np.ndarray:
    """``||u(s, .)||_{L^2((1 - t k) dt)}`` at every tangential node."""
    hs = np.diff(op.s)
    ws = 0.5 * (hs + np.roll(hs, 1))
    wt = op.node_weights() / ws[:, None]
    return np.sqrt(np.sum(wt * np.abs(op.envelope(x)) ** 2, axis=1))


def decay_slope(op: OperatorPair, x: np.ndarray, f: FieldModel, m: MinimumData) -> float:
    """Least-squares slope of ``-log ||u(s, .)||`` against ``B^{1/2} d(s)``.

    Only nodes where the profile exceeds ``1e-12`` of its maximum are used.
    """
    if not m.nondegenerate or np.ptp(f.tables["beta"]) <= 1e-12:
        raise AgmonError("Agmon distance vanishes identically (constant boundary field)")
    prof = tangential_profile(op, x)
    keep = prof > PROFILE_FLOOR * prof.max()
    if keep.sum() < 3:
        raise AgmonError("profile below the floor everywhere")
    ds = _offsets(op, m.s_star)[keep]
    d = agmon_table(f, m, ds)
    y = -np.log(prof[keep] / prof.max())
    X = np.stack([np.sqrt(op.B) * d, np.ones_like(d)], axis=1)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(coef[0])


@dataclass
class AgmonReport:
    """Rescaled moment families across a sweep and the fitted decay slopes.

    ``normal[n]``, ``tangential[n]``, ``derivative[n]`` are lists aligned with
    ``B``; a family passes when ``max/min <= 4``.
    """

    B: list
    normal: dict
    tangential: dict
    derivative: dict
    slopes: list
    d_table: np.ndarray = field(repr=False, default=None)
    flags: dict = field(default_factory=dict)

    @staticmethod
    def _ratio(vals):
        vals = np.asarray(vals, float)
        return float(vals.max() / vals.min()) if np.all(vals > 0) else float("inf")

    def passes(self) -> dict:
        out = {}
        for name, fam in (("normal", self.normal), ("tangential", self.tangential),
                          ("derivative", self.derivative)):
            for n, vals in fam.items():
                if self.flags.get(name) == NOT_APPLICABLE:
                    out[f"{name}_{n}"] = NOT_APPLICABLE
                else:
                    out[f"{name}_{n}"] = self._ratio(vals) <= BOUNDED_RATIO
        return out

    def to_dict(self) -> dict:
        return {
            "B": list(map(float, self.B)),
            "normal": {str(k): list(map(float, v)) for k, v in self.normal.items()},
            "tangential": {str(k): list(map(float, v)) for k, v in self.tangential.items()},
            "derivative": {str(k): list(map(float, v)) for k, v in self.derivative.items()},
            "ratios": {f"{name}_{n}": self._ratio(v)
                       for name, fam in (("normal", self.normal), ("tangential", self.tangential),
                                         ("derivative", self.derivative)) for n, v in fam.items()},
            "slopes": [None if s is None else float(s) for s in self.slopes],
            "pass": {k: (v if isinstance(v, str) else bool(v)) for k, v in self.passes().items()},
            "flags": dict(self.flags),
        }


def _untwisted_derivative(op: OperatorPair, u: np.ndarray, ds: np.ndarray) -> np.ndarray:
    """Centered ``d/ds`` of ``u exp(-i zeta (s - s*))`` on the non-uniform periodic grid."""
    ns = op.disc.ns
    s = op.s[:-1]
    s_next = np.roll(s, -1)
    s_next[-1] += op.L
    s_prev = np.roll(s, 1)
    s_prev[0] -= op.L
    # neighbours continued across the seam by quasi-periodicity
    u_next = np.roll(u, -1, axis=0)
    u_prev = np.roll(u, 1, axis=0)
    u_next[ns - 1] *= np.exp(1j * op.floquet)
    u_prev[0] *= np.exp(-1j * op.floquet)
    zeta = op.carrier
    v_next = u_next * np.exp(-1j * zeta * (ds + s_next - s))[:, None]
    v_prev = u_prev * np.exp(-1j * zeta * (ds - (s - s_prev)))[:, None]
    return (v_next - v_prev) / (s_next - s_prev)[:, None]


def moment_report(solutions, f: FieldModel, m: MinimumData, n_max: int = 2) -> AgmonReport:
    """Rescaled moments for a list of ``(op, x)`` solved ground states.

    For ``n = 1..n_max``:

    * ``B^{n/2} int t^n |u|^2``
    * ``B^{n/2} int s^{2n} |u|^2``
    * ``B^{(n-1)/2} int s^{2n} |D_s u|^2`` with ``D_s`` a centered difference of
      the envelope after removing the boundary-layer phase ``exp(-i xi0 sqrt(b'B) s)``.

    All integrals are normalized by ``||u||^2``; ``s`` is measured from ``s*``.
    """
    if len(solutions) < 4:
        raise AgmonError("need at least four solved states")
    Bs = np.array([op.B for op, _ in solutions])
    if Bs.max() / Bs.min() < 8 - 1e-12:
        raise AgmonError("sweep must span a factor of at least 8 in B")
    trace_const = np.ptp(f.tables["beta"]) <= 1e-12 * max(1.0, f.tables["beta"].max())
    normal = {n: [] for n in range(1, n_max + 1)}
    tang = {n: [] for n in range(1, n_max + 1)}
    der = {n: [] for n in range(1, n_max + 1)}
    slopes = []
    for op, x in solutions:
        W = op.node_weights()
        u = op.physical(x)
        ds = _offsets(op, m.s_star)
        Du = _untwisted_derivative(op, u, ds)
        mass = np.sum(W * np.abs(u) ** 2)
        t = op.t[None, :-1]
        for n in normal:
            normal[n].append(op.B ** (n / 2) * np.sum(W * t**n * np.abs(u) ** 2) / mass)
            tang[n].append(op.B ** (n / 2) * np.sum(W * ds[:, None] ** (2 * n) * np.abs(u) ** 2) / mass)
            der[n].append(op.B ** ((n - 1) / 2) * np.sum(W * ds[:, None] ** (2 * n) * np.abs(Du) ** 2) / mass)
        if not trace_const and m.nondegenerate:
            slopes.append(decay_slope(op, x, f, m))
        else:
            slopes.append(None)
    flags = {}
    if trace_const or not m.nondegenerate:
        flags["tangential"] = NOT_APPLICABLE
        flags["derivative"] = NOT_APPLICABLE
        flags["slope"] = NOT_APPLICABLE
        dtab = np.zeros_like(f.tables["s"])
    else:
        s = f.tables["s"]
        dtab = agmon_table(f, m, (s - m.s_star + 0.5 * f.curve.L) % f.curve.L - 0.5 * f.curve.L)
    return AgmonReport(B=list(Bs), normal=normal, tangential=tang, derivative=der,
                       slopes=slopes, d_table=dtab, flags=flags)
