"""Finite-element discretization of the magnetic quadratic form on the boundary strip.

Coordinates are ``(s, t)``: arclength along the boundary and inward normal
distance.  The form discretized is::

    q(u) = int int (1 - t k) |d_t u|^2 + (1 - t k)^{-1} |(i d_s + B A1) u|^2  ds dt
    |u|^2 = int int (1 - t k) |u|^2 ds dt

with Neumann (natural) condition at ``t = 0``, a Dirichlet wall at ``t = t0``
and the quasi-periodicity ``u(s + L, t) = exp(i theta) u(s, t)``.

Unknowns are the nodal values of the periodic envelope ``v`` in
``u = exp(i phi(s)) v``.  The carrier phase ``phi`` has slope equal to the
boundary-layer momentum ``zeta = -xi0 sqrt(b' B)`` at ``s*`` and total
increment ``theta + 2 pi n`` over one period, so ``v`` is periodic::

    phi(s) = q (s - s*) + (zeta - q) L/(2 pi) sin(2 pi (s - s*)/L)     (smooth)
    phi(s) = q (s - s*)                                                (linear)

with ``q = (theta + 2 pi n)/L`` the admissible momentum nearest ``zeta``.  This
removes the fast tangential oscillation of the ground state from the grid,
keeps the mass matrix real, and (in the smooth form) makes the local carrier
independent of ``theta`` near a localized ground state.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from .field import FieldModel, MinimumData, StripGauge
from .geometry import TubularMap
from .halfline import degennes_constants

__all__ = [
    "StripDisc",
    "OperatorPair",
    "StripError",
    "assemble",
    "dirichlet_truncation_error",
    "holonomy_phase",
    "default_t0",
    "export_triplets",
    "read_triplets",
]

TAIL_TOL = 1e-8
LAYER_FRACTION = 0.6
LAYER_WIDTH = 3.0
MAX_DOF = 400_000


class StripError(ValueError):
    pass


def _layer_stretch(t0: float, layer: float) -> float:
    """Exponent ``c`` of ``t = t0 (e^{c z} - 1)/(e^c - 1)`` putting 60 % of nodes within ``layer``."""
    target = layer / t0
    if target >= LAYER_FRACTION:
        return 0.0

    def g(c):
        return np.expm1(c * LAYER_FRACTION) / np.expm1(c) - target

    return float(brentq(g, 1e-8, 200.0))


@dataclass(frozen=True)
class StripDisc:
    """Tensor grid on ``[s* - L/2, s* + L/2) x [0, t0]``.

    Parameters
    ----------
    ns : int
        Number of periodic tangential nodes (even, at least 8; the resolution
        policy never uses fewer than 64).
    nt : int
        Number of free normal nodes (at least 4; the policy uses at least 32);
        the Dirichlet node at ``t0`` is extra.
    t0 : float
        Strip depth.
    grading : float
        Normal stretch exponent; ``0`` gives a uniform grid.
    s_grading : float
        Tangential clustering ``0 <= g < 1`` around ``s_star``.
    s_star : float
        Centre of the tangential grid; the periodic seam sits opposite.
    quad : int
        Gauss points per element and direction.
    """

    ns: int
    nt: int
    t0: float
    grading: float = 0.0
    s_grading: float = 0.0
    s_star: float = 0.0
    quad: int = 3

    def __post_init__(self):
        if self.ns < 8 or self.ns % 2:
            raise StripError("ns must be even and at least 8")
        if self.nt < 4:
            raise StripError("nt must be at least 4")
        if not self.t0 > 0:
            raise StripError("t0 must be positive")
        if not 0.0 <= self.s_grading < 1.0:
            raise StripError("s_grading must lie in [0, 1)")
        if self.grading < 0:
            raise StripError("grading must be non-negative")
        if self.quad < 2:
            raise StripError("quad must be at least 2")

    @classmethod
    def policy(
        cls,
        tube: TubularMap,
        m: MinimumData,
        B: float,
        *,
        t0_factor: float = 8.0,
        h_layer: float = 0.04,
        ns_scale: float = 24.0,
        ns: int | None = None,
        nt: int | None = None,
    ) -> "StripDisc":
        """Resolution policy: depth ``t0_factor/sqrt(b' B)`` capped by the tube,
        ``nt`` resolving the layer with scaled spacing ``h_layer``, ``ns ~ B^{1/4}``."""
        if B <= 0:
            raise StripError("B must be positive")
        scale = 1.0 / np.sqrt(m.b_prime * B)
        t0 = min(t0_factor * scale * max(1.0, m.b_prime ** -0.5), tube.t0)
        grading = _layer_stretch(t0, LAYER_WIDTH * scale)
        if nt is None:
            # spacing near the wall is t0 c/(e^c - 1)/nt in physical units
            dz = h_layer * scale / t0
            slope = grading / np.expm1(grading) if grading > 0 else 1.0
            nt = int(np.clip(np.ceil(slope / dz), 32, 400))
        localized = m.nondegenerate and m.unique
        if ns is None:
            ns = int(max(64, 2 * np.ceil(0.5 * ns_scale * B**0.25)))
        return cls(ns=ns, nt=nt, t0=t0, grading=grading,
                   s_grading=0.9 if localized else 0.0, s_star=m.s_star)

    def s_nodes(self, L: float) -> np.ndarray:
        """Tangential nodes, ``ns + 1`` values with the last equal to the first plus ``L``."""
        eta = np.arange(self.ns + 1) / self.ns - 0.5
        return self.s_star + L * (eta - self.s_grading / (2 * np.pi) * np.sin(2 * np.pi * eta))

    def t_nodes(self) -> np.ndarray:
        """Normal nodes including the Dirichlet node at ``t0``."""
        z = np.arange(self.nt + 1) / self.nt
        if self.grading == 0:
            return self.t0 * z
        return self.t0 * np.expm1(self.grading * z) / np.expm1(self.grading)

    @property
    def shape(self) -> tuple[int, int]:
        return self.ns, self.nt

    @property
    def size(self) -> int:
        return self.ns * self.nt

    def refined(self) -> "StripDisc":
        """Nested refinement (every element split in two in both directions)."""
        return StripDisc(2 * self.ns, 2 * self.nt, self.t0, self.grading, self.s_grading,
                         self.s_star, self.quad)

    def to_dict(self) -> dict:
        return {"ns": self.ns, "nt": self.nt, "t0": self.t0, "grading": self.grading,
                "s_grading": self.s_grading, "s_star": self.s_star, "quad": self.quad}


@dataclass(frozen=True)
class OperatorPair:
    """Stiffness ``K`` (Hermitian) and mass ``M`` (positive definite) on the strip grid."""

    K: sp.csr_matrix
    M: sp.csr_matrix
    B: float
    floquet: float
    carrier: float
    disc: StripDisc
    s: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)
    phase: np.ndarray = field(repr=False, default=None)
    k: np.ndarray = field(repr=False, default=None)
    L: float = 0.0
    b_prime: float = 1.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.disc.shape

    def hermitian_defect(self) -> float:
        d = (self.K - self.K.conj().T).tocoo()
        kmax = np.max(np.abs(self.K.data))
        return float(np.max(np.abs(d.data), initial=0.0) / kmax)

    def envelope(self, x: np.ndarray) -> np.ndarray:
        """Nodal vector as an ``(ns, nt)`` array of the envelope ``v``."""
        return np.asarray(x).reshape(self.shape)

    def physical(self, x: np.ndarray) -> np.ndarray:
        """Nodal values of ``u = exp(i phi(s)) v`` on the ``(ns, nt)`` grid."""
        ph = np.exp(1j * self.phase)
        return ph[:, None] * self.envelope(x)

    def from_physical(self, u: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`physical`; ``u`` given on the ``(ns, nt)`` node grid."""
        ph = np.exp(-1j * self.phase)
        return (ph[:, None] * np.asarray(u).reshape(self.shape)).ravel()

    def node_weights(self) -> np.ndarray:
        """Lumped quadrature weights ``(1 - t k) ds dt`` on the ``(ns, nt)`` node grid."""
        hs = np.diff(self.s)
        ws = 0.5 * (hs + np.roll(hs, 1))
        ht = np.diff(self.t)
        wt = np.empty(self.disc.nt)
        wt[0] = 0.5 * ht[0]
        wt[1:] = 0.5 * (ht[1:] + ht[:-1])
        return ws[:, None] * wt[None, :] * (1.0 - self.t[None, :-1] * self.k[:, None])

    def rayleigh(self, x: np.ndarray) -> float:
        x = np.asarray(x)
        num = np.vdot(x, self.K @ x).real
        den = np.vdot(x, self.M @ x).real
        if den <= 0:
            raise StripError("zero trial vector")
        return float(num / den)


def default_t0(tube: TubularMap, m: MinimumData, B: float, factor: float = 8.0) -> float:
    return min(factor / np.sqrt(m.b_prime * B) * max(1.0, m.b_prime ** -0.5), tube.t0)


def holonomy_phase(field_model: FieldModel, B: float) -> float:
    """Floquet phase ``B * flux mod 2 pi`` matching the circulation of a global potential.

    The strip gauge has no circulation along ``t = 0``; a potential on the
    whole domain circulates the total flux there.  Using this phase makes the
    strip problem gauge-equivalent to the domain problem restricted to the
    strip.
    """
    return float(np.mod(B * field_model.flux(), 2 * np.pi))


def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _eval_1d(nodes, n_free, periodic, quad):
    """Values/derivatives of P1 hat functions at Gauss points.

    Returns ``(pts, wts, E, D)``, with ``E``/``D`` of shape ``(nel * quad, n_free)``.
    """
    x, w = _gauss(quad)
    h = np.diff(nodes)
    nel = h.size
    pts = (nodes[:-1, None] + h[:, None] * x[None, :]).ravel()
    wts = (h[:, None] * w[None, :]).ravel()
    rows = np.arange(nel * quad)
    left = np.repeat(np.arange(nel), quad)
    right = left + 1
    if periodic:
        right = right % n_free
    vl = np.tile(1.0 - x, nel)
    vr = np.tile(x, nel)
    dl = -np.repeat(1.0 / h, quad)
    dr = -dl
    keep = right < n_free
    shape = (nel * quad, n_free)
    keep_l = left < n_free
    r2 = np.concatenate([rows[keep_l], rows[keep]])
    c2 = np.concatenate([left[keep_l], right[keep]])
    E = sp.csr_matrix((np.concatenate([vl[keep_l], vr[keep]]), (r2, c2)), shape=shape)
    D = sp.csr_matrix((np.concatenate([dl[keep_l], dr[keep]]), (r2, c2)), shape=shape)
    return pts, wts, E, D


def _A1_grid(gauge: StripGauge, s_q: np.ndarray, t_q: np.ndarray, n_gauss: int = 12) -> np.ndarray:
    """``A1`` on the tensor grid ``s_q x t_q`` by Gauss-Legendre on ``[0, t]``."""
    curve = gauge.tube.curve
    g, _, nu, k = curve.frame(s_q)
    x, w = np.polynomial.legendre.leggauss(n_gauss)
    out = np.empty((s_q.size, t_q.size))
    tt = 0.5 * t_q[:, None] * (x[None, :] + 1.0)  # (Nt, ng)
    for i in range(s_q.size):
        px = g[0, i] + tt * nu[0, i]
        py = g[1, i] + tt * nu[1, i]
        integrand = (1.0 - tt * k[i]) * gauge.field(px, py)
        out[i] = 0.5 * t_q * (integrand @ w)
    return out


def assemble(
    tube: TubularMap,
    gauge: StripGauge,
    B: float,
    theta: float,
    d: StripDisc,
    *,
    b_prime: float = 1.0,
    carrier: float | None = None,
    smooth_carrier: bool | None = None,
    chi: tuple[Callable, Callable] | None = None,
) -> OperatorPair:
    """Assemble ``K`` and ``M`` for field strength ``B`` and Floquet phase ``theta``.

    Parameters
    ----------
    carrier : float, optional
        Target tangential momentum; rounded to the nearest Floquet-admissible
        value ``(theta + 2 pi n)/L``.  Defaults to ``-xi0 sqrt(b' B)``.
    smooth_carrier : bool, optional
        Use the smooth carrier phase (default when the grid is clustered
        around a localized minimum, i.e. ``d.s_grading > 0``).
    chi : (callable, callable), optional
        Periodic gauge function and its derivative.  The potential becomes
        ``A1 + chi'`` and the basis is multiplied by ``exp(i B chi)``, which
        leaves the discrete spectrum unchanged; used to test gauge invariance.
    """
    if B <= 0:
        raise StripError("B must be positive")
    curve = tube.curve
    if d.t0 > tube.t0 * (1 + 1e-12) or d.t0 * curve.kmax >= 1.0:
        raise StripError("strip depth violates the Jacobian condition 1 - t k > 0")
    if d.size > MAX_DOF:
        raise StripError(f"grid with {d.size} unknowns exceeds the memory budget ({MAX_DOF})")
    L = curve.L
    if carrier is None:
        carrier = -degennes_constants().xi0 * np.sqrt(b_prime * B)
    n = np.round((carrier * L - theta) / (2 * np.pi))
    q = float((theta + 2 * np.pi * n) / L)
    if smooth_carrier is None:
        smooth_carrier = d.s_grading > 0
    dz = (carrier - q) if smooth_carrier else 0.0
    w = 2 * np.pi / L

    def phi(x):
        return q * (x - d.s_star) + dz / w * np.sin(w * (x - d.s_star))

    def dphi(x):
        return q + dz * np.cos(w * (x - d.s_star))

    s_nodes = d.s_nodes(L)
    t_nodes = d.t_nodes()
    sq, ws, Es, Ds = _eval_1d(s_nodes, d.ns, True, d.quad)
    tq, wt, Et, Dt = _eval_1d(t_nodes, d.nt, False, d.quad)
    if chi is not None:
        c, dc = chi
        ph = np.exp(1j * B * c(sq))
        Ds = sp.diags(ph) @ (Ds + sp.diags(1j * B * dc(sq)) @ Es)
        Es = sp.diags(ph) @ Es

    k = curve.curvature(sq)
    jac = 1.0 - k[:, None] * tq[None, :]
    if np.min(jac) <= 0:
        raise StripError("Jacobian 1 - t k not positive on the grid")
    A = B * _A1_grid(gauge, sq, tq) - dphi(sq)[:, None]
    if chi is not None:
        A = A + B * dc(sq)[:, None]
    W = ws[:, None] * wt[None, :]

    E = sp.kron(Es, Et, format="csr")
    Dsk = sp.kron(Ds, Et, format="csr")
    Dtk = sp.kron(Es, Dt, format="csr")
    P = 1j * Dsk + sp.diags(A.ravel()) @ E
    K = Dtk.conj().T @ sp.diags((W * jac).ravel()) @ Dtk + P.conj().T @ sp.diags((W / jac).ravel()) @ P
    M = E.conj().T @ sp.diags((W * jac).ravel()) @ E
    K = (0.5 * (K + K.conj().T)).tocsr()
    M = (0.5 * (M + M.conj().T)).tocsr()
    M = M.real.tocsr()
    K.sort_indices()
    M.sort_indices()
    return OperatorPair(K=K, M=M, B=float(B), floquet=float(theta), carrier=float(carrier), disc=d,
                        s=s_nodes, t=t_nodes, phase=phi(s_nodes[:-1]),
                        k=curve.curvature(s_nodes[:-1]), L=L, b_prime=b_prime)


def dirichlet_truncation_error(op: OperatorPair, x: np.ndarray, fraction: float = 0.2,
                               warn: bool = True) -> float:
    """Fraction of the ``M``-mass of ``x`` lying in the outer ``fraction`` of the strip.

    Values above ``1e-8`` mean the Dirichlet wall influences the result; a
    ``RuntimeWarning`` is issued in that case.
    """
    x = np.asarray(x)
    total = np.vdot(x, op.M @ x).real
    t_free = op.t[:-1]
    mask = np.broadcast_to(t_free >= (1 - fraction) * op.disc.t0, op.shape).ravel()
    y = np.where(mask, x, 0)
    tail = float(np.vdot(y, op.M @ y).real / total)
    if warn and tail > TAIL_TOL:
        warnings.warn(f"ground state has {tail:.2e} of its mass near the Dirichlet wall; "
                      "increase t0", RuntimeWarning, stacklevel=2)
    return tail


def export_triplets(op: OperatorPair, path) -> None:
    """Write ``K`` and ``M`` in a plain triplet text format.

    Format: a header line ``# magneto-spectra triplets``, a line
    ``N nnzK nnzM B floquet``, then ``nnzK`` lines ``i j re im`` for ``K``
    followed by ``nnzM`` lines ``i j re im`` for ``M`` (0-based indices).
    """
    Kc, Mc = op.K.tocoo(), op.M.tocoo()
    with open(path, "w") as fh:
        fh.write("# magneto-spectra triplets\n")
        fh.write(f"{op.K.shape[0]} {Kc.nnz} {Mc.nnz} {op.B!r} {op.floquet!r}\n")
        for mat in (Kc, Mc):
            data = np.asarray(mat.data, complex)
            for i, j, v in zip(mat.row, mat.col, data):
                fh.write(f"{i} {j} {float(v.real)!r} {float(v.imag)!r}\n")


def read_triplets(path) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Read matrices written by :func:`export_triplets`."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise StripError("not a triplet file")
        n, nk, nm, *_ = fh.readline().split()
        n, nk, nm = int(n), int(nk), int(nm)
        body = np.loadtxt(fh, ndmin=2)
    mats = []
    for block in (body[:nk], body[nk:nk + nm]):
        mats.append(sp.csr_matrix((block[:, 2] + 1j * block[:, 3],
                                   (block[:, 0].astype(int), block[:, 1].astype(int))), shape=(n, n)))
    return mats[0], mats[1]
