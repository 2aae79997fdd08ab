"""Magnetic field on the domain, its boundary minimum, and the strip gauge."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import sympy
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .geometry import BoundaryCurve, TubularMap

__all__ = [
    "FieldModel",
    "MinimumData",
    "StripGauge",
    "locate_minimum",
    "gauge_A1",
    "boundary_trace_derivatives",
]

NORMAL_STEP = 1e-5
UNIQUE_TOL = 1e-9
ALPHA_TOL = 1e-8


class FieldError(ValueError):
    pass


def _compile(expr: str):
    x, y = sympy.symbols("x y", real=True)
    try:
        parsed = sympy.sympify(expr, locals={"x": x, "y": y})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise FieldError(f"cannot parse field expression {expr!r}") from exc
    extra = parsed.free_symbols - {x, y}
    if extra:
        raise FieldError(f"field expression uses unknown symbols {sorted(map(str, extra))}")
    fn = sympy.lambdify((x, y), parsed, modules="numpy")

    def beta(px, py):
        px, py = np.broadcast_arrays(np.asarray(px, float), np.asarray(py, float))
        return np.broadcast_to(np.asarray(fn(px, py), float), px.shape).copy()

    return parsed, beta


@dataclass(frozen=True)
class FieldModel:
    """Scalar field ``beta(x, y) > 0`` on the closed domain bounded by ``curve``."""

    expr: str
    curve: BoundaryCurve

    def __post_init__(self):
        parsed, fn = _compile(self.expr)
        object.__setattr__(self, "_sym", parsed)
        object.__setattr__(self, "_fn", fn)
        pts, _ = self.curve.area_quadrature(256, 32)
        bnd = self.curve.point(self.curve.s_table)
        vals = np.concatenate([fn(*pts), fn(*bnd)])
        if not np.all(np.isfinite(vals)):
            raise FieldError("field is not finite on the domain")
        if np.min(vals) <= 0:
            raise FieldError("field must be positive on the closed domain")

    @classmethod
    def from_config(cls, cfg: dict, curve: BoundaryCurve) -> "FieldModel":
        cfg = dict(cfg)
        expr = cfg.pop("expr", None)
        if expr is None:
            raise FieldError("field config needs an 'expr' entry")
        if cfg:
            raise FieldError(f"unknown field keys: {sorted(cfg)}")
        return cls(str(expr), curve)

    def __call__(self, x, y) -> np.ndarray:
        return self._fn(x, y)

    def in_strip(self, s, t) -> np.ndarray:
        """``beta~(s, t) = beta(gamma(s) + t nu(s))`` for broadcastable ``s``, ``t``."""
        s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
        g, _, nu, _ = self.curve.frame(s.ravel())
        p = g + t.ravel() * nu
        return self._fn(p[0], p[1]).reshape(s.shape)

    def trace(self, s) -> np.ndarray:
        return self._fn(*self.curve.point(s))

    def flux(self) -> float:
        """Total flux ``int_Omega beta dx``."""
        pts, w = self.curve.area_quadrature(1024, 96)
        return float(np.sum(w * self._fn(*pts)))

    def interior_min(self) -> float:
        """``inf`` of the field over the closed domain (dense sample + polish)."""
        pts, _ = self.curve.area_quadrature(512, 96)
        vals = self._fn(*pts)
        trace = self.trace(self.curve.s_table)
        return float(min(np.min(vals), np.min(trace)))

    @cached_property
    def tables(self) -> dict:
        return boundary_trace_derivatives(self, self.curve)


def boundary_trace_derivatives(f: FieldModel, g: BoundaryCurve | None = None) -> dict:
    """Boundary tables of ``beta``, ``d beta/dt`` (inward), ``d beta/ds`` and ``d2 beta/ds2``.

    The normal derivative is a centered difference along ``nu``; the
    tangential derivatives are spectral (FFT of the uniformly sampled trace).
    """
    g = g or f.curve
    s = g.s_table
    gamma, _, nu, _ = g.frame(s)
    h = NORMAL_STEP * max(1.0, g.L / TWO_PI_)
    if h <= 0 or not np.isfinite(h):
        raise FieldError("normal difference step underflow")
    trace = f(*gamma)
    dbdt = (f(*(gamma + h * nu)) - f(*(gamma - h * nu))) / (2 * h)
    n = s.size
    k = np.fft.fftfreq(n, d=g.L / n) * 2 * np.pi
    fh = np.fft.fft(trace)
    if n % 2 == 0:
        k1 = k.copy()
        k1[n // 2] = 0.0
    else:
        k1 = k
    dbds = np.real(np.fft.ifft(1j * k1 * fh))
    d2bds2 = np.real(np.fft.ifft(-(k**2) * fh))
    return {"s": s, "beta": trace, "dbeta_dt": dbdt, "dbeta_ds": dbds, "d2beta_ds2": d2bds2,
            "k": g.curvature(s)}


TWO_PI_ = 2.0 * np.pi


def _spectral_eval(values: np.ndarray, L: float, s: float) -> float:
    """Trigonometric interpolant of uniformly sampled periodic data at ``s``."""
    n = values.size
    c = np.fft.fft(values) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        c = c.copy()
        c[n // 2] *= 0.5
        c = np.append(c, c[n // 2])
        k = np.append(k, -k[n // 2])
    return float(np.real(np.sum(c * np.exp(2j * np.pi * k * s / L))))


@dataclass(frozen=True)
class BoundaryMinimum:
    s: float
    value: float
    alpha: float
    dbeta_dt: float
    kappa: float


@dataclass(frozen=True)
class MinimumData:
    """Boundary minimum of the field with the data entering the two-term law.

    ``alpha`` is half the second tangential derivative at the minimum.
    ``minima`` lists every boundary minimum within ``UNIQUE_TOL`` of ``b'``
    when that set is finite; for a constant trace it is left empty.
    """

    s_star: float
    b: float
    b_prime: float
    alpha: float
    dbeta_dt: float
    kappa0: float
    unique: bool
    nondegenerate: bool
    spectral_assumption: bool
    minima: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "s_star": self.s_star,
            "b": self.b,
            "b_prime": self.b_prime,
            "alpha": self.alpha,
            "d2beta_ds2": 2 * self.alpha,
            "dbeta_dt": self.dbeta_dt,
            "kappa0": self.kappa0,
            "unique": self.unique,
            "nondegenerate": self.nondegenerate,
            "spectral_assumption": self.spectral_assumption,
            "minima": [m.__dict__ for m in self.minima],
        }


def locate_minimum(f: FieldModel, g: BoundaryCurve | None = None, theta0: float = 0.5901061249) -> MinimumData:
    """Global boundary minimum by dense scan and local polish.

    Flags ``unique=False`` if more than one boundary point attains the
    minimum within ``1e-9`` and ``nondegenerate=False`` if ``alpha <= 0``.
    ``spectral_assumption`` records ``theta0 * b' < b``.
    """
    g = g or f.curve
    tb = boundary_trace_derivatives(f, g)
    s, trace = tb["s"], tb["beta"]
    n = s.size
    scale = max(1.0, float(np.max(np.abs(trace))))
    bmin = float(np.min(trace))
    constant = float(np.ptp(trace)) <= UNIQUE_TOL * scale
    h = g.L / n

    candidates = []
    if not constant:
        left, right = np.roll(trace, 1), np.roll(trace, -1)
        idx = np.nonzero((trace <= left) & (trace <= right) & (trace <= bmin + 1e-6 * scale))[0]
        for j in idx:
            res = minimize_scalar(
                lambda x: float(f.trace(x)[0]),
                bounds=(s[j] - 2 * h, s[j] + 2 * h),
                method="bounded",
                options={"xatol": 1e-12},
            )
            x = float(res.x)
            for _ in range(3):
                d2 = _spectral_eval(tb["d2beta_ds2"], g.L, x)
                if d2 <= 0:
                    break
                x -= _spectral_eval(tb["dbeta_ds"], g.L, x) / d2
            x = float(np.mod(x, g.L))
            candidates.append((float(f.trace(x)[0]), x))
        best = min(v for v, _ in candidates)
        candidates = sorted(
            [(v, x) for v, x in candidates if v <= best + UNIQUE_TOL * scale], key=lambda c: c[1]
        )
        # merge duplicates found from neighbouring table points
        merged = []
        for v, x in candidates:
            if merged and min(abs(x - merged[-1][1]), g.L - abs(x - merged[-1][1])) < 4 * h:
                if v < merged[-1][0]:
                    merged[-1] = (v, x)
                continue
            merged.append((v, x))
        if len(merged) > 1 and min(abs(merged[0][1] - merged[-1][1]),
                                   g.L - abs(merged[0][1] - merged[-1][1])) < 4 * h:
            merged.pop()
        candidates = merged

    minima = []
    for v, x in candidates:
        gamma, _, nu, k = g.frame(x)
        hn = NORMAL_STEP
        dbdt = float((f(*(gamma + hn * nu)) - f(*(gamma - hn * nu)))[0] / (2 * hn))
        alpha = 0.5 * _spectral_eval(tb["d2beta_ds2"], g.L, x)
        minima.append(BoundaryMinimum(s=x, value=v, alpha=alpha, dbeta_dt=dbdt, kappa=float(k[0])))

    b = min(f.interior_min(), bmin)
    if minima:
        b_prime = min(m.value for m in minima)
        primary = min(minima, key=lambda m: m.value)
        s_star, alpha, dbdt, kappa0 = primary.s, primary.alpha, primary.dbeta_dt, primary.kappa
        unique = len(minima) == 1
    else:
        b_prime = bmin
        j = int(np.nonzero(tb["k"] >= np.max(tb["k"]) - 1e-10)[0][0])
        s_star, alpha, dbdt, kappa0 = float(s[j]), 0.0, float(tb["dbeta_dt"][j]), float(tb["k"][j])
        unique = False
    return MinimumData(
        s_star=s_star,
        b=b,
        b_prime=b_prime,
        alpha=alpha,
        dbeta_dt=dbdt,
        kappa0=kappa0,
        unique=unique,
        nondegenerate=bool(alpha > ALPHA_TOL),
        spectral_assumption=bool(theta0 * b_prime < b),
        minima=tuple(minima),
    )


@dataclass(frozen=True)
class StripGauge:
    """Gauge with vanishing normal component on the boundary strip.

    ``A1(s, t) = int_0^t (1 - t' k(s)) beta~(s, t') dt'`` so that
    ``d A1 / dt = (1 - t k) beta~``.
    """

    field: FieldModel
    tube: TubularMap
    n_gauss: int = 16

    def A1(self, s, t) -> np.ndarray:
        """Vectorized line integral by Gauss-Legendre on ``[0, t]``."""
        s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
        x, w = np.polynomial.legendre.leggauss(self.n_gauss)
        tq = 0.5 * t[..., None] * (x + 1.0)
        sq = np.broadcast_to(s[..., None], tq.shape)
        k = self.tube.curve.curvature(sq.ravel()).reshape(tq.shape)
        integrand = (1.0 - tq * k) * self.field.in_strip(sq, tq)
        return 0.5 * t * np.sum(w * integrand, axis=-1)

    def A1_bar(self, s, t, m: MinimumData) -> np.ndarray:
        """Model potential ``b' (t - k1 t^2/2 + (alpha/b') s^2 t)`` with ``s`` measured from ``s*``."""
        bp = m.b_prime
        k1 = m.kappa0 - m.dbeta_dt / bp
        ds = _wrap(np.asarray(s, float) - m.s_star, self.tube.curve.L)
        t = np.asarray(t, float)
        return bp * (t - 0.5 * k1 * t**2 + (m.alpha / bp) * ds**2 * t)

    def curl_residual(self, s, t, h: float = 1e-5) -> np.ndarray:
        """``d A1/dt - (1 - t k) beta~`` by second-order differences (one-sided at
        the strip edges)."""
        s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
        # shift the three-point stencil inward near the edges: offsets o-1, o, o+1
        o = np.where(t < h, 1.0, np.where(t > self.tube.t0 - h, -1.0, 0.0))
        f = [self.A1(s, t + (o + j) * h) for j in (-1.0, 0.0, 1.0)]
        dA = ((-o - 0.5) * f[0] + 2 * o * f[1] + (0.5 - o) * f[2]) / h
        k = self.tube.curve.curvature(s.ravel()).reshape(s.shape)
        return dA - (1.0 - t * k) * self.field.in_strip(s, t)


def _wrap(ds, L):
    return (np.asarray(ds) + 0.5 * L) % L - 0.5 * L


def gauge_A1(gauge: StripGauge, s: float, t: float) -> float:
    """Adaptive quadrature of the gauge line integral at one point."""
    if t < 0 or t > gauge.tube.t0 * (1 + 1e-12):
        raise FieldError("(s, t) outside the strip")
    k = float(gauge.tube.curve.curvature(s)[0])

    def integrand(tp):
        return (1.0 - tp * k) * float(gauge.field.in_strip(s, tp))

    val, err = quad(integrand, 0.0, t, epsabs=1e-13, epsrel=1e-12, limit=200)
    if not np.isfinite(val):
        raise FieldError("gauge quadrature failed")
    return val
