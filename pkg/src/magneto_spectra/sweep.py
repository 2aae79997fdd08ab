"""B-sweeps, asymptotic least-squares fits and their comparison with predictions."""
from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .asymptotics import AsymptoticPrediction, AsymptoticsError, predict_two_term
from .eigensolve import SolverError
from .strip import StripError, dirichlet_truncation_error

__all__ = [
    "SweepRecord",
    "AsymptoticFit",
    "AsymptoticRegressor",
    "FitError",
    "SweepError",
    "run_sweep",
    "fit",
    "resolve_jobs",
    "write_csv",
    "read_csv",
    "floquet_variation",
]

COND_LIMIT = 1e8
FLOQUET_PHASES = (0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi)


class SweepError(ValueError):
    pass


class FitError(ValueError):
    pass


def resolve_jobs(jobs: int | None = None) -> int:
    """``jobs`` if given, else ``$MAGNETO_SPECTRA_JOBS``, else the logical core count."""
    if jobs is None:
        env = os.environ.get("MAGNETO_SPECTRA_JOBS")
        if env:
            try:
                jobs = int(env)
            except ValueError as exc:
                raise SweepError(f"MAGNETO_SPECTRA_JOBS must be an integer, got {env!r}") from exc
        else:
            jobs = os.cpu_count() or 1
    if jobs < 1:
        raise SweepError("jobs must be positive")
    return jobs


@dataclass
class SweepRecord:
    """One ``B`` of a sweep.  ``error`` is set (and ``values`` empty) on solver failure."""

    B: float
    values: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    iterations: int = 0
    tail_mass: float = float("nan")
    floquet_var: float = float("nan")
    theta: float = 0.0
    grid: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def lambda1(self) -> float:
        return self.values[0] if self.values else float("nan")

    def to_dict(self) -> dict:
        return {"B": self.B, "values": list(map(float, self.values)),
                "residuals": list(map(float, self.residuals)), "iterations": self.iterations,
                "tail_mass": self.tail_mass, "floquet_var": self.floquet_var, "theta": self.theta,
                "grid": self.grid, "error": self.error}


def _validate_B(B_list, strict: bool = True) -> np.ndarray:
    B = np.asarray(list(B_list), float)
    if B.size == 0:
        raise SweepError("empty B list")
    if np.any(~np.isfinite(B)) or np.any(B <= 0):
        raise SweepError("all B values must be positive")
    if np.unique(B).size != B.size:
        raise SweepError("duplicate B values")
    if np.any(np.diff(B) <= 0):
        raise SweepError("B values must be increasing")
    if strict and (B.size < 5 or B[-1] / B[0] < 8):
        raise SweepError("a sweep needs at least 5 values of B spanning a factor of 8")
    return B


def floquet_variation(problem, B: float, disc=None) -> tuple[float, list]:
    """Relative spread of ``lambda_1`` over the Floquet phases ``0, pi/2, pi, 3 pi/2``."""
    disc = disc or problem.disc(B)
    vals = [problem.lambda1(B, theta=th, disc=disc) for th in FLOQUET_PHASES]
    return float((max(vals) - min(vals)) / abs(vals[0])), vals


def _one(problem, B, nev, floquet_check):
    rec = SweepRecord(B=float(B))
    try:
        op, res = problem.solve(B, nev)
        rec.values = [float(v) for v in res.values]
        rec.residuals = [float(r) for r in res.residuals]
        rec.iterations = res.iterations
        rec.theta = op.floquet
        rec.grid = op.disc.to_dict()
        rec.tail_mass = dirichlet_truncation_error(op, res.vectors[:, 0], warn=False)
        if floquet_check:
            rec.floquet_var, _ = floquet_variation(problem, B, op.disc)
    except (SolverError, StripError, np.linalg.LinAlgError, RuntimeError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def run_sweep(problem, B_list, nev: int = 1, *, jobs: int | None = None,
              floquet_check: bool = False, strict: bool = True) -> list[SweepRecord]:
    """Solve for every ``B``; failed records carry ``error`` and the sweep continues.

    Records are returned in ``B`` order regardless of ``jobs``.
    """
    B = _validate_B(B_list, strict)
    jobs = resolve_jobs(jobs)
    problem.minimum  # build shared caches before threads start
    problem.gauge
    if jobs == 1:
        return [_one(problem, b, nev, floquet_check) for b in B]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda b: _one(problem, b, nev, floquet_check), B))


def write_csv(records: list[SweepRecord], path, predictions: dict | None = None) -> None:
    """CSV with columns ``B, lambda1..lambdaN, pred_rough, pred_two_term, resid,
    tail_mass, floquet_var``; ``resid`` is ``lambda1 - pred_two_term`` (or
    ``- pred_rough`` without a two-term law)."""
    predictions = predictions or {}
    nmax = max((len(r.values) for r in records), default=1) or 1
    cols = ["B"] + [f"lambda{i + 1}" for i in range(nmax)] + [
        "pred_rough", "pred_two_term", "resid", "tail_mass", "floquet_var"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in records:
            vals = r.values + [float("nan")] * (nmax - len(r.values))
            pr = predictions.get("rough")
            pt = predictions.get("two_term")
            rough = float(pr(r.B)) if pr else float("nan")
            two = float(pt(r.B)) if pt else float("nan")
            ref = two if pt else rough
            w.writerow([repr(r.B)] + [repr(float(v)) for v in vals]
                       + [repr(rough), repr(two), repr(r.lambda1 - ref), repr(r.tail_mass),
                          repr(r.floquet_var)])


def read_csv(path) -> dict:
    """Columns of a sweep CSV as float arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SweepError("empty sweep CSV")
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


class AsymptoticRegressor(BaseEstimator, RegressorMixin):
    """Weighted least squares of ``lambda(B)`` on powers of ``B``.

    Parameters
    ----------
    exponents : tuple of float
        Basis exponents, default ``(1, 1/2, 1/3)``.
    weight_power : float
        Residuals are scaled by ``B**weight_power`` (default ``-1``: relative
        residuals, since absolute errors grow with ``B``).

    Attributes
    ----------
    coef_, stderr_ : ndarray
        Coefficients and standard errors, aligned with ``exponents``.
    cond_ : float
        Condition number of the weighted design matrix.
    """

    def __init__(self, exponents=(1.0, 0.5, 1.0 / 3.0), weight_power=-1.0):
        self.exponents = exponents
        self.weight_power = weight_power

    def _design(self, B):
        B = np.asarray(B, float).reshape(-1)
        return np.stack([B**e for e in self.exponents], axis=1)

    def fit(self, X, y):
        B = np.asarray(X, float).reshape(-1)
        y = np.asarray(y, float).reshape(-1)
        if B.size != y.size:
            raise FitError("X and y lengths differ")
        p = len(self.exponents)
        if B.size < p:
            raise FitError(f"need at least {p} points")
        w = B**self.weight_power
        A = self._design(B) * w[:, None]
        b = y * w
        self.cond_ = float(np.linalg.cond(A))
        coef, *_ = np.linalg.lstsq(A, b, rcond=None)
        r = b - A @ coef
        dof = B.size - p
        self.rss_ = float(r @ r)
        if dof > 0:
            cov = self.rss_ / dof * np.linalg.pinv(A.T @ A)
            self.stderr_ = np.sqrt(np.maximum(np.diag(cov), 0.0))
        else:
            self.stderr_ = np.zeros(p)
        self.coef_ = coef
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return self._design(X) @ self.coef_


@dataclass
class AsymptoticFit:
    """Fitted coefficients with comparison against a prediction."""

    exponents: tuple
    coef: np.ndarray
    stderr: np.ndarray
    cond: float
    rss: float
    comparison: list
    residual_exponent: float
    stable: bool
    B: np.ndarray = field(repr=False, default=None)
    lam: np.ndarray = field(repr=False, default=None)

    @property
    def a(self) -> float:
        return float(self.coef[0])

    @property
    def b(self) -> float:
        return float(self.coef[1])

    def to_dict(self) -> dict:
        return {"exponents": [float(e) for e in self.exponents],
                "coef": [float(c) for c in self.coef], "stderr": [float(s) for s in self.stderr],
                "cond": self.cond, "rss": self.rss, "comparison": self.comparison,
                "residual_exponent": self.residual_exponent, "stable": self.stable}

    def table(self) -> str:
        lines = [f"{'term':>8} {'fitted':>14} {'stderr':>11} {'predicted':>14} {'rel.err':>10}"]
        for row in self.comparison:
            lines.append(f"{row['term']:>8} {row['fitted']:>14.8f} {row['stderr']:>11.3e} "
                         f"{row['predicted']:>14.8f} {row['rel_error']:>10.3e}")
        for e, c, s in zip(self.exponents[2:], self.coef[2:], self.stderr[2:]):
            lines.append(f"{'B^%.3g' % e:>8} {c:>14.8f} {s:>11.3e} {'':>14} {'':>10}")
        lines.append(f"residual exponent {self.residual_exponent:.4f}; cond {self.cond:.3e}; "
                     f"stable {self.stable}")
        return "\n".join(lines)


def fit(records, model: AsymptoticPrediction, exponents=(1.0, 0.5, 1.0 / 3.0),
        weight_power: float = -1.0) -> AsymptoticFit:
    """Fit ``lambda_1(B)`` and compare ``(a, b)`` with ``model``.

    ``records`` may be :class:`SweepRecord` objects or ``(B, lambda1)`` pairs.
    """
    pairs = []
    for r in records:
        if isinstance(r, SweepRecord):
            if r.ok and r.values:
                pairs.append((r.B, r.lambda1))
        else:
            pairs.append((float(r[0]), float(r[1])))
    if len(pairs) < 4:
        raise FitError("need at least four usable records")
    pairs.sort()
    B = np.array([p[0] for p in pairs])
    lam = np.array([p[1] for p in pairs])
    reg = AsymptoticRegressor(tuple(exponents), weight_power).fit(B, lam)
    if reg.cond_ > COND_LIMIT:
        raise FitError(f"design condition number {reg.cond_:.2e} exceeds {COND_LIMIT:.0e}; "
                       "widen the span of B")
    comparison = []
    for name, k, target in (("B", 0, model.a), ("B^1/2", 1, model.b)):
        if k >= len(reg.coef_):
            continue
        rel = (reg.coef_[k] - target) / abs(target) if target != 0 else float("nan")
        comparison.append({"term": name, "fitted": float(reg.coef_[k]),
                           "stderr": float(reg.stderr_[k]), "predicted": float(target),
                           "rel_error": float(rel)})
    dev = np.abs(lam - model(B))
    if np.all(dev > 0):
        slope = float(np.polyfit(np.log(B), np.log(dev), 1)[0])
    else:
        slope = float("-inf")
    stable = True
    if B.size > len(exponents):
        sub = AsymptoticRegressor(tuple(exponents), weight_power).fit(B[:-1], lam[:-1])
        stable = bool(abs(sub.coef_[0] - reg.coef_[0]) < 3 * reg.stderr_[0])
    return AsymptoticFit(tuple(exponents), reg.coef_, reg.stderr_, reg.cond_, reg.rss_,
                         comparison, slope, stable, B, lam)


def two_term_or_none(m, c=None):
    try:
        return predict_two_term(m, c)
    except AsymptoticsError:
        return None
