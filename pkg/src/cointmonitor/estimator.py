"""Calibration-window slope estimation and residuals for the monitoring horizon.

The slope is estimated once on observations ``1..m`` and never updated.
With deterministics the regression is run on demeaned (or demeaned and
detrended) data, and monitoring residuals are recursively demeaned or
detrended using every observation up to the current one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

COND_LIMIT = 1e12

DETREND_MODES = ("none", "const", "const+trend")


class EstimationError(ArithmeticError):
    """Singular or ill-conditioned design."""


class StateNotReady(RuntimeError):
    pass


def _solve(gram: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    gram = np.atleast_2d(gram)
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise EstimationError(f"{what}: Gram matrix is singular (condition number {cond:.3g})")
    return np.linalg.solve(gram, rhs)


def _as_2d(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[:, None] if x.ndim == 1 else x


@dataclass(frozen=True)
class CalibrationFit:
    beta_hat: np.ndarray
    mode: str = "none"
    m: int = 0
    y_trend: np.ndarray = field(default_factory=lambda: np.zeros(0))
    x_trend: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    @property
    def detrended(self) -> bool:
        return self.mode != "none"


def ols_slope(x, y) -> np.ndarray:
    """No-intercept OLS slope ``(sum x x')^{-1} sum x y``."""
    x = _as_2d(x)
    y = np.asarray(y, dtype=float)
    if x.shape[0] <= x.shape[1]:
        raise EstimationError("need more observations than regressors")
    return _solve(x.T @ x, x.T @ y, "ols_slope")


def plain_fit(x, y) -> CalibrationFit:
    x = _as_2d(x)
    return CalibrationFit(beta_hat=ols_slope(x, y), mode="none", m=x.shape[0])


def trend_design(idx, mode: str) -> np.ndarray:
    idx = np.asarray(idx, dtype=float)
    if mode == "const":
        return np.ones((idx.size, 1))
    if mode == "const+trend":
        return np.column_stack([np.ones(idx.size), idx])
    raise ValueError(f"no deterministic design for mode {mode!r}")


def detrend_fit(x, y, mode: str = "const+trend") -> CalibrationFit:
    """Slope from regressing detrended ``y`` on detrended ``x`` (Frisch-Waugh)."""
    x = _as_2d(x)
    y = np.asarray(y, dtype=float)
    m, p = x.shape
    D = trend_design(np.arange(1, m + 1), mode)
    if m <= p + D.shape[1]:
        raise EstimationError("calibration window too short for the deterministic terms")
    DtD = D.T @ D
    a = _solve(DtD, D.T @ y, "detrend_fit(y)")
    b = _solve(DtD, D.T @ x, "detrend_fit(x)")
    uy = y - D @ a
    ux = x - D @ b
    beta = _solve(ux.T @ ux, ux.T @ uy, "detrend_fit")
    return CalibrationFit(beta_hat=beta, mode=mode, m=m, y_trend=a, x_trend=b)


def fit(x, y, mode: str = "none") -> CalibrationFit:
    if mode == "none":
        return plain_fit(x, y)
    if mode in DETREND_MODES:
        return detrend_fit(x, y, mode)
    raise ValueError(f"unknown detrend mode {mode!r}")


def residual(fit: CalibrationFit, x_i, y_i) -> float:
    """``y_i - beta_hat' x_i`` (the pre-detrending residual when detrended)."""
    return float(y_i - np.dot(fit.beta_hat, np.atleast_1d(x_i)))


def residuals(fit: CalibrationFit, x, y) -> np.ndarray:
    return np.asarray(y, dtype=float) - _as_2d(x) @ fit.beta_hat


def calibration_residuals(fit: CalibrationFit, x, y) -> np.ndarray:
    """Residuals over the calibration window used for the long-run variance.

    For detrended fits these are the full-sample (non-recursive) detrended
    residuals, i.e. ``u^y - beta' u^x``.
    """
    e = residuals(fit, x, y)
    if not fit.detrended:
        return e
    D = trend_design(np.arange(1, len(e) + 1), fit.mode)
    coef = np.linalg.lstsq(D, e, rcond=None)[0]
    return e - D @ coef


class RecursiveTrendState:
    """Running sums for the recursive intercept (and trend) of ``eps_tilde``.

    ``update(e, i)`` must be called for ``i = 1, 2, ...`` in order and returns
    ``e - mu0_i - mu1_i * i`` with the coefficients fitted on ``j = 1..i``.
    """

    def __init__(self, mode: str = "const+trend"):
        if mode not in ("const", "const+trend"):
            raise ValueError(f"recursive detrending needs a deterministic mode, got {mode!r}")
        self.mode = mode
        self.n = 0
        self.s_j = 0.0
        self.s_jj = 0.0
        self.s_e = 0.0
        self.s_je = 0.0

    @property
    def min_obs(self) -> int:
        return 2 if self.mode == "const+trend" else 1

    def push(self, e: float, i: int) -> None:
        if i != self.n + 1:
            raise ValueError(f"expected index {self.n + 1}, got {i}")
        self.n = i
        self.s_j += i
        self.s_jj += float(i) * i
        self.s_e += e
        self.s_je += i * e

    def coefficients(self) -> tuple[float, float]:
        if self.n < self.min_obs:
            raise StateNotReady(f"need at least {self.min_obs} observations, have {self.n}")
        if self.mode == "const":
            return self.s_e / self.n, 0.0
        gram = np.array([[self.n, self.s_j], [self.s_j, self.s_jj]])
        mu = _solve(gram, np.array([self.s_e, self.s_je]), "recursive trend")
        return float(mu[0]), float(mu[1])

    def update(self, e: float, i: int) -> float:
        self.push(e, i)
        mu0, mu1 = self.coefficients()
        return e - mu0 - mu1 * i

    def snapshot(self) -> tuple:
        return (self.n, self.s_j, self.s_jj, self.s_e, self.s_je)


def recursive_detrended(eps_tilde, mode: str = "const+trend") -> np.ndarray:
    """Vectorised recursive demeaning/detrending of a whole series.

    Entry ``i - 1`` is the residual at index ``i`` using ``j = 1..i``.  Entries
    with too few observations (``i = 1`` under a trend) are NaN.
    """
    e = np.asarray(eps_tilde, dtype=float)
    j = np.arange(1, e.size + 1, dtype=float)
    s_e = np.cumsum(e)
    if mode == "const":
        return e - s_e / j
    if mode != "const+trend":
        raise ValueError(f"unknown mode {mode!r}")
    s_j = j * (j + 1) / 2
    s_jj = j * (j + 1) * (2 * j + 1) / 6
    s_je = np.cumsum(j * e)
    det = j * s_jj - s_j**2
    with np.errstate(invalid="ignore", divide="ignore"):
        mu0 = (s_jj * s_e - s_j * s_je) / det
        mu1 = (j * s_je - s_j * s_e) / det
        out = e - mu0 - mu1 * j
    out[det == 0] = np.nan
    return out
