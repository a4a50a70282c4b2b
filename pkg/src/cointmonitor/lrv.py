"""Bartlett-kernel long-run variance of calibration residuals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

VARIANCE_FLOOR = 1e-12


class DegenerateVarianceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LrvEstimate:
    sigma2: float
    H: int
    rho_hat: np.ndarray


def autocov(e, lag: int) -> float:
    """Lag-``lag`` autocovariance with divisor ``m`` (not ``m - lag``)."""
    e = np.asarray(e, dtype=float)
    m = e.size
    if not 0 <= lag < m:
        raise ValueError(f"lag must satisfy 0 <= lag < {m}, got {lag}")
    return float(np.dot(e[lag:], e[: m - lag]) / m)


def default_bandwidth(m: int) -> int:
    if m < 1:
        raise ValueError("m must be positive")
    H = int(math.floor(m ** (1.0 / 6.0)))
    # guard against pow() landing just below an exact integer root
    if (H + 1) ** 6 <= m:
        H += 1
    return H


def bartlett_lrv(e, H: int | None = None) -> LrvEstimate:
    e = np.asarray(e, dtype=float)
    m = e.size
    if H is None:
        H = default_bandwidth(m)
    if not 0 <= H < m:
        raise ValueError(f"bandwidth must satisfy 0 <= H < {m}, got {H}")
    rho = np.array([autocov(e, lag) for lag in range(H + 1)])
    weights = 1.0 - np.arange(1, H + 1) / (H + 1.0)
    sigma2 = float(rho[0] + 2.0 * np.dot(weights, rho[1:]))
    if not sigma2 > VARIANCE_FLOOR:
        raise DegenerateVarianceError(f"long-run variance estimate {sigma2:.3g} is degenerate")
    return LrvEstimate(sigma2=sigma2, H=H, rho_hat=rho)
