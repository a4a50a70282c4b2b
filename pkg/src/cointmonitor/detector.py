"""Scalar ingredients of the monitoring statistic.

``Q(m;k)`` is the cumulative sum of squared monitoring residuals scaled by
the long-run variance, ``g(m;k)`` its admissible growth under the null, and
``psi = Q/g``.  The transformed statistic ``exp(1/psi) - 1`` overflows for
any realistic null sample, so only its logarithm is ever formed.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


def gamma_rule(delta: float, theta: float) -> float:
    """Growth exponent ``(1 - delta) / (theta - 1)`` for ``T_m = c m**theta``."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not theta > 1.0:
        raise ValueError("theta must exceed 1")
    return (1.0 - delta) / (theta - 1.0)


def resolve_gamma(gamma: float | None = None, delta: float | None = None,
                  theta: float | None = None, default: float = 0.45) -> float:
    """Pick ``gamma``: an explicit value wins over ``(delta, theta)``."""
    if gamma is not None:
        if delta is not None or theta is not None:
            log.warning("both gamma and (delta, theta) given; using gamma=%s", gamma)
        return float(gamma)
    if delta is not None and theta is not None:
        return gamma_rule(delta, theta)
    return default


def g_bound(m, k, gamma: float):
    mk = np.asarray(m, dtype=float) + np.asarray(k, dtype=float)
    return (mk + (mk / m) ** 2) ** (1.0 + gamma)


class QAccumulator:
    """Running numerator of ``Q(m;k)``."""

    def __init__(self, sigma2: float):
        if not sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        self.sigma2 = float(sigma2)
        self.numerator = 0.0

    def step(self, eps_hat: float) -> float:
        self.numerator += eps_hat * eps_hat
        return abs(self.numerator) / self.sigma2


def q_path(eps_hat, sigma2: float) -> np.ndarray:
    return np.abs(np.cumsum(np.square(eps_hat))) / sigma2


def log_expm1(a):
    """``log(exp(a) - 1)`` for ``a > 0`` without forming ``exp(a)``."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    big = a > 1.0
    with np.errstate(divide="ignore"):
        out[big] = a[big] + np.log1p(-np.exp(-a[big]))
        out[~big] = np.log(np.expm1(a[~big]))
    return out


@dataclass(frozen=True)
class PsiValue:
    a: float  # 1/psi = g/Q
    log_psi_tilde: float
    saturated: bool = False

    @property
    def psi(self) -> float:
        return 0.0 if self.saturated else 1.0 / self.a


def psi_transform(Q: float, g: float) -> PsiValue:
    if not g > 0:
        raise ValueError("g must be positive")
    if Q == 0:
        return PsiValue(a=math.inf, log_psi_tilde=math.inf, saturated=True)
    a = g / Q
    return PsiValue(a=a, log_psi_tilde=float(log_expm1(np.array([a]))[0]))


def log_psi_tilde_path(Q, g) -> np.ndarray:
    """Vectorised ``psi_transform(...).log_psi_tilde``; ``+inf`` where ``Q = 0``."""
    Q = np.asarray(Q, dtype=float)
    g = np.broadcast_to(np.asarray(g, dtype=float), Q.shape)
    out = np.full(Q.shape, np.inf)
    live = Q > 0
    out[live] = log_expm1(g[live] / Q[live])
    return out
