"""Randomised statistic built from Bernoulli indicators of Gaussian draws.

For each monitoring step ``k`` one block of ``R`` standard normals ``xi_j``
is drawn (see ``_rng``) and reused for every quadrature node ``u_s``:

    zeta_j(u)   = 1{ psi_tilde**0.5 * xi_j <= u }
    vartheta(u) = (2 / sqrt(R)) * sum_j (zeta_j(u) - 1/2)
    Theta       = sum_s w_s / sqrt(pi) * vartheta(sqrt(2) z_s)**2

The draws are realised as ``xi_j = Phi^{-1}(U_j)``, so the indicator is
evaluated as ``U_j <= Phi(u * exp(-log_psi_tilde / 2))``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr

from . import kernels
from ._rng import raw_block

log = logging.getLogger(__name__)

SUPPORTED_NODES = (1, 2, 4)
R_SLACK_WARN = 0.05


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n_S(self) -> int:
        return self.nodes.size

    @property
    def norm_weights(self) -> np.ndarray:
        return self.weights / math.sqrt(math.pi)

    @property
    def abscissae(self) -> np.ndarray:
        return math.sqrt(2.0) * self.nodes


@lru_cache(maxsize=None)
def gh_rule(n_S: int = 2) -> QuadratureRule:
    if n_S not in SUPPORTED_NODES:
        raise ValueError(f"n_S must be one of {SUPPORTED_NODES}, got {n_S}")
    z, w = np.polynomial.hermite.hermgauss(n_S)
    return QuadratureRule(nodes=z, weights=w)


@dataclass(frozen=True)
class ThetaDraw:
    theta: float
    k: int
    R: int


def select_R(m: int, R: int | None = None, gamma: float | None = None) -> int:
    """Default ``R = m``; overrides are accepted but checked against ``R exp(-m^gamma)``."""
    if R is None:
        return int(m)
    if R < 1:
        raise ValueError("R must be positive")
    if gamma is not None:
        slack = R * math.exp(-(m**gamma))
        if slack > R_SLACK_WARN:
            log.warning("R=%d is large relative to m=%d: R*exp(-m^gamma)=%.3g", R, m, slack)
    return int(R)


def thresholds(log_psi_tilde, rule: QuadratureRule) -> np.ndarray:
    """Indicator probabilities ``Phi(u_s * psi_tilde**-0.5)``, shape ``(n, n_S)``."""
    L = np.atleast_1d(np.asarray(log_psi_tilde, dtype=float))
    scale = np.exp(-0.5 * L)  # 0 when L = +inf, +inf when L = -inf
    u = rule.abscissae
    with np.errstate(invalid="ignore"):
        t = scale[:, None] * u[None, :]
    t[:, u == 0] = 0.0
    return ndtr(t)


def theta_from_counts(counts: np.ndarray, R: int, rule: QuadratureRule) -> np.ndarray:
    vt = (2.0 / math.sqrt(R)) * (counts - 0.5 * R)
    return (vt * vt) @ rule.norm_weights


def theta_path(log_psi_tilde, R: int, rule: QuadratureRule, key: np.ndarray,
               k_first: int = 1) -> np.ndarray:
    """Theta for consecutive steps ``k_first, k_first + 1, ...``."""
    probs = np.ascontiguousarray(thresholds(log_psi_tilde, rule))
    raw = raw_block(key, k_first, probs.shape[0], R)
    counts = kernels.theta_counts(raw, R, probs)
    return theta_from_counts(counts, R, rule)


def theta_stat(psi, R: int, rule: QuadratureRule, key: np.ndarray, k: int) -> ThetaDraw:
    """Single-step statistic on the substream owned by step ``k``."""
    L = psi.log_psi_tilde if hasattr(psi, "log_psi_tilde") else float(psi)
    theta = float(theta_path([L], R, rule, key, k_first=k)[0])
    return ThetaDraw(theta=theta, k=k, R=R)
