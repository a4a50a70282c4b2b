"""Synthetic cointegrating samples under the null and the break alternatives.

The model is ``y_i = mu0 + mu1*i + beta_i' x_i + eps_i`` with ``x`` a random
walk driven by AR(1) innovations and ``eps`` a standardised AR(1) error that
may load on the regressor innovations (endogeneity).  Indices run from 1 to
``T``; array position ``i - 1`` holds observation ``i``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.signal import lfilter

from ._rng import generator

BURN_IN = 500


class ConfigurationError(ValueError):
    """Invalid data-generating or monitoring configuration."""


@dataclass(frozen=True)
class NoBreak:
    pass


@dataclass(frozen=True)
class SlopeBreak:
    delta: Union[float, tuple] = 1.0


@dataclass(frozen=True)
class CointBreak:
    """Errors become a random walk after ``k*``.

    Increments are Gaussian with variance ``innovation_var`` (unit by default,
    matching the standardised pre-break error).
    """

    innovation_var: float = 1.0

    def __post_init__(self):
        if not self.innovation_var > 0:
            raise ConfigurationError("innovation_var must be positive")


@dataclass(frozen=True)
class LocalSlope:
    """Slope break of size ``scale * m**(-exponent)``."""

    scale: float = 1.0
    exponent: float = 0.5

    def magnitude(self, m: int) -> float:
        return self.scale * m ** (-self.exponent)


@dataclass(frozen=True)
class LocalCoint:
    """Errors gain a random-walk component scaled by ``scale * m**(-exponent)``."""

    scale: float = 1.0
    exponent: float = 0.5

    def magnitude(self, m: int) -> float:
        return self.scale * m ** (-self.exponent)


BreakMode = Union[NoBreak, SlopeBreak, CointBreak, LocalSlope, LocalCoint]


@dataclass(frozen=True)
class DgpSpec:
    T: int
    m: int
    p: int = 1
    rho_x: float = 0.0
    rho_eps: float = 0.0
    rho_xeps: float = 0.0
    sigma_u2: float = 2.0
    mu0: float = 0.0
    mu1: float = 0.0
    beta: Union[float, tuple] = 1.0
    break_mode: BreakMode = field(default_factory=NoBreak)
    k_star: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.p < 1:
            raise ConfigurationError("p must be at least 1")
        if not 1 <= self.m < self.T:
            raise ConfigurationError(f"need 1 <= m < T, got m={self.m}, T={self.T}")
        if self.k_star is None:
            object.__setattr__(self, "k_star", self.T)
        if self.k_star < self.m:
            raise ConfigurationError(f"break date k*={self.k_star} precedes the monitoring horizon (m={self.m})")
        if self.k_star > self.T:
            raise ConfigurationError(f"k*={self.k_star} exceeds T={self.T}")
        if not 0.0 <= self.rho_x < 1.0:
            raise ConfigurationError("rho_x must lie in [0, 1)")
        if not 0.0 <= self.rho_eps <= 1.0:
            raise ConfigurationError("rho_eps must lie in [0, 1]")
        if self.rho_eps == 1.0:
            raise ConfigurationError("rho_eps = 1 is only reachable through CointBreak")
        if not self.sigma_u2 > 0:
            raise ConfigurationError("sigma_u2 must be positive")
        if len(self.beta_vector) != self.p:
            raise ConfigurationError("beta must have p components")

    @property
    def beta_vector(self) -> np.ndarray:
        b = np.atleast_1d(np.asarray(self.beta, dtype=float))
        return np.full(self.p, b[0]) if b.size == 1 else b

    @property
    def has_break(self) -> bool:
        return not isinstance(self.break_mode, NoBreak) and self.k_star < self.T


@dataclass
class GeneratedSample:
    y: np.ndarray
    x: np.ndarray
    eps: np.ndarray
    k_star: int

    @property
    def T(self) -> int:
        return len(self.y)

    def regime(self) -> np.ndarray:
        """1 for observations after the break date, else 0."""
        return (np.arange(1, self.T + 1) > self.k_star).astype(int)

    def to_csv(self, path) -> None:
        p = self.x.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "y", *[f"x{j + 1}" for j in range(p)], "eps", "regime"])
            for i in range(self.T):
                w.writerow([i + 1, repr(float(self.y[i])), *[repr(float(v)) for v in self.x[i]],
                            repr(float(self.eps[i])), int(i + 1 > self.k_star)])

    @classmethod
    def from_csv(cls, path) -> "GeneratedSample":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], np.array(rows[1:], dtype=float)
        xcols = [j for j, h in enumerate(header) if h.startswith("x")]
        regime = body[:, header.index("regime")]
        after = np.flatnonzero(regime > 0)
        k_star = int(after[0]) if after.size else len(body)
        return cls(y=body[:, header.index("y")], x=body[:, xcols],
                   eps=body[:, header.index("eps")], k_star=k_star)


def _ar1(innov: np.ndarray, rho: float) -> np.ndarray:
    # zero initial state; the burn-in absorbs it
    return lfilter([1.0], [1.0, -rho], innov, axis=0)


def gen_regressors(spec: DgpSpec, rng: np.random.Generator):
    """Random-walk regressors with AR(1) increments.

    Returns ``(x, v_u)`` where ``x`` is ``T x p`` and ``v_u`` holds the raw
    Gaussian innovations including the ``BURN_IN`` leading rows, which the
    error generator reuses for the endogeneity term.
    """
    if not spec.sigma_u2 > 0:
        raise ConfigurationError("sigma_u2 must be positive")
    v_u = rng.standard_normal((BURN_IN + spec.T, spec.p)) * np.sqrt(spec.sigma_u2)
    u = _ar1(v_u, spec.rho_x)[BURN_IN:]
    x = np.cumsum(u, axis=0)
    return x, v_u


def error_scale(rho_eps: float, rho_xeps: float, sigma_u2: float, p: int = 1) -> float:
    """Factor that makes the stationary error variance one."""
    return ((1.0 + rho_xeps**2 * p * sigma_u2) / (1.0 - rho_eps**2)) ** -0.5


def gen_errors(spec: DgpSpec, v_u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if spec.rho_eps >= 1.0:
        raise ConfigurationError("rho_eps = 1 is only reachable through CointBreak")
    n = v_u.shape[0]
    v_e = rng.standard_normal(n)
    star = _ar1((v_e + spec.rho_xeps * v_u.sum(axis=1))[:, None], spec.rho_eps)[:, 0]
    eps = star * error_scale(spec.rho_eps, spec.rho_xeps, spec.sigma_u2, spec.p)
    return eps[n - spec.T:]


def apply_alternative(y, x, eps, spec: DgpSpec, rng: np.random.Generator | None = None) -> GeneratedSample:
    """Impose the configured break on a null sample and rebuild ``y``.

    ``y`` is accepted for symmetry with the other generators; it is always
    reassembled from ``x`` and the (possibly modified) errors.
    """
    if spec.k_star < spec.m:
        raise ConfigurationError("break must lie in the monitoring horizon")
    T, ks = spec.T, spec.k_star
    idx = np.arange(1, T + 1)
    after = idx > ks
    eps = np.array(eps, dtype=float, copy=True)
    beta = np.tile(spec.beta_vector, (T, 1))
    mode = spec.break_mode
    n_after = int(after.sum())
    if n_after and isinstance(mode, (CointBreak, LocalCoint)) and rng is None:
        raise ConfigurationError("error-side breaks need a random stream")
    if n_after:
        if isinstance(mode, SlopeBreak):
            beta[after] += np.atleast_1d(np.asarray(mode.delta, dtype=float))
        elif isinstance(mode, LocalSlope):
            beta[after] += mode.magnitude(spec.m)
        elif isinstance(mode, CointBreak):
            steps = np.sqrt(mode.innovation_var) * rng.standard_normal(n_after)
            eps[after] = eps[ks - 1] + np.cumsum(steps)
        elif isinstance(mode, LocalCoint):
            walk = np.cumsum(rng.standard_normal(n_after))
            eps[after] = eps[after] + mode.magnitude(spec.m) * walk
    y = spec.mu0 + spec.mu1 * idx + np.einsum("ij,ij->i", beta, x) + eps
    return GeneratedSample(y=y, x=x, eps=eps, k_star=ks)


def generate(spec: DgpSpec, x_rng: np.random.Generator | None = None,
             e_rng: np.random.Generator | None = None) -> GeneratedSample:
    """Draw a full sample; regressor and error streams default to ``spec.seed``."""
    if x_rng is None:
        x_rng = generator(spec.seed, "dgp-x")
    if e_rng is None:
        e_rng = generator(spec.seed, "dgp-e")
    x, v_u = gen_regressors(spec, x_rng)
    eps = gen_errors(spec, v_u, e_rng)
    return apply_alternative(None, x, eps, spec, e_rng)
