"""Online monitoring session and its vectorised batch equivalent.

A session is calibrated on the first ``m`` observations and then consumes
one observation per step.  At step ``k`` (``1 <= k <= T_m``) it updates
``Q(m;k)``, draws ``Theta^(k)`` from the substream owned by ``k``, forms the
detector ``d(m;k) = |sum_{j<=k} (Theta^(j) - 1)/sqrt(2)|`` and stops the
first time ``d >= nu(m;k)``.

``run`` evaluates the same quantities with array operations; both paths
draw identical randomness and give identical reports.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import boundary, detector, estimator, lrv, randomizer
from ._rng import philox_key
from .dgp import ConfigurationError

SQRT2 = math.sqrt(2.0)
TRACE_FIELDS = ["k", "Q", "log_psi_tilde", "theta", "d", "nu", "crossed"]


class MonitorStateError(RuntimeError):
    pass


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class MonitorConfig:
    m: int
    T_m: int
    eta: float = 0.45
    alpha: float = 0.05
    gamma: float | None = None
    delta: float | None = None
    theta: float | None = None
    R: int | None = None
    n_S: int = 2
    H: int | None = None
    detrend: str = "none"
    crit_source: str = "auto"
    seed: int = 0
    stream: tuple = ()

    def __post_init__(self):
        if self.m < 1:
            raise ConfigurationError("m must be positive")
        if self.T_m < 1:
            raise ConfigurationError("T_m must be positive")
        if not 0.0 <= self.eta <= 0.5:
            raise ConfigurationError("eta must lie in [0, 1/2]")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError("alpha must lie in (0, 1)")
        if self.detrend not in estimator.DETREND_MODES:
            raise ConfigurationError(f"detrend must be one of {estimator.DETREND_MODES}")
        if self.n_S not in randomizer.SUPPORTED_NODES:
            raise ConfigurationError(f"n_S must be one of {randomizer.SUPPORTED_NODES}")

    def resolved_gamma(self) -> float:
        theta = self.theta
        if self.gamma is None and self.delta is not None and theta is None:
            if self.T_m <= self.m:
                raise ConfigurationError("cannot infer theta from T_m <= m; set gamma or theta")
            theta = math.log(self.T_m) / math.log(self.m)
        return detector.resolve_gamma(self.gamma, self.delta, theta)

    def resolved_R(self) -> int:
        return randomizer.select_R(self.m, self.R, self.resolved_gamma())

    def key(self) -> np.ndarray:
        return philox_key(self.seed, *self.stream, "randomizer")

    def critical_value(self) -> boundary.CriticalValue:
        return boundary.critical_value(self.eta, self.alpha, m=self.m, source=self.crit_source)


@dataclass(frozen=True)
class StepReport:
    k: int
    Q: float
    log_psi_tilde: float
    theta: float
    d: float
    nu: float
    crossed: bool


@dataclass
class DetectionReport:
    detected: bool
    k_hat: int
    m: int
    T_m: int
    crossing_d: float | None = None
    crossing_nu: float | None = None
    at_horizon: bool = False
    k_star: int | None = None
    delay: float | None = None
    trace: list = field(default_factory=list)

    @property
    def detection_time(self) -> int:
        """Absolute observation index of the stopping time."""
        return self.m + self.k_hat

    def summary(self) -> dict:
        return {"detected": self.detected, "k_hat": self.k_hat, "detection_time": self.detection_time,
                "crossing_d": self.crossing_d, "crossing_nu": self.crossing_nu,
                "at_horizon": self.at_horizon, "k_star": self.k_star, "delay": self.delay}


def detection_delay(detection_time: int, k_star: int) -> float:
    """Relative delay ``(k_hat - k*) / k*`` on the absolute time scale."""
    return (detection_time - k_star) / k_star


def write_trace(path, trace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_FIELDS)
        for s in trace:
            w.writerow([s.k, repr(s.Q), repr(s.log_psi_tilde), repr(s.theta), repr(s.d), repr(s.nu), int(s.crossed)])


def _calibrate(y_cal, x_cal, cfg: MonitorConfig):
    fit = estimator.fit(x_cal, y_cal, cfg.detrend)
    e = estimator.calibration_residuals(fit, x_cal, y_cal)
    H = lrv.default_bandwidth(cfg.m) if cfg.H is None else cfg.H
    return fit, lrv.bartlett_lrv(e, H)


class Monitor:
    """Single-writer monitoring session."""

    def __init__(self, y_cal, x_cal, cfg: MonitorConfig, crit: boundary.CriticalValue | None = None):
        y_cal = np.asarray(y_cal, dtype=float)
        x_cal = estimator._as_2d(x_cal)
        if y_cal.size != cfg.m or x_cal.shape[0] != cfg.m:
            raise InputError(f"calibration data must have m={cfg.m} rows")
        self.cfg = cfg
        self.fit, self.lrv = _calibrate(y_cal, x_cal, cfg)
        self.gamma = cfg.resolved_gamma()
        self.R = cfg.resolved_R()
        self.rule = randomizer.gh_rule(cfg.n_S)
        self.crit = crit if crit is not None else cfg.critical_value()
        if self.crit.eta != cfg.eta:
            raise ConfigurationError("critical value was computed for a different eta")
        self.key = cfg.key()
        self.q = detector.QAccumulator(self.lrv.sigma2)
        self.trend = None
        if self.fit.detrended:
            self.trend = estimator.RecursiveTrendState(self.fit.mode)
            for i, e in enumerate(estimator.residuals(self.fit, x_cal, y_cal), start=1):
                self.trend.push(float(e), i)
        self.k = 0
        self.theta_cumsum = 0.0
        self.thetas: list[float] = []
        self.trace: list[StepReport] = []
        self.stopped = False

    @property
    def sigma2(self) -> float:
        return self.lrv.sigma2

    def snapshot(self) -> tuple:
        return (tuple(self.fit.beta_hat), self.lrv.sigma2, self.k, self.q.numerator, self.theta_cumsum,
                None if self.trend is None else self.trend.snapshot(), tuple(self.key))

    def monitoring_residual(self, y_i, x_i) -> float:
        e = estimator.residual(self.fit, x_i, y_i)
        if self.trend is not None:
            e = self.trend.update(e, self.cfg.m + self.k + 1)
        return e

    def step(self, y_i, x_i) -> StepReport:
        cfg = self.cfg
        if self.stopped:
            raise MonitorStateError("session already stopped")
        if self.k >= cfg.T_m:
            raise MonitorStateError("monitoring horizon exhausted")
        e = self.monitoring_residual(y_i, x_i)
        self.k += 1
        k = self.k
        Q = self.q.step(e)
        psi = detector.psi_transform(Q, float(detector.g_bound(cfg.m, k, self.gamma)))
        theta = randomizer.theta_stat(psi, self.R, self.rule, self.key, k).theta
        self.thetas.append(theta)
        self.theta_cumsum += (theta - 1.0) / SQRT2
        d = abs(self.theta_cumsum)
        nu = float(boundary.boundary_value(cfg.m, k, self.crit))
        crossed = d >= nu
        rep = StepReport(k=k, Q=Q, log_psi_tilde=psi.log_psi_tilde, theta=theta, d=d, nu=nu, crossed=crossed)
        self.trace.append(rep)
        if crossed or k == cfg.T_m:
            self.stopped = True
        return rep

    def report(self, k_star: int | None = None) -> DetectionReport:
        last = self.trace[-1] if self.trace else None
        detected = bool(last is not None and last.crossed)
        k_hat = self.k if detected else self.cfg.T_m
        return _make_report(detected, k_hat, self.cfg, last, k_star, self.trace)

    def run_stream(self, y_mon, x_mon, k_star: int | None = None) -> DetectionReport:
        x_mon = estimator._as_2d(x_mon)
        for y_i, x_i in zip(np.asarray(y_mon, dtype=float), x_mon):
            if self.step(y_i, x_i).crossed:
                break
        return self.report(k_star)


def _make_report(detected, k_hat, cfg, last, k_star, trace) -> DetectionReport:
    delay = None
    if k_star is not None:
        delay = detection_delay(cfg.m + k_hat, k_star)
    return DetectionReport(
        detected=detected, k_hat=int(k_hat), m=cfg.m, T_m=cfg.T_m,
        crossing_d=last.d if detected else None, crossing_nu=last.nu if detected else None,
        at_horizon=detected and k_hat == cfg.T_m, k_star=k_star, delay=delay, trace=list(trace),
    )


@dataclass
class SessionPaths:
    """Per-step quantities of a whole session, index ``k - 1`` for step ``k``."""

    Q: np.ndarray
    log_psi_tilde: np.ndarray
    theta: np.ndarray
    d: np.ndarray
    m: int
    sigma2: float


def session_paths(y, x, cfg: MonitorConfig) -> SessionPaths:
    """All monitoring quantities for ``k = 1..T_m`` (no stopping applied)."""
    y = np.asarray(y, dtype=float)
    x = estimator._as_2d(x)
    m, T_m = cfg.m, cfg.T_m
    if y.size != m + T_m or x.shape[0] != m + T_m:
        raise InputError(f"expected {m + T_m} observations (m + T_m), got {y.size}")
    fit, est = _calibrate(y[:m], x[:m], cfg)
    e = estimator.residuals(fit, x, y)
    if fit.detrended:
        e = estimator.recursive_detrended(e, fit.mode)
    e = e[m:]
    Q = detector.q_path(e, est.sigma2)
    k = np.arange(1, T_m + 1)
    gamma = cfg.resolved_gamma()
    L = detector.log_psi_tilde_path(Q, detector.g_bound(m, k, gamma))
    theta = randomizer.theta_path(L, cfg.resolved_R(), randomizer.gh_rule(cfg.n_S), cfg.key())
    d = np.abs(np.cumsum((theta - 1.0) / SQRT2))
    return SessionPaths(Q=Q, log_psi_tilde=L, theta=theta, d=d, m=m, sigma2=est.sigma2)


def first_crossing(d: np.ndarray, nu: np.ndarray) -> int | None:
    """1-based index of the first ``d >= nu``, or None."""
    hit = np.flatnonzero(d >= nu)
    return int(hit[0]) + 1 if hit.size else None


def stop(paths: SessionPaths, cfg: MonitorConfig, crit: boundary.CriticalValue,
         k_star: int | None = None, trace: bool = False) -> DetectionReport:
    k = np.arange(1, cfg.T_m + 1)
    nu = boundary.boundary_value(cfg.m, k, crit)
    hit = first_crossing(paths.d, nu)
    detected = hit is not None
    k_hat = hit if detected else cfg.T_m
    steps = []
    if trace or detected:
        upto = k_hat
        steps = [StepReport(k=int(j), Q=float(paths.Q[j - 1]), log_psi_tilde=float(paths.log_psi_tilde[j - 1]),
                            theta=float(paths.theta[j - 1]), d=float(paths.d[j - 1]), nu=float(nu[j - 1]),
                            crossed=bool(paths.d[j - 1] >= nu[j - 1])) for j in range(1, upto + 1)]
    last = steps[-1] if steps else None
    return _make_report(detected, k_hat, cfg, last, k_star, steps if trace else [])


def run(y, x, cfg: MonitorConfig, k_star: int | None = None, trace: bool = False,
        crit: boundary.CriticalValue | None = None) -> DetectionReport:
    """Monitor a full sample of length ``m + T_m``."""
    paths = session_paths(y, x, cfg)
    return stop(paths, cfg, crit if crit is not None else cfg.critical_value(), k_star, trace)


def run_online(y, x, cfg: MonitorConfig, k_star: int | None = None,
               crit: boundary.CriticalValue | None = None) -> DetectionReport:
    """Same as :func:`run` but stepping a :class:`Monitor` one observation at a time."""
    y = np.asarray(y, dtype=float)
    x = estimator._as_2d(x)
    if y.size != cfg.m + cfg.T_m or x.shape[0] != y.size:
        raise InputError(f"expected {cfg.m + cfg.T_m} observations (m + T_m), got {y.size}")
    mon = Monitor(y[: cfg.m], x[: cfg.m], cfg, crit)
    return mon.run_stream(y[cfg.m:], x[cfg.m:], k_star)


def with_eta(cfg: MonitorConfig, eta: float) -> MonitorConfig:
    return replace(cfg, eta=eta)
