"""Boundary function and critical values.

For ``eta < 1/2`` the critical value is the ``1 - alpha`` quantile of
``sup_{0<t<=1} |B(t)| / t**eta``, obtained by simulation on a uniform grid
(points ``t >= 1/grid`` only).  For ``eta = 1/2`` the Darling-Erdos type
limit gives a closed form depending on ``m``.
"""
from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import kernels
from ._rng import seed_sequence

DEFAULT_PATHS = 100_000
DEFAULT_GRID = 10_000
DEFAULT_SEED = 20240101
TABLE_FIELDS = ["eta", "alpha", "c", "n_paths", "grid", "seed"]


@dataclass(frozen=True)
class CriticalValue:
    eta: float
    alpha: float
    value: float
    source: str  # "gumbel-formula", "simulated" or "table"
    sim_meta: dict = field(default_factory=dict)


def nu_star(m, k, eta: float):
    """``sqrt(m) (1 + k/m) (k/(m+k))**eta``."""
    if not 0.0 <= eta <= 0.5:
        raise ValueError("eta must lie in [0, 1/2]")
    k = np.asarray(k, dtype=float)
    return math.sqrt(m) * (1.0 + k / m) * (k / (m + k)) ** eta


def crit_gumbel(alpha: float, m: int) -> CriticalValue:
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if m < 16:
        raise ValueError("m must be at least 16 for the iterated logarithms")
    llm = math.log(math.log(m))
    A = math.sqrt(2.0 * llm)
    D = 2.0 * llm + 0.5 * math.log(llm) - 0.5 * math.log(math.pi)
    c = (D - math.log(-math.log(1.0 - alpha))) / A
    return CriticalValue(eta=0.5, alpha=alpha, value=c, source="gumbel-formula", sim_meta={"m": m})


_sup_cache: dict[tuple, np.ndarray] = {}
_cache_lock = threading.Lock()


def sup_functional_sample(eta: float, n_paths: int = DEFAULT_PATHS, grid_size: int = DEFAULT_GRID,
                          seed: int = DEFAULT_SEED) -> np.ndarray:
    """Simulated draws of ``max_i |B(i/grid)| / (i/grid)**eta`` (cached)."""
    if not 0.0 <= eta < 0.5:
        raise ValueError("simulation covers 0 <= eta < 1/2; use crit_gumbel for eta = 1/2")
    key = (float(eta), int(n_paths), int(grid_size), int(seed))
    with _cache_lock:
        hit = _sup_cache.get(key)
    if hit is not None:
        return hit
    t = np.arange(1, grid_size + 1) / grid_size
    weights = np.ascontiguousarray(t ** (-eta))
    bitgen = np.random.PCG64(seed_sequence(seed, "critvals"))
    sample = kernels.brownian_sup(bitgen, int(n_paths), weights, math.sqrt(1.0 / grid_size))
    sample.setflags(write=False)
    with _cache_lock:
        _sup_cache[key] = sample
    return sample


def crit_sim(eta: float, alpha: float, n_paths: int = DEFAULT_PATHS, grid_size: int = DEFAULT_GRID,
             seed: int = DEFAULT_SEED) -> CriticalValue:
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    sample = sup_functional_sample(eta, n_paths, grid_size, seed)
    c = float(np.quantile(sample, 1.0 - alpha))
    meta = {"n_paths": int(n_paths), "grid": int(grid_size), "seed": int(seed)}
    return CriticalValue(eta=float(eta), alpha=float(alpha), value=c, source="simulated", sim_meta=meta)


def boundary_value(m, k, crit: CriticalValue):
    return crit.value * nu_star(m, k, crit.eta)


def read_table(path) -> list[CriticalValue]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [CriticalValue(eta=float(r["eta"]), alpha=float(r["alpha"]), value=float(r["c"]), source="table",
                          sim_meta={"n_paths": int(r["n_paths"]), "grid": int(r["grid"]), "seed": int(r["seed"])})
            for r in rows]


def write_table(path, values) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TABLE_FIELDS)
        for cv in sorted(values, key=lambda v: (v.eta, v.alpha)):
            meta = cv.sim_meta
            w.writerow([repr(cv.eta), repr(cv.alpha), repr(cv.value), meta["n_paths"], meta["grid"], meta["seed"]])


def bundled_table_path() -> Path:
    return Path(str(resources.files("cointmonitor") / "data" / "critical_values.csv"))


_bundled: list[CriticalValue] | None = None


def bundled_table() -> list[CriticalValue]:
    global _bundled
    if _bundled is None:
        path = bundled_table_path()
        _bundled = read_table(path) if path.exists() else []
    return _bundled


def critical_value(eta: float, alpha: float, m: int | None = None, source: str = "auto",
                   n_paths: int = DEFAULT_PATHS, grid_size: int = DEFAULT_GRID,
                   seed: int = DEFAULT_SEED) -> CriticalValue:
    """Resolve ``c_{alpha,m}``: Gumbel form at ``eta = 1/2``, else table or simulation."""
    if eta == 0.5:
        if m is None:
            raise ValueError("eta = 1/2 needs the calibration length m")
        return crit_gumbel(alpha, m)
    if source in ("auto", "table"):
        for cv in bundled_table():
            if math.isclose(cv.eta, eta) and math.isclose(cv.alpha, alpha):
                return cv
        if source == "table":
            raise KeyError(f"no tabulated critical value for eta={eta}, alpha={alpha}")
    elif source != "simulated":
        raise ValueError(f"unknown critical-value source {source!r}")
    return crit_sim(eta, alpha, n_paths, grid_size, seed)
