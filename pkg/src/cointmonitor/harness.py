"""Monte Carlo experiments: rejection frequencies, delays and break-date histograms.

An experiment is a grid of cells (sample design x DGP parameters) crossed
with a list of boundary exponents ``eta``.  Every replication draws its
sample and randomisation from streams keyed by ``(base_seed, cell_id, rep,
role)``, so the output does not depend on how replications are scheduled.
Within a replication the statistic path is computed once and then stopped
against each ``eta`` boundary.
"""
from __future__ import annotations

import csv
import itertools
import json
import logging
import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import boundary, dgp, monitor
from ._rng import generator

log = logging.getLogger(__name__)

BREAK_KINDS = ("none", "slope", "coint")
M_RULES = {"T/4": 4, "T/2": 2}
QUICK_REPS = 200


class SpecError(ValueError):
    """Malformed experiment specification."""


@dataclass(frozen=True)
class Cell:
    T: int
    m: int
    rho_x: float
    rho_eps: float
    rho_xeps: float
    delta: float
    break_kind: str

    @property
    def cell_id(self) -> int:
        """Stable 31-bit identifier derived from the cell parameters."""
        text = f"{self.T}|{self.m}|{self.rho_x!r}|{self.rho_eps!r}|{self.rho_xeps!r}|{self.delta!r}|{self.break_kind}"
        return zlib.crc32(text.encode()) & 0x7FFFFFFF


@dataclass(frozen=True)
class ExperimentSpec:
    name: str = "experiment"
    t_list: tuple = (200,)
    m_rule: tuple = ("T/4",)
    rho_x_list: tuple = (0.0,)
    rho_eps_list: tuple = (0.0,)
    rho_xeps_list: tuple = (0.0,)
    delta_list: tuple = (1.0,)
    break_kind: str = "none"
    eta_list: tuple = (0.0, 0.45, 0.49, 0.5)
    alpha: float = 0.05
    gamma: float = 0.45
    reps: int = 1000
    base_seed: int = 12345
    detrend: str = "const"
    k_star_rule: str = "m+T/4"
    coint_innovation_var: float = 1.0
    n_S: int = 2
    hist_bins: int = 20
    crit_source: str = "auto"

    def __post_init__(self):
        if self.reps < 1:
            raise SpecError("reps must be at least 1")
        if self.break_kind not in BREAK_KINDS:
            raise SpecError(f"break_kind must be one of {BREAK_KINDS}")
        for rule in self.m_rule:
            if rule not in M_RULES:
                raise SpecError(f"m_rule entries must be one of {tuple(M_RULES)}, got {rule!r}")
        for eta in self.eta_list:
            if not 0.0 <= eta <= 0.5:
                raise SpecError(f"eta values must lie in [0, 1/2], got {eta}")
        if not self.eta_list:
            raise SpecError("eta_list is empty")
        _k_star_fraction(self.k_star_rule)

    def cells(self) -> list[Cell]:
        deltas = self.delta_list if self.break_kind == "slope" else (0.0,)
        out = []
        for T, rule, rx, re, rxe, d in itertools.product(self.t_list, self.m_rule, self.rho_x_list,
                                                           self.rho_eps_list, self.rho_xeps_list, deltas):
            out.append(Cell(T=int(T), m=int(T) // M_RULES[rule], rho_x=float(rx), rho_eps=float(re),
                            rho_xeps=float(rxe), delta=float(d), break_kind=self.break_kind))
        return out

    def k_star(self, cell: Cell) -> int:
        if cell.break_kind == "none":
            return cell.T
        frac = _k_star_fraction(self.k_star_rule)
        if frac is None:
            return cell.m + cell.T // 4
        return int(round(frac * cell.T))

    def quick(self) -> "ExperimentSpec":
        return replace(self, reps=min(self.reps, QUICK_REPS))


def _k_star_fraction(rule: str) -> float | None:
    if rule == "m+T/4":
        return None
    try:
        frac = float(rule)
    except ValueError:
        raise SpecError(f"k_star_rule must be 'm+T/4' or a fraction of T, got {rule!r}") from None
    if not 0.0 < frac < 1.0:
        raise SpecError("k_star_rule fraction must lie in (0, 1)")
    return frac


@dataclass
class EtaResult:
    eta: float
    crit: float
    reps: int
    rejections: int
    k_hats: list = field(default_factory=list)  # absolute detection times, detecting reps only
    delays: list = field(default_factory=list)
    hist_edges: list = field(default_factory=list)
    hist_counts: list = field(default_factory=list)

    @property
    def frequency(self) -> float:
        return self.rejections / self.reps if self.reps else float("nan")

    @property
    def mean_delay(self) -> float:
        return float(np.mean(self.delays)) if self.delays else float("nan")


@dataclass
class CellResult:
    cell: Cell
    cell_id: int
    k_star: int
    etas: list = field(default_factory=list)
    runtime: float = 0.0
    error: str | None = None


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    cells: list = field(default_factory=list)
    runtime: float = 0.0

    def cell(self, **params) -> CellResult:
        """The unique cell matching all given parameters."""
        hits = [c for c in self.cells if all(getattr(c.cell, k) == v for k, v in params.items())]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} cells match {params}")
        return hits[0]

    def frequency(self, eta: float, **params) -> float:
        return _eta_entry(self.cell(**params), eta).frequency

    def mean_delay(self, eta: float, **params) -> float:
        return _eta_entry(self.cell(**params), eta).mean_delay


def _eta_entry(cr: CellResult, eta: float) -> EtaResult:
    for er in cr.etas:
        if math.isclose(er.eta, eta):
            return er
    raise KeyError(f"eta={eta} not in cell {cr.cell_id}")


def _dgp_spec(spec: ExperimentSpec, cell: Cell, k_star: int) -> dgp.DgpSpec:
    if cell.break_kind == "slope":
        mode = dgp.SlopeBreak(cell.delta)
    elif cell.break_kind == "coint":
        mode = dgp.CointBreak(spec.coint_innovation_var)
    else:
        mode = dgp.NoBreak()
    return dgp.DgpSpec(T=cell.T, m=cell.m, rho_x=cell.rho_x, rho_eps=cell.rho_eps, rho_xeps=cell.rho_xeps,
                       break_mode=mode, k_star=k_star)


def replicate(spec: ExperimentSpec, cell: Cell, rep: int, crits: dict) -> list[tuple[bool, int]]:
    """One replication: ``(detected, k_hat)`` for each eta in ``spec.eta_list``."""
    cid = cell.cell_id
    k_star = spec.k_star(cell)
    sample = dgp.generate(_dgp_spec(spec, cell, k_star),
                          x_rng=generator(spec.base_seed, cid, rep, "dgp-x"),
                          e_rng=generator(spec.base_seed, cid, rep, "dgp-e"))
    cfg = monitor.MonitorConfig(m=cell.m, T_m=cell.T - cell.m, gamma=spec.gamma, alpha=spec.alpha,
                                n_S=spec.n_S, detrend=spec.detrend, seed=spec.base_seed, stream=(cid, rep))
    paths = monitor.session_paths(sample.y, sample.x, cfg)
    k = np.arange(1, cfg.T_m + 1)
    out = []
    for eta in spec.eta_list:
        nu = boundary.boundary_value(cell.m, k, crits[eta])
        hit = monitor.first_crossing(paths.d, nu)
        out.append((hit is not None, hit if hit is not None else cfg.T_m))
    return out


def _crits(spec: ExperimentSpec, m: int) -> dict:
    return {eta: boundary.critical_value(eta, spec.alpha, m=m, source=spec.crit_source) for eta in spec.eta_list}


def _run_block(args):
    spec, cell, reps = args
    crits = _crits(spec, cell.m)
    return [replicate(spec, cell, r, crits) for r in reps]


def _aggregate(spec: ExperimentSpec, cell: Cell, rows: list, runtime: float) -> CellResult:
    k_star = spec.k_star(cell)
    crits = _crits(spec, cell.m)
    res = CellResult(cell=cell, cell_id=cell.cell_id, k_star=k_star, runtime=runtime)
    edges = np.linspace(cell.m, cell.T, spec.hist_bins + 1)
    for j, eta in enumerate(spec.eta_list):
        times = [cell.m + row[j][1] for row in rows if row[j][0]]
        er = EtaResult(eta=float(eta), crit=float(crits[eta].value), reps=len(rows), rejections=len(times),
                       k_hats=times)
        if cell.break_kind != "none":
            er.delays = [monitor.detection_delay(t, k_star) for t in times]
        counts, _ = np.histogram(times, bins=edges)
        er.hist_edges = edges.tolist()
        er.hist_counts = counts.astype(int).tolist()
        res.etas.append(er)
    return res


def run_experiment(spec: ExperimentSpec, workers: int | None = None, chunk: int = 50) -> ExperimentResult:
    """Run every cell of ``spec``.

    ``workers`` > 1 distributes blocks of replications over processes; the
    numbers produced are the same as a serial run.  A configuration error in
    one cell is recorded on that cell and the others still run.
    """
    if workers is None:
        workers = int(os.environ.get("COINTMONITOR_WORKERS", "1"))
    t0 = time.perf_counter()
    result = ExperimentResult(spec=spec)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for cell in spec.cells():
            c0 = time.perf_counter()
            try:
                k_star = spec.k_star(cell)
                _dgp_spec(spec, cell, k_star)
                monitor.MonitorConfig(m=cell.m, T_m=cell.T - cell.m, gamma=spec.gamma, alpha=spec.alpha,
                                      n_S=spec.n_S, detrend=spec.detrend)
                blocks = [(spec, cell, range(a, min(a + chunk, spec.reps))) for a in range(0, spec.reps, chunk)]
                if pool is None:
                    parts = [_run_block(b) for b in blocks]
                else:
                    parts = list(pool.map(_run_block, blocks))
                rows = [row for part in parts for row in part]
                result.cells.append(_aggregate(spec, cell, rows, time.perf_counter() - c0))
            except (ValueError, ArithmeticError) as exc:
                log.error("cell %s failed: %s", cell, exc)
                result.cells.append(CellResult(cell=cell, cell_id=cell.cell_id, k_star=cell.T,
                                               runtime=time.perf_counter() - c0, error=str(exc)))
    finally:
        if pool is not None:
            pool.shutdown()
    result.runtime = time.perf_counter() - t0
    return result


# -- spec files -------------------------------------------------------------

_LIST_KEYS = {"t_list": int, "m_rule": str, "rho_x_list": float, "rho_eps_list": float,
              "rho_xeps_list": float, "delta_list": float, "eta_list": float}
_SCALAR_KEYS = {"name": str, "break_kind": str, "alpha": float, "gamma": float, "reps": int,
                "base_seed": int, "detrend": str, "k_star_rule": str, "coint_innovation_var": float,
                "n_S": int, "hist_bins": int, "crit_source": str}


def parse_spec(text: str) -> ExperimentSpec:
    """Parse the flat ``key = value`` format; lists are comma separated, ``#`` starts a comment."""
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _LIST_KEYS:
                kw[key] = tuple(_LIST_KEYS[key](v.strip()) for v in value.split(",") if v.strip())
            elif key in _SCALAR_KEYS:
                kw[key] = _SCALAR_KEYS[key](value)
            else:
                raise SpecError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"line {lineno}: bad value for {key!r}: {value!r}") from None
    return ExperimentSpec(**kw)


def load_spec(path) -> ExperimentSpec:
    return parse_spec(Path(path).read_text())


def bundled_spec(name: str) -> Path:
    from importlib import resources

    return Path(str(resources.files("cointmonitor") / "data" / "specs" / f"{name}.spec"))


# -- output -----------------------------------------------------------------

CSV_FIELDS = ["cell_id", "T", "m", "rho_x", "rho_eps", "rho_xeps", "delta", "break_kind", "k_star", "eta",
              "crit", "reps", "rejections", "frequency", "mean_delay", "runtime_s", "error"]


def _rows(result: ExperimentResult):
    for cr in result.cells:
        base = {"cell_id": cr.cell_id, **asdict(cr.cell), "k_star": cr.k_star, "runtime_s": round(cr.runtime, 4),
                "error": cr.error or ""}
        if cr.error:
            yield {**base, "eta": "", "crit": "", "reps": 0, "rejections": 0, "frequency": "", "mean_delay": ""}
            continue
        for er in cr.etas:
            yield {**base, "eta": repr(er.eta), "crit": repr(er.crit), "reps": er.reps, "rejections": er.rejections,
                   "frequency": repr(er.frequency), "mean_delay": repr(er.mean_delay)}


def summarize(result: ExperimentResult, out_dir, formats=("csv", "json")) -> list[Path]:
    """Write ``results.csv``, ``results.json`` and ``hist/*.csv`` under ``out_dir``."""
    out_dir = Path(out_dir)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if "csv" in formats:
            path = out_dir / "results.csv"
            with open(path, "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
                w.writeheader()
                w.writerows(_rows(result))
            written.append(path)
            hist_dir = out_dir / "hist"
            for cr in result.cells:
                for er in cr.etas:
                    hist_dir.mkdir(exist_ok=True)
                    path = hist_dir / f"cell{cr.cell_id}_eta{er.eta:g}.csv"
                    with open(path, "w", newline="") as fh:
                        w = csv.writer(fh)
                        w.writerow(["bin_lo", "bin_hi", "count"])
                        for lo, hi, n in zip(er.hist_edges[:-1], er.hist_edges[1:], er.hist_counts):
                            w.writerow([repr(lo), repr(hi), n])
                    written.append(path)
        if "json" in formats:
            path = out_dir / "results.json"
            path.write_text(json.dumps(to_dict(result), indent=1))
            written.append(path)
    except OSError as exc:
        raise OSError(f"could not write results to {exc.filename or out_dir}: {exc.strerror}") from exc
    return written


def to_dict(result: ExperimentResult) -> dict:
    return {"spec": asdict(result.spec), "runtime": result.runtime,
            "cells": [{"cell": asdict(cr.cell), "cell_id": cr.cell_id, "k_star": cr.k_star,
                       "runtime": cr.runtime, "error": cr.error,
                       "etas": [asdict(er) for er in cr.etas]} for cr in result.cells]}


def from_dict(data: dict) -> ExperimentResult:
    spec_kw = {}
    for f in fields(ExperimentSpec):
        v = data["spec"][f.name]
        spec_kw[f.name] = tuple(v) if isinstance(v, list) else v
    cells = [CellResult(cell=Cell(**c["cell"]), cell_id=c["cell_id"], k_star=c["k_star"], runtime=c["runtime"],
                        error=c["error"], etas=[EtaResult(**e) for e in c["etas"]]) for c in data["cells"]]
    return ExperimentResult(spec=ExperimentSpec(**spec_kw), cells=cells, runtime=data["runtime"])


def read_results(path) -> ExperimentResult:
    return from_dict(json.loads(Path(path).read_text()))


def read_results_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
