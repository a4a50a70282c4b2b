import json

import numpy as np
import pytest

from cointmonitor import harness


def small(**kw):
    base = dict(t_list=(100,), m_rule=("T/2",), eta_list=(0.0, 0.45, 0.5), reps=12, base_seed=7)
    base.update(kw)
    return harness.ExperimentSpec(**base)


def test_serial_and_parallel_identical():
    spec = small(break_kind="slope", delta_list=(1.0,), reps=20)
    a = harness.run_experiment(spec, workers=1, chunk=5)
    b = harness.run_experiment(spec, workers=2, chunk=3)
    for ca, cb in zip(a.cells, b.cells):
        for ea, eb in zip(ca.etas, cb.etas):
            assert ea.k_hats == eb.k_hats and ea.rejections == eb.rejections


def test_result_invariants():
    spec = small(break_kind="coint", rho_x_list=(0.0, 0.5))
    res = harness.run_experiment(spec)
    assert len(res.cells) == 2
    for cr in res.cells:
        assert cr.k_star == cr.cell.m + cr.cell.T // 4
        for er in cr.etas:
            assert 0.0 <= er.frequency <= 1.0
            assert sum(er.hist_counts) == er.rejections == len(er.delays)


def test_cell_ids_stable_and_distinct():
    cells = small(rho_x_list=(0.0, 0.5), rho_xeps_list=(0.0, 0.5)).cells()
    ids = [c.cell_id for c in cells]
    assert len(set(ids)) == 4
    assert ids == [c.cell_id for c in small(rho_x_list=(0.0, 0.5), rho_xeps_list=(0.0, 0.5)).cells()]


def test_cell_error_is_isolated():
    # m = T/4 = 10 is too short for the eta = 1/2 critical value; T=200 is fine
    spec = small(t_list=(40, 200), m_rule=("T/4",), reps=3)
    res = harness.run_experiment(spec)
    bad, good = res.cells
    assert bad.error and not bad.etas
    assert good.error is None and len(good.etas) == 3


def test_k_star_fraction_rule():
    spec = small(break_kind="coint", k_star_rule="0.6")
    assert spec.k_star(spec.cells()[0]) == 60
    assert small().k_star(small().cells()[0]) == 100


def test_summarize_empty_result(tmp_path):
    res = harness.ExperimentResult(spec=small())
    harness.summarize(res, tmp_path)
    assert (tmp_path / "results.csv").read_text().strip() == ",".join(harness.CSV_FIELDS)


def test_summarize_rows_and_round_trip(tmp_path):
    res = harness.run_experiment(small(break_kind="slope", delta_list=(1.0,)))
    harness.summarize(res, tmp_path)
    rows = harness.read_results_csv(tmp_path / "results.csv")
    assert len(rows) == 3
    assert [float(r["eta"]) for r in rows] == [0.0, 0.45, 0.5]
    back = harness.read_results(tmp_path / "results.json")
    assert back.spec == res.spec
    for ca, cb in zip(res.cells, back.cells):
        assert ca.cell == cb.cell and ca.k_star == cb.k_star
        for ea, eb in zip(ca.etas, cb.etas):
            assert ea.frequency == eb.frequency and ea.crit == eb.crit
            assert ea.delays == eb.delays and ea.hist_counts == eb.hist_counts
            assert float(rows[ca.etas.index(ea)]["frequency"]) == ea.frequency
    hist = sorted((tmp_path / "hist").iterdir())
    assert len(hist) == 3


def test_summarize_io_error_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        harness.summarize(harness.ExperimentResult(spec=small()), blocker / "sub")


def test_parse_spec_and_errors():
    spec = harness.parse_spec("""
        # comment
        name = demo
        t_list = 100, 200   # trailing comment
        m_rule = T/4
        eta_list = 0.45
        reps = 5
    """)
    assert spec.t_list == (100, 200) and spec.reps == 5 and spec.name == "demo"
    with pytest.raises(harness.SpecError, match="bogus"):
        harness.parse_spec("bogus = 1")
    with pytest.raises(harness.SpecError, match="reps"):
        harness.parse_spec("reps = many")
    with pytest.raises(harness.SpecError):
        harness.parse_spec("m_rule = T/3")


@pytest.mark.parametrize("name", ["table1_panelA", "table1_panelB", "table1_panelC", "table2_panelA",
                                  "table3_panelA", "figures_slope", "figures_coint"])
def test_bundled_specs_parse(name):
    spec = harness.load_spec(harness.bundled_spec(name))
    assert spec.reps == 1000 and spec.quick().reps == harness.QUICK_REPS
    assert spec.cells()


def test_cell_lookup_helpers():
    res = harness.run_experiment(small(rho_x_list=(0.0, 0.5)))
    f = res.frequency(0.45, rho_x=0.5)
    assert f == res.cell(rho_x=0.5).etas[1].frequency
    assert np.isnan(res.mean_delay(0.45, rho_x=0.5))
    with pytest.raises(KeyError):
        res.cell(T=100)
