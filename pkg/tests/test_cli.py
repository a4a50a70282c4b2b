import subprocess
import sys

import pytest

from cointmonitor import boundary, cli, dgp, monitor


def run(*args):
    return cli.main([str(a) for a in args])


def test_no_break_exit_zero(tmp_path, capsys):
    assert run("generate", tmp_path / "n.csv", "--T", 250, "--m", 100, "--seed", 3) == 0
    assert run("monitor", tmp_path / "n.csv", "--m", 100) == 0
    out = capsys.readouterr().out
    assert "detected: no" in out and "k_hat: 150" in out


def test_break_exit_two_and_trace(tmp_path, capsys):
    run("generate", tmp_path / "b.csv", "--T", 400, "--m", 100, "--break", "slope", "--seed", 1)
    code = run("monitor", tmp_path / "b.csv", "--m", 100, "--k-star", 200, "--trace-out", tmp_path / "t.csv")
    assert code == cli.EXIT_DETECTED
    out = capsys.readouterr().out
    assert "detected: yes" in out and "delay:" in out
    assert (tmp_path / "t.csv").read_text().startswith("k,Q,")


def test_csv_round_trip_matches_in_process(tmp_path, capsys):
    spec = dgp.DgpSpec(T=300, m=100, break_mode=dgp.CointBreak(), k_star=150, seed=12)
    s = dgp.generate(spec)
    s.to_csv(tmp_path / "s.csv")
    cfg = monitor.MonitorConfig(m=100, T_m=200, detrend="const", seed=4)
    rep = monitor.run(s.y, s.x, cfg)
    code = run("monitor", tmp_path / "s.csv", "--m", 100, "--detrend", "const", "--seed", 4)
    assert code == (2 if rep.detected else 0)
    assert f"k_hat: {rep.k_hat}\n" in capsys.readouterr().out


def test_date_column_passthrough(tmp_path, capsys):
    s = dgp.generate(dgp.DgpSpec(T=200, m=80, break_mode=dgp.SlopeBreak(2.0), k_star=100, seed=2))
    lines = ["date,y,x1"] + [f"Q{i},{float(s.y[i])!r},{float(s.x[i, 0])!r}" for i in range(200)]
    (tmp_path / "d.csv").write_text("\n".join(lines) + "\n")
    assert run("monitor", tmp_path / "d.csv", "--m", 80) == 2
    out = capsys.readouterr().out
    t = int(out.split("detection_time: ")[1].split()[0])
    assert f"date: Q{t - 1}" in out


def test_named_regressor_columns(tmp_path, capsys):
    (tmp_path / "h.csv").write_text("when,price,rent\n" + "".join(f"t{i},{i + (i % 3)},{i}\n" for i in range(1, 60)))
    code = run("monitor", tmp_path / "h.csv", "--m", 30, "--y-col", "price", "--x-cols", "rent",
               "--date-col", "when", "--detrend", "const+trend")
    assert code in (0, 2)


@pytest.mark.parametrize("body,msg", [
    ("y,x1\n1,2\n3,abc\n", "line 3"),
    ("y,x1\n1,2\n3\n", "line 3"),
    ("y,x1\n1,2\n,4\n", "line 3"),
    ("z,x1\n1,2\n", "'y'"),
])
def test_malformed_csv(tmp_path, capsys, body, msg):
    (tmp_path / "bad.csv").write_text(body)
    assert run("monitor", tmp_path / "bad.csv", "--m", 1) == 1
    assert msg in capsys.readouterr().err


def test_m_too_large(tmp_path, capsys):
    run("generate", tmp_path / "n.csv", "--T", 50, "--m", 20)
    assert run("monitor", tmp_path / "n.csv", "--m", 50) == 1
    assert "smaller than the number of rows" in capsys.readouterr().err


def test_usage_error_exit_one(capsys):
    with pytest.raises(SystemExit) as exc:
        run("monitor")
    assert exc.value.code == 1


def test_simulate_missing_spec(tmp_path, capsys):
    assert run("simulate", tmp_path / "nope.spec", tmp_path / "out") == 1
    assert "not found" in capsys.readouterr().err


def test_simulate_bad_key(tmp_path, capsys):
    (tmp_path / "s.spec").write_text("reps = 2\nwibble = 3\n")
    assert run("simulate", tmp_path / "s.spec", tmp_path / "out") == 1
    assert "wibble" in capsys.readouterr().err


def test_simulate_writes_results(tmp_path):
    (tmp_path / "s.spec").write_text("t_list = 100\nm_rule = T/2\neta_list = 0, 0.45\nreps = 1000\n")
    assert run("simulate", tmp_path / "s.spec", tmp_path / "out", "--reps", 4) == 0
    assert len((tmp_path / "out" / "results.csv").read_text().splitlines()) == 3
    assert (tmp_path / "out" / "results.json").exists()


def test_simulate_quick_caps_reps(tmp_path):
    (tmp_path / "s.spec").write_text("t_list = 100\nm_rule = T/2\neta_list = 0.45\nreps = 1000\n")
    import json

    run("simulate", tmp_path / "s.spec", tmp_path / "out", "--quick")
    res = json.loads((tmp_path / "out" / "results.json").read_text())
    assert res["spec"]["reps"] == 200


def test_critvals_rows_and_repeatability(tmp_path, capsys):
    args = ["critvals", "--eta", "0,0.45,0.49", "--alpha", "0.05", "--paths", 10_000, "--grid", 1000,
            "--out", tmp_path / "c.csv", "--replace"]
    assert run(*args) == 0
    first = (tmp_path / "c.csv").read_bytes()
    assert len(boundary.read_table(tmp_path / "c.csv")) == 3
    boundary._sup_cache.clear()
    run(*args)
    assert (tmp_path / "c.csv").read_bytes() == first


def test_critvals_rejects_half(tmp_path, capsys):
    assert run("critvals", "--eta", "0.5", "--out", tmp_path / "c.csv") == 1
    assert "Gumbel" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "cointmonitor.cli", "critvals", "--eta", "0.5"],
                       capture_output=True, text=True)
    assert r.returncode == 1 and r.stdout == ""
