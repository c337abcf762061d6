import json

import pytest

from iaeb import cli

SCEN = "ego: {speed_kmh: 60}\ntarget: {speed_kmh: 60}\ncontroller: radar\ngeometry: {field: obstructed}\n"


@pytest.fixture
def scen(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text(SCEN)
    return p


def test_simulate_writes_trace_and_outcome(scen, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["simulate", str(scen), "--out-dir", str(out)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["collided"] is True
    assert (out / "s.jsonl").is_file() and (out / "s_outcome.json").is_file()


def test_global_overrides_apply(scen, tmp_path, capsys):
    rc = cli.main(["--controller", "type_a", "simulate", str(scen), "--out-dir", str(tmp_path),
                   "--mu-real", "0.4", "--mu-map", "0.4", "--latency-ms", "5", "--seed", "3", "--no-trace"])
    assert rc == 0
    o = json.loads(capsys.readouterr().out)
    assert o["collided"] is False and o["trigger_source"] == "braking_distance"


def test_sweep_and_summarize(scen, tmp_path, capsys):
    out = tmp_path / "sw"
    assert cli.main(["sweep", str(scen), "--grid", "50,60", "--out-dir", str(out)]) == 0
    assert (out / "matrix.csv").read_text().splitlines()[0] == "ego\\target,50,60"
    capsys.readouterr()
    cli.main(["simulate", str(scen), "--out-dir", str(out)])
    capsys.readouterr()
    assert cli.main(["summarize", str(out / "s.jsonl"), "--out-dir", str(out)]) == 0
    s = json.loads(capsys.readouterr().out)
    assert s["collided"] is True and len(s["series_paths"]) == 2


def test_usage_and_config_errors_exit_one(scen, tmp_path):
    with pytest.raises(SystemExit) as e:
        cli.main(["bogus"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        cli.main(["sweep", str(scen), "--grid", "x"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        cli.main(["summarize", str(tmp_path / "missing.jsonl")])
    assert e.value.code == 1
    bad = tmp_path / "bad.yaml"
    bad.write_text(SCEN + "friction: {mu_real: -0.1}\n")
    assert cli.main(["simulate", str(bad), "--out-dir", str(tmp_path)]) == 1
    assert cli.main(["simulate", str(tmp_path / "absent.yaml")]) == 1


def test_run_failures_exit_two(scen, tmp_path, monkeypatch):
    from iaeb.sim import SimulationError

    def broken(*a, **k):
        raise SimulationError("non-finite state")

    monkeypatch.setattr(cli, "run", broken)
    assert cli.main(["simulate", str(scen), "--out-dir", str(tmp_path)]) == 2

    import iaeb.sweep as sw
    monkeypatch.setattr(sw, "run", broken)
    assert cli.main(["sweep", str(scen), "--grid", "60", "--out-dir", str(tmp_path)]) == 2
