import pytest

from iaeb.sim import run
from iaeb.summary import fit_exponential, read_trace, summarize


def test_type_a_summary_reports_onset(scenario_factory, tmp_path):
    p = tmp_path / "a.jsonl"
    run(scenario_factory(controller="type_a", geometry__field="obstructed"), p)
    s = summarize(p, tmp_path)
    assert s.braking_onset_distance == pytest.approx(34, abs=5)
    assert not s.truncated and not s.collided and s.trigger_source == "ttc"
    decel, sd = s.series_paths
    head = decel.read_text().splitlines()
    assert head[0] == "t,decel_request,actual_accel" and len(head) == s.records + 1
    assert sd.read_text().splitlines()[0] == "dist_to_conflict,ego_speed"


def test_no_trigger_summary(scenario_factory, tmp_path):
    p = tmp_path / "n.jsonl"
    run(scenario_factory(30, 0, target__start=(-3.5, 20.0), target__heading_deg=90.0, timeout=1.0), p)
    s = summarize(p)
    assert s.braking_onset_distance is None and s.peak_decel == 0.0 and s.exp_fit is None


def test_type_b_summary_exponential_fit(scenario_factory, tmp_path):
    p = tmp_path / "b.jsonl"
    run(scenario_factory(controller="type_b", geometry__field="obstructed", friction__mu_real=0.4), p)
    s = summarize(p)
    assert s.exp_fit is not None and s.exp_fit.r_squared >= 0.999 and s.exp_fit.alpha > 0


def test_truncated_trace_gives_partial_summary(scenario_factory, tmp_path):
    p = tmp_path / "t.jsonl"
    run(scenario_factory(controller="radar", geometry__field="obstructed"), p)
    lines = p.read_text().splitlines(keepends=True)
    cut = tmp_path / "cut.jsonl"
    cut.write_text("".join(lines[:5000]) + lines[5000][:20])
    recs, end, truncated = read_trace(cut)
    assert truncated and end is None and len(recs) == 5000
    s = summarize(cut)
    assert s.truncated and s.records == 5000


def test_fit_stops_at_cap_or_jump():
    pts = [(k * 0.001, -1.0 * 1.001 ** k) for k in range(100)] + [(0.1 + k * 0.001, -3.0) for k in range(5)]
    f = fit_exponential(pts)
    assert f.samples == 100 and f.r_squared == pytest.approx(1.0)
    assert fit_exponential([(0.0, -1.0), (0.001, -1.0)]) is None
