"""Replay a trace file into outcome metrics and plot-ready series."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .controllers import NO_REQUEST


@dataclass
class ExpFit:
    """Log-linear fit of the exponential-profile requests before the cap."""

    alpha: float
    amplitude: float
    r_squared: float
    samples: int


@dataclass
class TraceSummary:
    collided: bool = False
    impact_speed: float = 0.0
    braking_onset_distance: float | None = None
    stop_margin: float | None = None
    peak_decel: float = 0.0
    trigger_source: str | None = None
    truncated: bool = False
    records: int = 0
    exp_fit: ExpFit | None = None
    series_paths: list = field(default_factory=list)

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["exp_fit"] = None if self.exp_fit is None else self.exp_fit.__dict__
        d["series_paths"] = [str(p) for p in self.series_paths]
        return d


def read_trace(path) -> tuple[list[dict], dict | None, bool]:
    """Return (tick records, end record, truncated)."""
    records, end = [], None
    truncated = False
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                truncated = True  # a half-written last line
                break
            if "end" in rec:
                end = rec["end"]
            else:
                records.append(rec)
    return records, end, truncated or end is None


def fit_exponential(requests: list[tuple[float, float]]) -> ExpFit | None:
    """Fit log(-a) = log(-A) + alpha t over the rising part of the profile."""
    # a pure exponential has a constant tick-to-tick ratio; the cap or a
    # re-plan breaks it and ends the segment
    pts = list(requests[:2])
    if len(pts) == 2:
        ratio = pts[1][1] / pts[0][1]
        if ratio <= 1.0:
            pts = pts[:1]
        for t, a in requests[2:]:
            if len(pts) < 2 or abs(a / pts[-1][1] - ratio) > 1e-6 * ratio:
                break
            pts.append((t, a))
    if len(pts) < 3:
        return None
    t = np.array([p[0] for p in pts])
    y = np.log(-np.array([p[1] for p in pts]))
    slope, icpt = np.polyfit(t - t[0], y, 1)
    resid = y - (icpt + slope * (t - t[0]))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return ExpFit(float(slope), -math.exp(icpt), r2, len(pts))


def summarize(trace_path, out_dir=None) -> TraceSummary:
    records, end, truncated = read_trace(trace_path)
    s = TraceSummary(truncated=truncated, records=len(records))
    exp_requests = []
    for rec in records:
        s.peak_decel = max(s.peak_decel, -rec["ego"]["accel"])
        for ev in rec["events"]:
            kind = ev["kind"]
            if kind == "AebTriggered" and s.braking_onset_distance is None:
                s.braking_onset_distance = ev["dist_to_conflict"]
                s.trigger_source = ev["source"]
            elif kind == "Collision":
                s.collided = True
                s.impact_speed = ev["impact_speed"]
            elif kind == "FullStop":
                s.stop_margin = ev["stop_margin"]
        req = rec.get("connected_request")
        if req is not None and rec["source"] == "exp_profile":
            exp_requests.append((rec["t"], req))
    if exp_requests:
        s.exp_fit = fit_exponential(exp_requests)
    if out_dir is not None:
        s.series_paths = write_series(records, out_dir, Path(trace_path).stem)
    return s


def write_series(records, out_dir, stem="trace") -> list[Path]:
    """Two columnar files: request vs actual deceleration, and speed vs distance."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p1 = out / f"{stem}_decel.csv"
    p2 = out / f"{stem}_speed_distance.csv"
    with open(p1, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "decel_request", "actual_accel"])
        for r in records:
            req = r["decel_request"]
            w.writerow([r["t"], "" if req == NO_REQUEST else req, r["ego"]["accel"]])
    with open(p2, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dist_to_conflict", "ego_speed"])
        for r in records:
            w.writerow([r["dist_to_conflict"], r["ego"]["speed"]])
    return [p1, p2]
