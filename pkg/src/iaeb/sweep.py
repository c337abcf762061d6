"""Velocity-grid sweeps and their CSV outputs."""

from __future__ import annotations

import csv
import hashlib
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .scenario import Scenario
from .sim import RunOutcome, run

DEFAULT_GRID = "5:60:5"


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma list, in km/h."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step))
            values = [start + i * step for i in range(n + 1)]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ValueError(f"bad grid {text!r}; expected start:stop:step or a comma list") from None
    if not values:
        raise ValueError("empty grid")
    return values


def cell_seed(base_seed: int, ego_kmh: float, target_kmh: float) -> int:
    key = f"{base_seed}:{ego_kmh!r}:{target_kmh!r}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


@dataclass
class CellResult:
    ego_kmh: float
    target_kmh: float
    seed: int
    outcome: RunOutcome | None = None
    error: str | None = None

    @property
    def code(self) -> str:
        if self.outcome is None:
            return "E"
        return "1" if self.outcome.collided else "0"


@dataclass
class GridResult:
    ego_speeds: list[float]
    target_speeds: list[float]
    cells: dict = field(default_factory=dict)  # (ego_kmh, target_kmh) -> CellResult

    def cell(self, ego_kmh, target_kmh) -> CellResult:
        return self.cells[(ego_kmh, target_kmh)]

    @property
    def collided(self) -> set:
        return {k for k, c in self.cells.items() if c.outcome is not None and c.outcome.collided}

    @property
    def failed(self) -> set:
        return {k for k, c in self.cells.items() if c.outcome is None}

    def matrix_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ego\\target", *(_fmt(t) for t in self.target_speeds)])
        for e in self.ego_speeds:
            w.writerow([_fmt(e), *(self.cell(e, t).code for t in self.target_speeds)])
        return buf.getvalue()

    def cells_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ego_kmh", "target_kmh", "seed", "collided", "impact_speed",
                    "braking_onset_distance", "stop_margin", "peak_decel", "trigger_source",
                    "end_reason", "error"])
        for e in self.ego_speeds:
            for t in self.target_speeds:
                c = self.cell(e, t)
                o = c.outcome
                if o is None:
                    w.writerow([_fmt(e), _fmt(t), c.seed, "", "", "", "", "", "", "", c.error])
                    continue
                w.writerow([_fmt(e), _fmt(t), c.seed, int(o.collided), _num(o.impact_speed),
                            _num(o.braking_onset_distance), _num(o.stop_margin), _num(o.peak_decel),
                            o.trigger_source or "", o.end_reason, ""])
        return buf.getvalue()

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        m, c = out / "matrix.csv", out / "cells.csv"
        m.write_text(self.matrix_csv())
        c.write_text(self.cells_csv())
        return m, c


def _num(x) -> str:
    return "" if x is None else f"{x:.6f}"


def cell_scenario(base: Scenario, ego_kmh: float, target_kmh: float) -> Scenario:
    return base.with_updates(**{"ego.speed_kmh": ego_kmh, "target.speed_kmh": target_kmh,
                                "seed": cell_seed(base.seed, ego_kmh, target_kmh)})


def run_cell(base: Scenario, ego_kmh: float, target_kmh: float) -> CellResult:
    sc = cell_scenario(base, ego_kmh, target_kmh)
    try:
        return CellResult(ego_kmh, target_kmh, sc.seed, run(sc))
    except Exception as err:  # a failed cell must not stop the sweep
        return CellResult(ego_kmh, target_kmh, sc.seed, error=f"{type(err).__name__}: {err}")


def sweep(base: Scenario, ego_speeds, target_speeds=None, workers: int = 1,
          out_dir=None, order=None) -> GridResult:
    """Run every (ego, target) cell; results are independent of execution order.

    ``order`` optionally permutes the cell list (used to check independence).
    """
    target_speeds = list(ego_speeds if target_speeds is None else target_speeds)
    grid = GridResult(list(ego_speeds), target_speeds)
    keys = [(e, t) for e in grid.ego_speeds for t in target_speeds]
    if order is not None:
        keys = [keys[i] for i in order]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(run_cell, base, e, t) for e, t in keys]
            results = [f.result() for f in futures]
    else:
        results = [run_cell(base, e, t) for e, t in keys]
    for r in results:
        grid.cells[(r.ego_kmh, r.target_kmh)] = r
    if out_dir is not None:
        grid.write(out_dir)
    return grid
