"""Literature braking logics used as comparison baselines.

Each stateless ``*_step`` maps risk inputs to a request. ``HoldingBaseline``
wraps one of them for closed-loop use: once it has asked for braking it
keeps the deepest request seen so far until the ego stops.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..risk import KMH, last_points
from .commands import IDLE, AebCommand, Source


def baseline_cho_step(ttc: float | None) -> AebCommand:
    if ttc is None or ttc > 2.0:
        return IDLE
    if ttc > 1.6:
        return AebCommand(-3.0, True, Source.TTC)
    if ttc > 0.7:
        return AebCommand(-6.0, True, Source.TTC)
    return AebCommand(-10.0, True, Source.TTC)


@dataclass(frozen=True)
class KapseParams:
    dec_a: float = 3.0
    dec_b: float = 6.0
    dec_max: float = 9.0

    def __post_init__(self):
        if not 0 < self.dec_a < self.dec_b < self.dec_max:
            raise ValueError("need 0 < dec_a < dec_b < dec_max")


def baseline_kapse_step(ttc: float | None, v_ego: float, params: KapseParams = KapseParams()) -> AebCommand:
    """Cascade of two partial stages and one full stage.

    Thresholds are braking times v / dec, so t_a > t_b > t_max; the stage
    deepens each time TTC drops below the next (smaller) threshold.
    """
    if ttc is None or v_ego <= 0:
        return IDLE
    if ttc < v_ego / params.dec_max:
        return AebCommand(-params.dec_max, True, Source.TTC)
    if ttc < v_ego / params.dec_b:
        return AebCommand(-params.dec_b, True, Source.TTC)
    if ttc < v_ego / params.dec_a:
        return AebCommand(-params.dec_a, True, Source.TTC)
    return IDLE


@dataclass(frozen=True)
class KimParams:
    region_speed: float = 40 * KMH  # boundary between the LOW and HIGH regions
    full_brake: float = -10.0
    pre_brake: float = -4.0


def baseline_kim_step(ttc: float | None, t_lpb: float, t_lps: float, high_region: bool,
                      params: KimParams = KimParams()) -> AebCommand:
    """Velocity-region table: full brake below LPB at low speed; at high
    speed, pre-brake between LPS and LPB and full brake below LPS."""
    if ttc is None:
        return IDLE
    if not high_region:
        return AebCommand(params.full_brake, True, Source.TTC) if ttc < t_lpb else IDLE
    if ttc < t_lps:
        return AebCommand(params.full_brake, True, Source.TTC)
    if ttc < t_lpb:
        return AebCommand(params.pre_brake, True, Source.TTC)
    return IDLE


def kim_from_risk(ttc, ego_speed, mu, s_y, params: KimParams = KimParams()) -> AebCommand:
    # closing speed along the ego path stands in for the relative speed
    lp = last_points(-ego_speed, s_y, mu)
    return baseline_kim_step(ttc, lp.t_lpb, lp.t_lps, ego_speed > params.region_speed, params)


@dataclass
class HoldingBaseline:
    logic: Callable[..., AebCommand]
    held: AebCommand = field(default=IDLE)
    stopped: bool = False

    @property
    def triggered(self) -> bool:
        return self.held.active and not self.stopped

    def step(self, *args, active=True, stopped=False) -> AebCommand:
        if self.stopped:
            return IDLE
        if self.held.active and stopped:
            self.stopped = True
            return IDLE
        cmd = self.logic(*args) if active else IDLE
        first = cmd.active and not self.held.active
        if cmd.active and (not self.held.active or cmd.decel_request < self.held.decel_request):
            self.held = AebCommand(cmd.decel_request, False, cmd.source)
        if not self.held.active:
            return IDLE
        return AebCommand(self.held.decel_request, first, self.held.source)
