"""Commercial radar AEB: activation gate and the staged, latching braking FSM."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from ..risk import KMH, RiskParams, RiskSnapshot, stage_level
from .commands import IDLE, AebCommand, Source

TTC_TRIGGER = 1.5


@dataclass(frozen=True)
class ActivationParams:
    min_target_lateral_speed: float = 2.0
    min_angle: float = math.radians(45)
    max_angle: float = math.radians(135)
    ego_speed_min: float = 5 * KMH
    ego_speed_max: float = 60 * KMH


def activation_check(ego_speed: float, target_velocity_ego: tuple[float, float],
                     params: ActivationParams = ActivationParams()) -> bool:
    """Crossing-target gate.

    ``target_velocity_ego`` is the target's velocity in the ego frame
    (x forward, y left). The crossing angle is the unsigned angle between
    the two velocity vectors.
    """
    vx, vy = target_velocity_ego
    if abs(vy) <= params.min_target_lateral_speed:
        return False
    angle = math.atan2(abs(vy), vx)
    if not params.min_angle < angle < params.max_angle:
        return False
    tol = 1e-9
    return params.ego_speed_min - tol <= ego_speed <= params.ego_speed_max + tol


class FsmState(str, enum.Enum):
    IDLE = "idle"
    FIRST_PHASE = "first_phase"
    STEADY = "steady"
    LATCHED = "latched"


@dataclass
class CommercialFsm:
    """Velocity-dependent staged braking, triggered by TTC below 1.5 s.

    After triggering, a request is produced every tick until the ego stops;
    the stage follows the current speed, and each entry into the middle stage
    starts with ``first_phase`` seconds of Level A. Once the vehicle has
    stopped the FSM stays LATCHED and issues nothing further.
    """

    params: RiskParams = field(default_factory=RiskParams)
    ttc_trigger: float = TTC_TRIGGER
    source: Source = Source.TTC
    state: FsmState = FsmState.IDLE
    level: float | None = None
    _b_ticks: int | None = None

    @property
    def triggered(self) -> bool:
        return self.state in (FsmState.FIRST_PHASE, FsmState.STEADY)

    def should_trigger(self, risk: RiskSnapshot, active: bool) -> bool:
        return active and risk.ttc is not None and risk.ttc < self.ttc_trigger

    def step(self, risk: RiskSnapshot, ego_speed: float, dt: float, active: bool = True,
             stopped: bool = False) -> AebCommand:
        if self.state is FsmState.LATCHED:
            return IDLE
        if self.state is FsmState.IDLE:
            if not self.should_trigger(risk, active):
                return IDLE
            warning = True
        else:
            warning = False
        if stopped:
            self.state = FsmState.LATCHED
            self.level = None
            return IDLE
        return self._staged(ego_speed, dt, warning)

    def _staged(self, ego_speed, dt, warning, clamp=None) -> AebCommand:
        p = self.params
        if p.v_b < ego_speed <= p.v_a:
            self._b_ticks = 0 if self._b_ticks is None else self._b_ticks + 1
            first = self._b_ticks < round(p.first_phase / dt)
            elapsed = 0.0 if first else p.first_phase
            self.state = FsmState.FIRST_PHASE if first else FsmState.STEADY
        else:
            elapsed = None
            self.state = FsmState.STEADY
        level = stage_level(ego_speed, elapsed, p)
        if clamp is not None:
            level = max(level, -clamp)
        self.level = level
        return AebCommand(level, warning, self.source)


def commercial_step(fsm: CommercialFsm, risk: RiskSnapshot, ego_speed: float, dt: float,
                    active: bool = True, stopped: bool = False) -> AebCommand:
    return fsm.step(risk, ego_speed, dt, active, stopped)
