"""Connected add-on: TTC trigger or braking-distance trigger on V2X data.

The staged braking scheme is left as in the commercial logic except that
every level is clamped to the friction limit served by the active map.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..dynamics import G, BrakeActuator
from ..risk import RiskParams, RiskSnapshot, braking_distance_staged
from .commands import IDLE, AebCommand, Source
from .commercial import CommercialFsm, FsmState


@dataclass
class TypeAController:
    params: RiskParams = field(default_factory=RiskParams)
    actuator: BrakeActuator = field(default_factory=BrakeActuator)
    # TTC threshold applied to the connected track
    ttc_trigger: float = 2.0
    fsm: CommercialFsm = None
    trigger_source: Source | None = None
    mu_map: float | None = None  # friction latched at trigger time

    def __post_init__(self):
        if self.fsm is None:
            self.fsm = CommercialFsm(self.params)

    @property
    def triggered(self) -> bool:
        return self.fsm.triggered

    def braking_distance(self, ego_speed: float, mu_map: float) -> float:
        return braking_distance_staged(ego_speed, mu_map, self.params, self.actuator)

    def check_trigger(self, risk: RiskSnapshot, mu_map: float, ego_speed: float) -> Source | None:
        if risk.ttc is None:
            return None
        if risk.ttc < self.ttc_trigger:
            return Source.TTC
        bd = risk.braking_distance
        if bd is None:
            bd = self.braking_distance(ego_speed, mu_map)
        if bd >= risk.dist_to_conflict - self.params.bd_margin:
            return Source.BRAKING_DISTANCE
        return None

    def step(self, risk: RiskSnapshot | None, mu_map: float | None, ego_speed: float, dt: float,
             active: bool = True, stopped: bool = False) -> AebCommand:
        fsm = self.fsm
        if fsm.state is FsmState.LATCHED:
            return IDLE
        warning = False
        if fsm.state is FsmState.IDLE:
            if risk is None or mu_map is None or not active:
                return IDLE
            src = self.check_trigger(risk, mu_map, ego_speed)
            if src is None:
                return IDLE
            self.trigger_source = fsm.source = src
            self.mu_map = mu_map
            warning = True
        if stopped:
            fsm.state = FsmState.LATCHED
            return IDLE
        return fsm._staged(ego_speed, dt, warning, clamp=self.mu_map * G)


def type_a_step(ctrl: TypeAController, risk, mu_map, ego_speed, dt, active=True, stopped=False):
    return ctrl.step(risk, mu_map, ego_speed, dt, active, stopped)
