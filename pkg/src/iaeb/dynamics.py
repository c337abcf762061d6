"""Longitudinal vehicle dynamics: brake actuator lag and friction-limited braking."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

G = 9.81
MU_MAX = 1.2


@dataclass
class VehicleState:
    """Planar pose plus longitudinal motion of one vehicle.

    ``pos`` is the footprint centre. ``accel`` is the signed longitudinal
    acceleration (negative while braking).
    """

    pos: tuple[float, float]
    heading: float
    speed: float
    accel: float = 0.0
    length: float = 4.5
    width: float = 1.8
    actuated: bool = False

    def __post_init__(self):
        if self.length <= 0 or self.width <= 0:
            raise ValueError("vehicle length and width must be positive")
        if self.speed < 0:
            raise ValueError("speed must be non-negative")

    @property
    def direction(self) -> tuple[float, float]:
        return math.cos(self.heading), math.sin(self.heading)

    @property
    def nose(self) -> tuple[float, float]:
        """Front bumper centre, the reference point for all risk geometry."""
        ux, uy = self.direction
        h = 0.5 * self.length
        return self.pos[0] + h * ux, self.pos[1] + h * uy

    @property
    def velocity(self) -> tuple[float, float]:
        ux, uy = self.direction
        return self.speed * ux, self.speed * uy


@dataclass
class BrakeActuator:
    tau_act: float = 0.15
    a_brake_max: float = 11.0
    pedal: float = 0.0
    # first-order filtered pedal; the hardware state carried between ticks
    lagged: float = 0.0

    def __post_init__(self):
        if self.tau_act < 0:
            raise ValueError("tau_act must be >= 0")
        if self.a_brake_max <= 0:
            raise ValueError("a_brake_max must be > 0")
        if not 0.0 <= self.pedal <= 1.0:
            raise ValueError("pedal must lie in [0, 1]")

    def advance(self, dt: float) -> float:
        """Move the lag one step toward ``pedal`` and return the lagged value."""
        if self.tau_act == 0:
            self.lagged = self.pedal
        else:
            self.lagged += (self.pedal - self.lagged) * -math.expm1(-dt / self.tau_act)
        return self.lagged

    def reset(self):
        self.pedal = 0.0
        self.lagged = 0.0


@dataclass(frozen=True)
class FrictionField:
    mu_real: float
    mu_map: float | None = None
    g: float = G

    def __post_init__(self):
        for name in ("mu_real", "mu_map"):
            mu = getattr(self, name)
            if mu is not None and not 0 < mu <= MU_MAX:
                raise ValueError(f"{name} must lie in (0, {MU_MAX}], got {mu}")

    @property
    def map_value(self) -> float:
        return self.mu_real if self.mu_map is None else self.mu_map

    @property
    def limit(self) -> float:
        return self.mu_real * self.g


def achievable_decel(lagged_pedal: float, actuator: BrakeActuator, mu: float, g: float = G) -> float:
    return min(lagged_pedal * actuator.a_brake_max, mu * g)


def apply_brake(state: VehicleState, actuator: BrakeActuator, mu_real: float, dt: float) -> VehicleState:
    """Advance ``state`` by one tick of friction-limited braking.

    The actuator's lag state is advanced in place; a new VehicleState is
    returned. Speed is integrated before position (semi-implicit Euler).
    """
    decel = achievable_decel(actuator.advance(dt), actuator, mu_real)
    speed = state.speed - decel * dt
    if speed <= 0.0:
        speed = 0.0
    ux, uy = state.direction
    pos = (state.pos[0] + speed * dt * ux, state.pos[1] + speed * dt * uy)
    accel = -decel if state.speed > 0.0 else 0.0
    return replace(state, pos=pos, speed=speed, accel=accel)
