"""Deceleration tracking: discrete PI with clamped integrator, plus feedforward."""

from __future__ import annotations

from dataclasses import dataclass


def sat(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


@dataclass
class PiState:
    """Backward-Euler PI on the acceleration error with an anti-windup clamp.

    The error is mapped so that a larger braking demand gives a larger
    pedal: ``delta = a_actual - a_desired`` (both accelerations are negative
    while braking).
    """

    p_gain: float = 0.001
    i_gain: float = 0.001
    ts: float = 0.001
    lower: float = 0.0
    upper: float = 1.0
    integrator: float = 0.0
    error: float = 0.0
    u: float = 0.0

    def reset(self):
        self.integrator = self.error = self.u = 0.0


def pi_accel_step(pi: PiState, a_desired: float, a_actual: float) -> float:
    pi.error = a_actual - a_desired
    pi.integrator = sat(pi.integrator + pi.i_gain * pi.ts * pi.error, pi.lower, pi.upper)
    pi.u = sat(pi.p_gain * pi.error + pi.integrator, pi.lower, pi.upper)
    return pi.u


@dataclass
class AccelerationController:
    """Turns a deceleration request into a brake pedal value.

    Static feedforward (request over hardware maximum) plus the PI trim. Runs
    only while an AEB request is present; otherwise it resets and outputs no
    brake. Throttle is always zero while it is engaged.
    """

    a_brake_max: float = 11.0
    pi: PiState = None

    def __post_init__(self):
        if self.pi is None:
            self.pi = PiState()

    def step(self, decel_request: float | None, a_actual: float) -> float:
        if decel_request is None:
            self.pi.reset()
            return 0.0
        ff = -decel_request / self.a_brake_max
        return sat(ff + pi_accel_step(self.pi, decel_request, a_actual), 0.0, 1.0)

    @property
    def gas(self) -> float:
        return 0.0
