from __future__ import annotations

import enum
from dataclasses import dataclass

# Trace value standing for "no deceleration request".
NO_REQUEST = -15.0


class Source(str, enum.Enum):
    NONE = "none"
    TTC = "ttc"
    BRAKING_DISTANCE = "braking_distance"
    EXP_PROFILE = "exp_profile"


@dataclass(frozen=True)
class AebCommand:
    decel_request: float | None = None
    warning: bool = False
    source: Source = Source.NONE

    def __post_init__(self):
        r = self.decel_request
        if r is not None and not (NO_REQUEST <= r < 0):
            raise ValueError(f"decel_request must lie in [-15, 0), got {r}")

    @property
    def active(self) -> bool:
        return self.decel_request is not None

    @property
    def trace_value(self) -> float:
        return NO_REQUEST if self.decel_request is None else self.decel_request


IDLE = AebCommand()


def merge(*commands: AebCommand) -> AebCommand:
    """Keep the deepest deceleration request; warnings are OR-ed."""
    best = IDLE
    for cmd in commands:
        if cmd.decel_request is not None and (
            best.decel_request is None or cmd.decel_request < best.decel_request
        ):
            best = cmd
    warning = any(c.warning for c in commands)
    if warning != best.warning:
        best = AebCommand(best.decel_request, warning, best.source)
    return best
