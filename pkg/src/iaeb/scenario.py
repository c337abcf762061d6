"""Declarative scenario files: YAML text validated into a ``Scenario``.

Unknown keys are rejected and every error names the offending key path
(for example ``friction.mu_real``).
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .dynamics import MU_MAX

CONTROLLERS = ("radar", "type_a", "type_b", "cho", "kapse", "kim")


class ScenarioError(ValueError):
    """Malformed or out-of-range scenario."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class VehicleSpec(_Model):
    speed_kmh: float = Field(ge=0, le=200)
    length: float = Field(4.5, gt=0)
    width: float = Field(1.8, gt=0)
    # Optional overrides of the crossing layout: footprint centre (m) and heading (deg).
    start: Optional[tuple[float, float]] = None
    heading_deg: Optional[float] = None


class Rect(_Model):
    x: tuple[float, float] = (3.5, 35.0)
    y: tuple[float, float] = (-12.25, -7.0)

    @model_validator(mode="after")
    def _ordered(self):
        if not (self.x[0] < self.x[1] and self.y[0] < self.y[1]):
            raise ValueError("rectangle bounds must be increasing")
        return self


class Geometry(_Model):
    field: Literal["open", "obstructed"] = "open"
    lane_width: float = Field(3.5, gt=0)
    obstruction: Rect = Rect()
    # both fronts reach the conflict point this many seconds after t = 0 if unbraked
    approach_time: float = Field(8.0, gt=0)


class Friction(_Model):
    mu_real: float = Field(0.85, gt=0, le=MU_MAX)
    mu_map: Optional[float] = Field(None, gt=0, le=MU_MAX)

    @property
    def map_value(self) -> float:
        return self.mu_real if self.mu_map is None else self.mu_map


class RadarSpec(_Model):
    mount_offset: tuple[float, float]
    boresight_deg: float = 0.0
    fov_deg: float = Field(gt=0, le=180)
    range_m: float = Field(gt=0)
    kind: Literal["SRR", "LRR"] = "SRR"


class GpsSpec(_Model):
    rtk: bool = True
    tau_unit: Literal["ms", "s"] = "ms"
    rate_hz: float = Field(10.0, gt=0)
    pseudorange_noise: float = Field(0.1, ge=0)
    rated_noise: float = Field(0.05, ge=0)


class V2xSpec(_Model):
    latency_ms: float = Field(10.0, ge=0)
    jitter_ms: float = Field(0.0, ge=0)
    drop_prob: float = Field(0.0, ge=0, le=1)
    rate_hz: float = Field(10.0, gt=0)
    gps_positions: bool = True


class TyreSpec(_Model):
    noise_sigma: float = Field(0.02, ge=0)
    rate_hz: float = Field(10.0, gt=0)


class SensorSpec(_Model):
    radars: Optional[list[RadarSpec]] = None  # None means the default three-radar layout
    radar_rate_hz: float = Field(100.0, gt=0)
    gps: GpsSpec = GpsSpec()
    v2x: V2xSpec = V2xSpec()
    tyre: TyreSpec = TyreSpec()


class ActivationSpec(_Model):
    min_target_lateral_speed: float = Field(1.0, ge=0)


class TypeASpec(_Model):
    ttc_trigger: float = Field(2.0, gt=0)
    bd_margin: float = Field(2.0, ge=0)


class TypeBSpec(_Model):
    k_min: float = Field(0.3, gt=0, lt=1)
    a_max_frac: float = Field(0.8, gt=0, le=1)
    a_tuned: float = Field(1.0, ge=0)
    stop_margin: float = Field(2.0, ge=0)
    lag_comp: float = Field(0.15, ge=0)
    resolve_threshold: float = Field(0.05, gt=0)


class Scenario(_Model):
    ego: VehicleSpec
    target: VehicleSpec
    controller: Literal["radar", "type_a", "type_b", "cho", "kapse", "kim"] = "radar"
    geometry: Geometry = Geometry()
    friction: Friction = Friction()
    sensors: SensorSpec = SensorSpec()
    activation: ActivationSpec = ActivationSpec()
    type_a: TypeASpec = TypeASpec()
    type_b: TypeBSpec = TypeBSpec()
    dt: float = Field(0.001, ge=1e-4, le=1e-2)
    seed: int = Field(0, ge=0)
    timeout: float = Field(30.0, gt=0)

    @field_validator("dt")
    @classmethod
    def _finite(cls, v):
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v

    @model_validator(mode="after")
    def _rates_fit_dt(self):
        s = self.sensors
        for name, hz in (("sensors.radar_rate_hz", s.radar_rate_hz), ("sensors.gps.rate_hz", s.gps.rate_hz),
                         ("sensors.v2x.rate_hz", s.v2x.rate_hz), ("sensors.tyre.rate_hz", s.tyre.rate_hz)):
            n = 1.0 / (hz * self.dt)
            if n < 1 - 1e-9 or abs(n - round(n)) > 1e-6:
                raise ValueError(f"{name}: period must be a whole number of timesteps")
        return self

    def ticks(self, rate_hz: float) -> int:
        return max(1, round(1.0 / (rate_hz * self.dt)))

    def with_updates(self, **changes) -> "Scenario":
        """Copy with dotted-path overrides, e.g. ``{"friction.mu_real": 0.4}``, revalidated."""
        data = self.model_dump()
        for key, value in changes.items():
            node = data
            *head, last = key.split(".")
            for part in head:
                node = node[part]
            node[last] = value
        return validate_scenario(data)


def _format(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{path}: {e['msg']}")
    return "; ".join(lines)


def validate_scenario(data) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("<root>: scenario must be a mapping")
    try:
        return Scenario.model_validate(data)
    except ValidationError as err:
        raise ScenarioError(_format(err)) from None


def parse_scenario(file) -> Scenario:
    path = Path(file)
    try:
        text = path.read_text()
    except OSError as err:
        raise ScenarioError(f"cannot read {path}: {err.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ScenarioError(f"{path}: not valid YAML ({err})") from None
    return validate_scenario(data if data is not None else {})


def dump_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario.model_dump(mode="json"), sort_keys=False)
