"""Perception models: occluded radar, GPS error processes, V2X channel, smart tyre.

Every random draw comes from a numpy Generator the caller owns; use
``sensor_rng`` to derive an independent stream per sensor from a run seed.
"""

from __future__ import annotations

import enum
import heapq
import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .collision import EPS, OrientedRect, segment_hits_rect
from .dynamics import VehicleState


def sensor_rng(seed: int, name: str) -> np.random.Generator:
    """Independent stream for one sensor; unaffected by creation order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode()),)))


# ---------------------------------------------------------------- radar

class RadarClass(str, enum.Enum):
    SRR = "SRR"
    LRR = "LRR"


@dataclass(frozen=True)
class RadarConfig:
    mount_offset: tuple[float, float]  # ego frame from the footprint centre, x forward / y left
    boresight: float
    fov: float
    range: float
    kind: RadarClass = RadarClass.SRR

    def __post_init__(self):
        if not 0 < self.fov <= math.pi:
            raise ValueError("fov must lie in (0, pi]")
        if self.range <= 0:
            raise ValueError("range must be positive")


def default_radars(length: float = 4.5, width: float = 1.8) -> list[RadarConfig]:
    """Two corner short-range units and one central long-range unit."""
    front = 0.5 * length
    srr = dict(fov=math.radians(150), range=50.0, kind=RadarClass.SRR)
    return [
        RadarConfig((front, 0.5 * width), math.radians(30), **srr),
        RadarConfig((front, -0.5 * width), math.radians(-30), **srr),
        RadarConfig((front, 0.0), 0.0, math.radians(20), 150.0, RadarClass.LRR),
    ]


@dataclass(frozen=True)
class RadarMeasurement:
    """Target nose and velocity relative to the ego nose, in the ego frame."""

    rel_pos: tuple[float, float]
    rel_vel: tuple[float, float]
    radar: int


def _to_ego(ego: VehicleState, v):
    c, s = math.cos(ego.heading), math.sin(ego.heading)
    return c * v[0] + s * v[1], -s * v[0] + c * v[1]


def _visible(mount, boresight, cfg: RadarConfig, p, obstruction) -> bool:
    dx, dy = p[0] - mount[0], p[1] - mount[1]
    if dx * dx + dy * dy > (cfg.range + EPS) ** 2:
        return False
    off = math.atan2(dy, dx) - boresight
    off = (off + math.pi) % (2 * math.pi) - math.pi
    if abs(off) > 0.5 * cfg.fov + 1e-12:
        return False
    return obstruction is None or not segment_hits_rect(mount, p, obstruction)


def radar_detect(ego: VehicleState, target: VehicleState, radars: list[RadarConfig],
                 obstruction: OrientedRect | None = None) -> RadarMeasurement | None:
    """Detect the target if some radar sees one of its probe points.

    Probe points are the target's front-bumper centre and its four corners;
    a point counts when it lies inside the radar's closed cone and range and
    the sight line misses the obstruction.
    """
    foot = OrientedRect.from_footprint(target.pos, target.length, target.width, target.heading)
    probes = [target.nose, *foot.corners()]
    c, s = math.cos(ego.heading), math.sin(ego.heading)
    for i, cfg in enumerate(radars):
        ox, oy = cfg.mount_offset
        mount = (ego.pos[0] + c * ox - s * oy, ego.pos[1] + s * ox + c * oy)
        bore = ego.heading + cfg.boresight
        if any(_visible(mount, bore, cfg, p, obstruction) for p in probes):
            en = ego.nose
            tn = target.nose
            rel = _to_ego(ego, (tn[0] - en[0], tn[1] - en[1]))
            ev, tv = ego.velocity, target.velocity
            return RadarMeasurement(rel, _to_ego(ego, (tv[0] - ev[0], tv[1] - ev[1])), i)
    return None


# ---------------------------------------------------------------- GPS

@dataclass
class GaussMarkov:
    """First-order Gauss-Markov process, one independent state per axis."""

    sigma: float
    tau: float
    state: tuple[float, float] | None = None

    def step(self, dt: float, rng: np.random.Generator) -> tuple[float, float]:
        if self.sigma == 0:
            self.state = (0.0, 0.0)
        elif self.state is None:
            self.state = (self.sigma * rng.standard_normal(), self.sigma * rng.standard_normal())
        else:
            phi = math.exp(-dt / self.tau)
            q = self.sigma * math.sqrt(-math.expm1(-2 * dt / self.tau))
            self.state = (self.state[0] * phi + q * rng.standard_normal(),
                          self.state[1] * phi + q * rng.standard_normal())
        return self.state


# Standard deviations (m) and correlation times in their listed form.
GPS_COMPONENTS = {
    "clock": (5.0, 3600.0),
    "ephemeris": (3.0, 1800.0),
    "ionosphere": (5.0, 3600.0),
    "troposphere": (2.0, 1800.0),
}


@dataclass
class GpsErrorModel:
    """Correlated satellite/atmosphere errors plus white receiver noise.

    Correlation times are given as listed (3600, 1800) and read as
    milliseconds by default; ``tau_unit="s"`` reads them as seconds. With
    ``rtk`` on, the correlated components are treated as corrected away and
    only receiver noise remains.
    """

    sigmas: dict[str, float] = field(default_factory=lambda: {k: v[0] for k, v in GPS_COMPONENTS.items()})
    taus: dict[str, float] = field(default_factory=lambda: {k: v[1] for k, v in GPS_COMPONENTS.items()})
    tau_unit: str = "ms"
    pseudorange_noise: float = 0.1
    rated_noise: float = 0.05
    rate: float = 10.0
    rtk: bool = False
    components: dict[str, GaussMarkov] = field(default=None, repr=False)

    def __post_init__(self):
        if self.tau_unit not in ("ms", "s"):
            raise ValueError("tau_unit must be 'ms' or 's'")
        if any(s < 0 for s in self.sigmas.values()) or self.pseudorange_noise < 0 or self.rated_noise < 0:
            raise ValueError("GPS standard deviations must be >= 0")
        scale = 1e-3 if self.tau_unit == "ms" else 1.0
        if self.components is None:
            self.components = {
                k: GaussMarkov(0.0 if self.rtk else self.sigmas[k], self.taus[k] * scale)
                for k in self.sigmas
            }

    @property
    def white_sigma(self) -> float:
        return math.hypot(self.pseudorange_noise, self.rated_noise)

    @property
    def period(self) -> float:
        return 1.0 / self.rate


def gps_sample(true_pos, model: GpsErrorModel, dt_since_last: float, rng: np.random.Generator):
    ex = ey = 0.0
    for comp in model.components.values():
        cx, cy = comp.step(dt_since_last, rng)
        ex += cx
        ey += cy
    w = model.white_sigma
    if w > 0:
        ex += w * rng.standard_normal()
        ey += w * rng.standard_normal()
    return true_pos[0] + ex, true_pos[1] + ey


# ---------------------------------------------------------------- V2X

@dataclass(frozen=True)
class Beacon:
    sender: str
    t_sent: float
    pos: tuple[float, float]  # sender's measured footprint centre
    heading: float
    speed: float
    length: float = 4.5
    width: float = 1.8
    mu_map: float | None = None


@dataclass
class V2xChannel:
    latency: float = 0.010
    jitter: float = 0.0
    drop_prob: float = 0.0
    beacon_rate: float = 10.0
    queue: list = field(default_factory=list)
    _seq: int = 0
    _last: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.latency < 0 or self.jitter < 0:
            raise ValueError("latency and jitter must be >= 0")
        if not 0 <= self.drop_prob <= 1:
            raise ValueError("drop_prob must lie in [0, 1]")

    def send(self, beacon: Beacon, rng: np.random.Generator):
        if self.drop_prob > 0 and rng.random() < self.drop_prob:
            return
        t = beacon.t_sent + self.latency
        if self.jitter > 0:
            t += self.jitter * rng.random()
        t = max(t, self._last.get(beacon.sender, t))  # FIFO per sender
        self._last[beacon.sender] = t
        self._seq += 1
        heapq.heappush(self.queue, (t, self._seq, beacon))

    def deliver(self, t: float) -> list[Beacon]:
        out = []
        while self.queue and self.queue[0][0] <= t + 1e-9:
            out.append(heapq.heappop(self.queue)[2])
        return out


def v2x_exchange(channel: V2xChannel, t: float, outbound: list[Beacon],
                 rng: np.random.Generator) -> list[Beacon]:
    """Queue the outbound beacons, then hand back everything due by ``t``."""
    for b in outbound:
        channel.send(b, rng)
    return channel.deliver(t)


# ---------------------------------------------------------------- smart tyre

@dataclass
class CyberTyreSensor:
    noise_sigma: float = 0.02
    available: bool = False
    mu_estimate: float | None = None


def cybertyre_estimate(world, sensor: CyberTyreSensor, rng: np.random.Generator) -> float | None:
    """Friction estimate, only once the ego has started braking."""
    if world.ego.accel < 0:
        sensor.available = True
    if not sensor.available:
        return None
    noise = sensor.noise_sigma * rng.standard_normal() if sensor.noise_sigma > 0 else 0.0
    sensor.mu_estimate = max(world.mu_real + noise, 1e-3)
    return sensor.mu_estimate
