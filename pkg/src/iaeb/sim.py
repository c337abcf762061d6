"""Fixed-step closed loop: sensors -> risk -> controllers -> pedal -> dynamics.

The crossing layout puts the conflict point at the origin. The ego drives
north along x = 0 and the target drives west along y = 0, arriving from the
ego's right. Risk geometry uses the front-bumper points of both vehicles.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .collision import OrientedRect, obb_overlap
from .controllers import (IDLE, AccelerationController, ActivationParams, AebCommand,
                          CommercialFsm, HoldingBaseline, KapseParams, TypeAController,
                          TypeBController, TypeBParams, activation_check, baseline_cho_step,
                          baseline_kapse_step, kim_from_risk, merge)
from .dynamics import BrakeActuator, VehicleState, apply_brake
from .risk import KMH, NO_RISK, RiskParams, delta_of_speeds, ttc
from .scenario import Scenario
from .sensors import (Beacon, CyberTyreSensor, GpsErrorModel, RadarClass, RadarConfig,
                      V2xChannel, cybertyre_estimate, default_radars, gps_sample,
                      radar_detect, sensor_rng, v2x_exchange)

REST_SPEED = 0.01
SEPARATION_LIMIT = 200.0


class EventKind(str, enum.Enum):
    ACTIVATION_ON = "ActivationOn"
    WARNING_ISSUED = "WarningIssued"
    AEB_TRIGGERED = "AebTriggered"
    FULL_STOP = "FullStop"
    COLLISION = "Collision"


@dataclass(frozen=True)
class SimEvent:
    t: float
    kind: EventKind
    payload: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind.value, **self.payload}


@dataclass
class WorldState:
    t: float
    ego: VehicleState
    target: VehicleState
    obstruction: OrientedRect | None = None
    mu_real: float = 0.85
    collision_point: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be >= 0")
        if self.mu_real <= 0:
            raise ValueError("mu_real must be positive")


@dataclass
class RunOutcome:
    collided: bool
    impact_speed: float
    braking_onset_distance: float | None
    stop_margin: float | None
    peak_decel: float
    trace_path: str | None = None
    timeout: bool = False
    trigger_source: str | None = None
    end_time: float = 0.0
    end_reason: str = ""

    def to_json(self) -> dict:
        return {k: (v.value if isinstance(v, enum.Enum) else v) for k, v in self.__dict__.items()}


class SimulationError(RuntimeError):
    """The run produced a non-finite state."""


@dataclass
class Track:
    """Constant-velocity estimate of the target's front bumper."""

    nose: tuple[float, float]
    velocity: tuple[float, float]
    t: float
    mu_map: float | None = None

    def at(self, t: float) -> tuple[float, float]:
        h = t - self.t
        return self.nose[0] + self.velocity[0] * h, self.nose[1] + self.velocity[1] * h


@dataclass
class SensorSet:
    radars: list[RadarConfig]
    radar_every: int
    gps_ego: GpsErrorModel
    gps_target: GpsErrorModel
    gps_every: int
    v2x: V2xChannel
    v2x_every: int
    v2x_gps_positions: bool
    tyre: CyberTyreSensor
    tyre_every: int
    mu_map: float
    rngs: dict = field(default_factory=dict)
    radar_track: Track | None = None
    v2x_track: Track | None = None
    # ego GPS fix minus true position at the last fix; odometry carries it forward
    ego_offset: tuple[float, float] | None = None
    tyre_value: float | None = None


@dataclass
class ControllerSet:
    kind: str
    activation: ActivationParams
    accel: AccelerationController
    actuator: BrakeActuator
    fsm: CommercialFsm | None = None
    type_a: TypeAController | None = None
    type_b: TypeBController | None = None
    baseline: HoldingBaseline | None = None
    kim_mu: float = 0.85
    s_y: float = 3.5
    engaged: bool = False
    stopped: bool = False
    activation_seen: bool = False

    @property
    def connected(self) -> bool:
        return self.type_a is not None or self.type_b is not None


@dataclass
class StepInfo:
    """Per-tick quantities that go to the trace."""

    ttc: float | None = None
    bd: float | None = None
    command: AebCommand = IDLE
    connected_request: float | None = None
    pedal: float = 0.0
    v2x_rx: list = field(default_factory=list)


def _finite(*xs) -> bool:
    return all(math.isfinite(x) for x in xs)


def _footprint(v: VehicleState) -> OrientedRect:
    return OrientedRect.from_footprint(v.pos, v.length, v.width, v.heading)


def _to_ego_frame(ego: VehicleState, vec):
    c, s = math.cos(ego.heading), math.sin(ego.heading)
    return c * vec[0] + s * vec[1], -s * vec[0] + c * vec[1]


def _track_risk(ego_nose, ego: VehicleState, track: Track | None, t: float):
    if track is None:
        return NO_RISK, None
    vx, vy = track.velocity
    speed = math.hypot(vx, vy)
    if speed <= 0:
        return NO_RISK, (0.0, 0.0)
    delta = delta_of_speeds(ego.speed, speed)
    return ttc(ego_nose, ego.heading, ego.speed, track.at(t), math.atan2(vy, vx), speed, delta), \
        _to_ego_frame(ego, (vx - ego.velocity[0], vy - ego.velocity[1]))


def _sample_sensors(world: WorldState, sensors: SensorSet, tick: int, dt: float, info: StepInfo):
    t, ego, target = world.t, world.ego, world.target
    rngs = sensors.rngs
    if tick % sensors.radar_every == 0:
        m = radar_detect(ego, target, sensors.radars, world.obstruction)
        if m is None:
            sensors.radar_track = None
        else:
            c, s = math.cos(ego.heading), math.sin(ego.heading)
            en, ev = ego.nose, ego.velocity
            rx, ry = m.rel_pos
            wx, wy = m.rel_vel
            sensors.radar_track = Track((en[0] + c * rx - s * ry, en[1] + s * rx + c * ry),
                                        (ev[0] + c * wx - s * wy, ev[1] + s * wx + c * wy), t)
    period = sensors.gps_every * dt
    if tick % sensors.gps_every == 0:
        fix = gps_sample(ego.pos, sensors.gps_ego, period, rngs["gps_ego"])
        sensors.ego_offset = (fix[0] - ego.pos[0], fix[1] - ego.pos[1])
    outbound = []
    if tick % sensors.v2x_every == 0:
        pos = gps_sample(target.pos, sensors.gps_target, sensors.v2x_every * dt, rngs["gps_target"]) \
            if sensors.v2x_gps_positions else target.pos
        outbound.append(Beacon("target", t, pos, target.heading, target.speed,
                               target.length, target.width, sensors.mu_map))
    for b in v2x_exchange(sensors.v2x, t, outbound, rngs["v2x"]):
        ux, uy = math.cos(b.heading), math.sin(b.heading)
        h = 0.5 * b.length
        sensors.v2x_track = Track((b.pos[0] + h * ux, b.pos[1] + h * uy),
                                  (b.speed * ux, b.speed * uy), b.t_sent, b.mu_map)
        info.v2x_rx.append(round(b.t_sent, 9))
    if tick % sensors.tyre_every == 0:
        sensors.tyre_value = cybertyre_estimate(world, sensors.tyre, rngs["tyre"])
    else:
        sensors.tyre_value = None


def step(world: WorldState, controllers: ControllerSet, sensors: SensorSet, dt: float,
         tick: int) -> tuple[WorldState, list[SimEvent], StepInfo]:
    """Advance the closed loop by one tick; ``tick`` is the step index of ``world.t``."""
    if not 1e-4 - 1e-15 <= dt <= 1e-2 + 1e-15:
        raise ValueError("dt must lie in [1e-4, 1e-2] s")
    info = StepInfo()
    events: list[SimEvent] = []
    ego, target, t = world.ego, world.target, world.t
    cs = controllers

    _sample_sensors(world, sensors, tick, dt, info)

    radar_risk, radar_rel_v = _track_risk(ego.nose, ego, sensors.radar_track, t)
    radar_active = radar_rel_v is not None and activation_check(
        ego.speed, _target_velocity_ego(ego, sensors.radar_track), cs.activation)
    info.ttc = radar_risk.ttc

    cmds = []
    if cs.fsm is not None:
        cmds.append(cs.fsm.step(radar_risk, ego.speed, dt, radar_active, cs.stopped))
    if cs.baseline is not None:
        cmds.append(_baseline_step(cs, radar_risk, ego.speed, radar_active))

    active = radar_active
    if cs.connected:
        off = sensors.ego_offset or (0.0, 0.0)
        nose = ego.nose
        est_nose = (nose[0] + off[0], nose[1] + off[1])
        track = sensors.v2x_track
        conn_risk, conn_rel_v = _track_risk(est_nose, ego, track, t)
        conn_active = conn_rel_v is not None and activation_check(
            ego.speed, _target_velocity_ego(ego, track), cs.activation)
        active = active or conn_active
        mu_map = track.mu_map if track is not None else None
        if conn_risk.ttc is not None:
            info.ttc = conn_risk.ttc
        if cs.type_a is not None:
            if mu_map is not None and cs.type_a.trigger_source is None:
                info.bd = cs.type_a.braking_distance(ego.speed, mu_map)
            conn = cs.type_a.step(conn_risk, mu_map, ego.speed, dt, conn_active, cs.stopped)
        else:
            cs.type_b.feed_tyre(sensors.tyre_value)
            conn = cs.type_b.step(conn_risk, mu_map, ego.speed, ego.accel, tick, dt,
                                  conn_active, cs.stopped)
        info.connected_request = conn.decel_request
        cmds.append(conn)

    cmd = merge(*cmds)
    info.command = cmd
    if active and not cs.activation_seen:
        cs.activation_seen = True
        events.append(SimEvent(t, EventKind.ACTIVATION_ON))
    if cmd.warning:
        events.append(SimEvent(t, EventKind.WARNING_ISSUED))
    if cmd.active and not cs.engaged:
        cs.engaged = True
        events.append(SimEvent(t, EventKind.AEB_TRIGGERED, {
            "source": cmd.source.value, "dist_to_conflict": _dist_to_conflict(ego, world)}))

    pedal = cs.accel.step(cmd.decel_request, ego.accel)
    info.pedal = pedal
    cs.actuator.pedal = pedal
    if cs.stopped:
        new_ego = replace(ego, speed=0.0, accel=0.0)
    else:
        new_ego = apply_brake(ego, cs.actuator, world.mu_real, dt)
        if cs.engaged and new_ego.speed < REST_SPEED:
            new_ego = replace(new_ego, speed=0.0)
            cs.stopped = True
            events.append(SimEvent(t + dt, EventKind.FULL_STOP,
                                   {"stop_margin": _dist_to_conflict(new_ego, world)}))
    ux, uy = target.direction
    new_target = replace(target, pos=(target.pos[0] + target.speed * dt * ux,
                                      target.pos[1] + target.speed * dt * uy))
    if not _finite(*new_ego.pos, new_ego.speed, new_ego.accel, *new_target.pos):
        raise SimulationError(f"non-finite state at t={t + dt:.3f} s")
    new_world = replace(world, t=(tick + 1) * dt, ego=new_ego, target=new_target)
    if _overlap(new_ego, new_target):
        events.append(SimEvent(new_world.t, EventKind.COLLISION, {"impact_speed": new_ego.speed}))
    return new_world, events, info


def _target_velocity_ego(ego: VehicleState, track: Track):
    return _to_ego_frame(ego, track.velocity)


def _baseline_step(cs: ControllerSet, risk, ego_speed, active) -> AebCommand:
    b = cs.baseline
    if cs.kind == "cho":
        return b.step(risk.ttc, active=active, stopped=cs.stopped)
    if cs.kind == "kapse":
        return b.step(risk.ttc, ego_speed, active=active, stopped=cs.stopped)
    return b.step(risk.ttc, ego_speed, cs.kim_mu, cs.s_y, active=active, stopped=cs.stopped)


def _dist_to_conflict(v: VehicleState, world: WorldState) -> float:
    """Signed distance from the front bumper to the conflict point along the heading."""
    n = v.nose
    ux, uy = v.direction
    cp = world.collision_point
    return (cp[0] - n[0]) * ux + (cp[1] - n[1]) * uy


def _overlap(a: VehicleState, b: VehicleState) -> bool:
    dx, dy = a.pos[0] - b.pos[0], a.pos[1] - b.pos[1]
    reach = 0.5 * (math.hypot(a.length, a.width) + math.hypot(b.length, b.width))
    if dx * dx + dy * dy > reach * reach:
        return False
    return obb_overlap(_footprint(a), _footprint(b))


# ------------------------------------------------------------ scenario wiring

def build_world(sc: Scenario) -> WorldState:
    e, g = sc.ego, sc.target
    t0 = sc.geometry.approach_time
    ve, vt = e.speed_kmh * KMH, g.speed_kmh * KMH
    eh = math.radians(e.heading_deg) if e.heading_deg is not None else 0.5 * math.pi
    th = math.radians(g.heading_deg) if g.heading_deg is not None else math.pi
    epos = e.start if e.start is not None else (0.0, -ve * t0 - 0.5 * e.length)
    tpos = g.start if g.start is not None else (vt * t0 + 0.5 * g.length, 0.0)
    ego = VehicleState(tuple(epos), eh, ve, 0.0, e.length, e.width, actuated=True)
    target = VehicleState(tuple(tpos), th, vt, 0.0, g.length, g.width)
    obs = None
    if sc.geometry.field == "obstructed":
        r = sc.geometry.obstruction
        obs = OrientedRect((0.5 * (r.x[0] + r.x[1]), 0.5 * (r.y[0] + r.y[1])),
                           (0.5 * (r.x[1] - r.x[0]), 0.5 * (r.y[1] - r.y[0])))
    return WorldState(0.0, ego, target, obs, sc.friction.mu_real)


def build_sensors(sc: Scenario) -> SensorSet:
    s = sc.sensors
    if s.radars is None:
        radars = default_radars(sc.ego.length, sc.ego.width)
    else:
        radars = [RadarConfig(tuple(r.mount_offset), math.radians(r.boresight_deg),
                              math.radians(r.fov_deg), r.range_m, RadarClass(r.kind)) for r in s.radars]

    def gps():
        return GpsErrorModel(tau_unit=s.gps.tau_unit, pseudorange_noise=s.gps.pseudorange_noise,
                             rated_noise=s.gps.rated_noise, rate=s.gps.rate_hz, rtk=s.gps.rtk)

    names = ("gps_ego", "gps_target", "v2x", "tyre")
    return SensorSet(
        radars=radars, radar_every=sc.ticks(s.radar_rate_hz),
        gps_ego=gps(), gps_target=gps(), gps_every=sc.ticks(s.gps.rate_hz),
        v2x=V2xChannel(s.v2x.latency_ms * 1e-3, s.v2x.jitter_ms * 1e-3, s.v2x.drop_prob, s.v2x.rate_hz),
        v2x_every=sc.ticks(s.v2x.rate_hz), v2x_gps_positions=s.v2x.gps_positions,
        tyre=CyberTyreSensor(s.tyre.noise_sigma), tyre_every=sc.ticks(s.tyre.rate_hz),
        mu_map=sc.friction.map_value,
        rngs={n: sensor_rng(sc.seed, n) for n in names},
    )


def build_controllers(sc: Scenario) -> ControllerSet:
    actuator = BrakeActuator()
    params = RiskParams(bd_margin=sc.type_a.bd_margin)
    cs = ControllerSet(sc.controller, ActivationParams(sc.activation.min_target_lateral_speed),
                       AccelerationController(actuator.a_brake_max), actuator,
                       kim_mu=sc.friction.map_value, s_y=sc.geometry.lane_width)
    kind = sc.controller
    if kind in ("radar", "type_a", "type_b"):
        cs.fsm = CommercialFsm(params)
    if kind == "type_a":
        cs.type_a = TypeAController(params, BrakeActuator(), sc.type_a.ttc_trigger)
    elif kind == "type_b":
        b = sc.type_b
        cs.type_b = TypeBController(TypeBParams(b.k_min, b.a_max_frac, b.a_tuned,
                                                0.5 * sc.geometry.lane_width, b.stop_margin,
                                                b.lag_comp, b.resolve_threshold))
    elif kind == "cho":
        cs.baseline = HoldingBaseline(baseline_cho_step)
    elif kind == "kapse":
        cs.baseline = HoldingBaseline(lambda ttc_, v: baseline_kapse_step(ttc_, v, KapseParams()))
    elif kind == "kim":
        cs.baseline = HoldingBaseline(kim_from_risk)
    return cs


class TraceWriter:
    """Line-delimited JSON, one record per tick plus a closing ``end`` record."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w")

    def write(self, record: dict):
        self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")

    def close(self):
        self._fh.close()


def _record(world: WorldState, info: StepInfo, events: list[SimEvent]) -> dict:
    e, g = world.ego, world.target
    return {
        "t": round(world.t, 9),
        "ego": {"x": e.pos[0], "y": e.pos[1], "heading": e.heading, "speed": e.speed, "accel": e.accel},
        "target": {"x": g.pos[0], "y": g.pos[1], "heading": g.heading, "speed": g.speed},
        "ttc": info.ttc,
        "bd": info.bd,
        "dist_to_conflict": _dist_to_conflict(e, world),
        "decel_request": info.command.trace_value,
        "connected_request": info.connected_request,
        "source": info.command.source.value,
        "pedal": info.pedal,
        "gas": 0.0,
        "v2x_rx": info.v2x_rx,
        "events": [ev.to_json() for ev in events],
    }


def _separating(world: WorldState) -> bool:
    e, g = world.ego, world.target
    dx, dy = g.pos[0] - e.pos[0], g.pos[1] - e.pos[1]
    if dx * dx + dy * dy < SEPARATION_LIMIT ** 2:
        return False
    rvx, rvy = g.velocity[0] - e.velocity[0], g.velocity[1] - e.velocity[1]
    return dx * rvx + dy * rvy > 0


def _cleared(world: WorldState) -> str | None:
    """Reason the run can no longer end in a collision, if any."""
    e, g = world.ego, world.target
    # corridors are the bands swept by each footprint along its own path
    ego_rel = _along_across(g, e)
    tgt_rel = _along_across(e, g)
    if ego_rel is not None and ego_rel > 0.5 * g.width:
        return "ego cleared"
    if tgt_rel is not None and tgt_rel > 0.5 * e.width:
        return "target cleared"
    return None


def _along_across(path_owner: VehicleState, v: VehicleState) -> float | None:
    """How far ``v``'s rear is past ``path_owner``'s centreline, measured along ``v``'s heading.

    Only meaningful when the paths cross; None for parallel headings.
    """
    ox, oy = path_owner.direction
    ux, uy = v.direction
    nx, ny = -oy, ox  # normal of the owner's path
    dot = ux * nx + uy * ny
    if abs(dot) < 1e-9:
        return None
    rx = v.pos[0] - 0.5 * v.length * ux
    ry = v.pos[1] - 0.5 * v.length * uy
    side = ((rx - path_owner.pos[0]) * nx + (ry - path_owner.pos[1]) * ny) / dot
    # positive once the rear has moved through the centreline along v's direction
    return side


def _ego_stopped_short(world: WorldState) -> bool:
    e, g = world.ego, world.target
    front = _along_across_front(g, e)
    return front is not None and front < -0.5 * g.width


def _along_across_front(path_owner: VehicleState, v: VehicleState) -> float | None:
    ox, oy = path_owner.direction
    ux, uy = v.direction
    nx, ny = -oy, ox
    dot = ux * nx + uy * ny
    if abs(dot) < 1e-9:
        return None
    n = v.nose
    return ((n[0] - path_owner.pos[0]) * nx + (n[1] - path_owner.pos[1]) * ny) / dot


def run(scenario: Scenario, trace_path=None) -> RunOutcome:
    """Simulate one scenario until a terminal condition or the timeout."""
    dt = scenario.dt
    world = build_world(scenario)
    sensors = build_sensors(scenario)
    cs = build_controllers(scenario)
    writer = TraceWriter(trace_path) if trace_path is not None else None
    onset = None
    source = None
    peak = 0.0
    collided = False
    impact = 0.0
    stop_margin = None
    reason = "timeout"
    n_max = int(round(scenario.timeout / dt))
    tick = 0
    try:
        while tick < n_max:
            prev = world
            world, events, info = step(world, cs, sensors, dt, tick)
            tick += 1
            peak = max(peak, -world.ego.accel)
            for ev in events:
                if ev.kind is EventKind.AEB_TRIGGERED and onset is None:
                    onset = ev.payload["dist_to_conflict"]
                    source = ev.payload["source"]
                elif ev.kind is EventKind.COLLISION:
                    collided = True
                    impact = world.ego.speed
                elif ev.kind is EventKind.FULL_STOP:
                    stop_margin = ev.payload["stop_margin"]
            if writer is not None:
                writer.write(_record(prev, info, events))
            if collided:
                reason = "collision"
                break
            # once no collision is possible, still let an active brake run to a stop
            braking = cs.engaged and not cs.stopped
            if cs.stopped and _ego_stopped_short(world):
                reason = "ego stopped"
                break
            why = _cleared(world) or ("separated" if _separating(world) else None)
            if why is not None and not braking:
                reason = why
                break
    except Exception:
        if writer is not None:
            writer.close()
        raise
    if stop_margin is None and world.ego.speed == 0.0:
        stop_margin = _dist_to_conflict(world.ego, world)
    outcome = RunOutcome(
        collided=collided,
        impact_speed=impact if collided else 0.0,
        braking_onset_distance=onset,
        stop_margin=stop_margin,
        peak_decel=peak,
        trace_path=str(trace_path) if trace_path is not None else None,
        timeout=reason == "timeout",
        trigger_source=source,
        end_time=world.t,
        end_reason=reason,
    )
    if writer is not None:
        end = outcome.to_json()
        del end["trace_path"]  # keeps the bytes independent of where the file lives
        writer.write({"end": end})
        writer.close()
    return outcome
