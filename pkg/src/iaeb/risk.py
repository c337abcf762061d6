"""Collision-risk mathematics for crossing-path encounters.

Conflict-point geometry, time-to-reach / time-to-collision with a tolerance
gate, the staged braking-distance integrator and a handful of classic risk
indices (friction-scaled TTC threshold, actuator-aware braking distance,
headway braking distance, last point to brake/steer).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .dynamics import G, BrakeActuator

KMH = 1 / 3.6

DELTA_MIN = 0.05
DELTA_MAX = 2.0


@dataclass(frozen=True)
class MazdaParams:
    alpha1: float = 8.0
    alpha2: float = 8.0
    tau1: float = 0.5
    tau2: float = 0.5
    d0: float = 2.0
    epsilon: float = 5.0  # warning offset on top of the braking distance


@dataclass(frozen=True)
class RiskParams:
    level_a: float = -8.5
    level_b: float = -9.5
    level_c: float = -10.5
    v_b: float = 20 * KMH
    v_a: float = 45 * KMH
    v_max: float = 60 * KMH
    first_phase: float = 0.3
    # braking-distance trigger fires when bd >= dist_to_conflict - bd_margin
    bd_margin: float = 2.0
    j_act: float = 10.0
    s_y: float = 3.5
    mazda: MazdaParams = field(default_factory=MazdaParams)

    def __post_init__(self):
        if not (0 > self.level_a > self.level_b > self.level_c):
            raise ValueError("levels must satisfy 0 > level_a > level_b > level_c")
        if not (0 < self.v_b < self.v_a < self.v_max):
            raise ValueError("stage speeds must satisfy 0 < v_b < v_a < v_max")
        if self.first_phase < 0:
            raise ValueError("first_phase must be >= 0")


@dataclass(frozen=True)
class RiskSnapshot:
    conflict_point: tuple[float, float] | None = None
    ttr_ego: float | None = None
    ttr_target: float | None = None
    ttc: float | None = None
    braking_distance: float | None = None
    dist_to_conflict: float | None = None
    delta: float | None = None


NO_RISK = RiskSnapshot()


def _dir(heading):
    return math.cos(heading), math.sin(heading)


def conflict_point(ego_pos, ego_heading, target_pos, target_heading):
    """Intersection of the two heading rays, or None.

    None when the paths are parallel or the crossing lies behind either
    vehicle.
    """
    ex, ey = _dir(ego_heading)
    tx, ty = _dir(target_heading)
    cross = ex * ty - ey * tx
    if abs(cross) < 1e-12:
        return None
    rx, ry = target_pos[0] - ego_pos[0], target_pos[1] - ego_pos[1]
    s_ego = (rx * ty - ry * tx) / cross
    s_tgt = (rx * ey - ry * ex) / cross
    if s_ego < 0 or s_tgt < 0:
        return None
    return ego_pos[0] + s_ego * ex, ego_pos[1] + s_ego * ey


def conflict_point_slope_form(ego_pos, ego_heading, target_pos, target_heading):
    """Line crossing written with tan/cot of the headings.

    Singular whenever a heading is a multiple of 90 degrees; kept as the
    reference form that ``conflict_point`` is checked against. No
    behind-the-vehicle filtering.
    """
    xe, ye = ego_pos
    xt, yt = target_pos
    te, tt = math.tan(ego_heading), math.tan(target_heading)
    ce, ct = 1 / te, 1 / tt
    x = ((ye - yt) - (xe * te - xt * tt)) / (tt - te)
    y = ((xe - xt) - (ye * ce - yt * ct)) / (ct - ce)
    return x, y


def delta_of_speeds(v_ego, v_target, ego_length=4.5, ego_width=1.8,
                    target_length=4.5, target_width=1.8) -> float:
    """Speed-dependent tolerance on the TTR difference.

    Sum of the times each vehicle needs to clear the other's footprint
    around the conflict point, clamped to [DELTA_MIN, DELTA_MAX].
    """
    if v_ego <= 0 or v_target <= 0:
        return DELTA_MAX
    d = (0.5 * target_length + 0.5 * ego_width) / v_target \
        + (0.5 * ego_length + 0.5 * target_width) / v_ego
    return min(max(d, DELTA_MIN), DELTA_MAX)


def ttc(ego_pos, ego_heading, ego_speed, target_pos, target_heading, target_speed,
        delta: float) -> RiskSnapshot:
    """Time-to-reach for both vehicles and the delta-gated time-to-collision."""
    cp = conflict_point(ego_pos, ego_heading, target_pos, target_heading)
    if cp is None:
        return NO_RISK
    d_ego = math.hypot(cp[0] - ego_pos[0], cp[1] - ego_pos[1])
    if ego_speed <= 0 or target_speed <= 0:
        return RiskSnapshot(conflict_point=cp, dist_to_conflict=d_ego, delta=delta)
    d_tgt = math.hypot(cp[0] - target_pos[0], cp[1] - target_pos[1])
    ttr_e = d_ego / ego_speed
    ttr_t = d_tgt / target_speed
    value = min(ttr_e, ttr_t) if abs(ttr_e - ttr_t) <= delta else None
    return RiskSnapshot(cp, ttr_e, ttr_t, value, None, d_ego, delta)


def stage_level(v: float, stage_b_elapsed: float | None, params: RiskParams) -> float:
    """Requested deceleration of the velocity-staged braking scheme.

    ``stage_b_elapsed`` is the time already spent in the middle stage (None
    or anything below ``first_phase`` means still in its first phase).
    """
    if v <= params.v_b:
        return params.level_c
    if v <= params.v_a:
        if stage_b_elapsed is None or stage_b_elapsed < params.first_phase:
            return params.level_a
        return params.level_b
    return params.level_a


def braking_distance_staged(v0: float, mu: float, params: RiskParams = RiskParams(),
                            actuator: BrakeActuator | None = None, dt: float = 1e-3) -> float:
    """Distance to rest under the staged scheme with every level clamped to mu*g.

    Forward integration including the first-phase rule of the middle stage
    and the actuator's first-order lag. Results are cached per argument set.
    """
    actuator = actuator or BrakeActuator()
    return _bd_staged(float(v0), float(mu), params, actuator.tau_act, actuator.a_brake_max, dt)


@lru_cache(maxsize=4096)
def _bd_staged(v0, mu, params, tau, a_max, dt):
    if v0 <= 0:
        return 0.0
    limit = mu * G
    alpha = 1.0 if tau == 0 else -math.expm1(-dt / tau)
    v, s, lagged = v0, 0.0, 0.0
    in_b_ticks = None
    first_ticks = round(params.first_phase / dt)
    for _ in range(10_000_000):
        if params.v_b < v <= params.v_a:
            in_b_ticks = 0 if in_b_ticks is None else in_b_ticks + 1
            elapsed = params.first_phase if in_b_ticks >= first_ticks else 0.0
        else:
            elapsed = None
        req = min(-stage_level(v, elapsed, params), limit)
        lagged += (req / a_max - lagged) * alpha
        decel = min(lagged * a_max, limit)
        if decel > 0 and v - decel * dt <= 0:
            return s + v * v / (2 * decel)
        v_new = v - decel * dt
        s += 0.5 * (v + v_new) * dt
        v = v_new
    raise RuntimeError("braking-distance integration did not converge")


def ttc_threshold_mu(v_ego: float, mu: float, g: float = G) -> float:
    """Friction-scaled TTC threshold v / (2 mu g)."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    return v_ego / (2 * mu * g)


def braking_distance_lee(v_x: float, a_x: float, j_act: float) -> float:
    """Actuator-aware braking distance, evaluated exactly as the three-term formula.

    Goes negative near v_x = 0 because of the cubic correction; this is left
    as is.
    """
    if a_x <= 0 or j_act <= 0:
        raise ValueError("a_x and j_act must be positive")
    return v_x ** 2 / (2 * a_x) + v_x * a_x / (2 * j_act) - a_x ** 3 / (24 * j_act ** 2)


def braking_distance_mazda(v: float, v_rel: float, params: MazdaParams = MazdaParams()) -> float:
    if params.alpha1 <= 0 or params.alpha2 <= 0:
        raise ValueError("alpha1 and alpha2 must be positive")
    p = params
    return 0.5 * (v ** 2 / p.alpha1 - (v - v_rel) ** 2 / p.alpha2) + v * p.tau1 + v_rel * p.tau2 + p.d0


def mazda_flags(range_: float, v: float, v_rel: float,
                params: MazdaParams = MazdaParams()) -> tuple[bool, bool]:
    """(warn, brake) for the headway braking-distance logic."""
    d_br = braking_distance_mazda(v, v_rel, params)
    return range_ < d_br + params.epsilon, range_ < d_br


@dataclass(frozen=True)
class LastPoints:
    t_lpb: float
    t_lps: float


def last_points(v_rel: float, s_y: float, mu: float, g: float = G) -> LastPoints:
    """Last point to brake and last point to steer (as times)."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    if s_y < 0:
        raise ValueError("s_y must be >= 0")
    return LastPoints(-v_rel / (2 * mu * g), math.sqrt(2 * s_y / (mu * g)))
