"""Exponential deceleration profile a(t) = A exp(alpha t) and its trigger.

For a start speed v0 and distance d, (alpha, T) must satisfy v(T) = 0 and
s(T) = d. Zero speed at T gives exp(alpha T) = 1 + alpha v0 / |A|, which
leaves a single equation in alpha:

    s(alpha) = (v0 + |A|/alpha) T(alpha) - v0/alpha = d,
    T(alpha) = log(1 + alpha v0/|A|) / alpha.

s(alpha) falls monotonically from v0^2 / (2|A|) (constant deceleration,
alpha -> 0) toward 0, so a root exists iff d is below the constant-
deceleration distance and above s(alpha_max).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..dynamics import G
from .commands import IDLE, NO_REQUEST, AebCommand, Source

ALPHA_MIN = 1e-4
ALPHA_MAX = 10.0
TOL_V = 1e-3
TOL_S = 1e-2
MAX_ITER = 100

_SERIES_X = 1e-2
_SERIES_TERMS = 14


@dataclass(frozen=True)
class TypeBParams:
    k_min: float = 0.3
    a_max_frac: float = 0.8
    a_tuned: float = 1.0
    # the plan targets the near edge of the crossing road, this far before the conflict point
    intersection_offset: float = 1.75
    stop_margin: float = 2.0
    # plan as if the vehicle will cover speed * lag_comp before braking bites
    lag_comp: float = 0.15
    resolve_threshold: float = 0.05
    min_tyre_samples: int = 3

    def __post_init__(self):
        if not 0 < self.k_min < self.a_max_frac <= 1:
            raise ValueError("need 0 < k_min < a_max_frac <= 1")
        if self.a_tuned < 0:
            raise ValueError("a_tuned must be >= 0")


@dataclass(frozen=True)
class TypeBSolution:
    feasible: bool
    alpha: float | None = None
    T: float | None = None
    A: float | None = None
    at_edge: bool = False
    reason: str = ""
    iterations: int = 0

    @property
    def terminal_decel(self) -> float | None:
        """|a(T)|, the deepest deceleration the profile asks for."""
        if not self.feasible:
            return None
        return -self.A * math.exp(self.alpha * self.T)


def _g(x):
    """s / (v0^2/|A|) as a function of x = alpha v0 / |A|."""
    if x < _SERIES_X:
        return sum((-x) ** k / ((k + 1) * (k + 2)) for k in range(_SERIES_TERMS))
    L = math.log1p(x)
    return L / x + L / (x * x) - 1 / x


def _dg(x):
    if x < _SERIES_X:
        return sum(k * (-1) ** k * x ** (k - 1) / ((k + 1) * (k + 2)) for k in range(1, _SERIES_TERMS))
    L = math.log1p(x)
    dL = 1 / (1 + x)
    return dL / x - L / x ** 2 + dL / x ** 2 - 2 * L / x ** 3 + 1 / x ** 2


def _log1p_over_x(x):
    if x < _SERIES_X:
        return sum((-x) ** k / (k + 1) for k in range(_SERIES_TERMS))
    return math.log1p(x) / x


def profile_distance(alpha: float, v0: float, A: float) -> float:
    u = -A
    return v0 * v0 / u * _g(alpha * v0 / u)


def profile_stop_time(alpha: float, v0: float, A: float) -> float:
    u = -A
    return v0 / u * _log1p_over_x(alpha * v0 / u)


def profile_speed(t: float, alpha: float, v0: float, A: float) -> float:
    if alpha == 0:
        return v0 + A * t
    return v0 + A * math.expm1(alpha * t) / alpha


def type_b_solve(v0: float, d: float, A: float, alpha_min: float = ALPHA_MIN,
                 alpha_max: float = ALPHA_MAX, tol_s: float = TOL_S, tol_v: float = TOL_V,
                 max_iter: int = MAX_ITER) -> TypeBSolution:
    """Find (alpha, T) so that the profile stops exactly after distance d."""
    if v0 <= 0 or d <= 0 or A >= 0:
        raise ValueError("need v0 > 0, d > 0 and A < 0")
    u = -A
    scale = v0 * v0 / u
    k = v0 / u  # dx/dalpha

    def f(alpha):
        return scale * _g(alpha * k) - d

    s_limit = 0.5 * scale
    if d >= s_limit:
        if d - s_limit <= tol_s:
            return TypeBSolution(True, 0.0, v0 / u, A, True, "constant-decel limit")
        return TypeBSolution(False, reason="not needed: d beyond constant-decel distance")
    f_hi = f(alpha_max)
    if f_hi > 0:
        if f_hi <= tol_s:
            return _finish(alpha_max, v0, A, True, 0, tol_s, tol_v, d)
        return TypeBSolution(False, reason="too close: needs alpha above bracket")

    f_lo = f(alpha_min)
    if f_lo < 0:
        # root sits below the bracket, between 0 and alpha_min
        lo, hi, at_edge = 0.0, alpha_min, True
    else:
        lo, hi, at_edge = alpha_min, alpha_max, False

    alpha = 0.5 * (lo + hi) if at_edge else math.sqrt(lo * hi)
    n = 0
    for n in range(1, max_iter + 1):
        fa = f(alpha)
        if fa > 0:
            lo = alpha
        else:
            hi = alpha
        if abs(fa) <= 1e-9 * max(1.0, d) or hi - lo <= 1e-15 * max(hi, 1e-12):
            break
        slope = scale * k * _dg(alpha * k)
        nxt = alpha - fa / slope if slope < 0 else None
        if nxt is None or not lo < nxt < hi:
            nxt = 0.5 * (lo + hi) if lo == 0.0 or hi / lo < 4 else math.sqrt(lo * hi)
        alpha = nxt
    return _finish(alpha, v0, A, at_edge, n, tol_s, tol_v, d)


def _finish(alpha, v0, A, at_edge, n, tol_s, tol_v, d):
    T = profile_stop_time(alpha, v0, A)
    s_err = abs(profile_distance(alpha, v0, A) - d)
    v_err = abs(profile_speed(T, alpha, v0, A))
    if s_err > tol_s or v_err > tol_v:
        return TypeBSolution(False, reason=f"no convergence (|ds|={s_err:.3g}, |v|={v_err:.3g})",
                             iterations=n)
    return TypeBSolution(True, alpha, T, A, at_edge, "", n)


@dataclass
class TypeBController:
    """Pre-trigger: re-plan every tick, fire once the plan's final
    deceleration reaches a_max_frac * mu * g - a_tuned. Post-trigger: follow
    the planned exponential, capped at a_max_frac * mu * g.

    When tyre-based friction estimates disagree with the planning friction
    by more than ``resolve_threshold``, the profile is re-planned from the
    current speed, distance and deceleration. A re-planned profile may use
    the full estimated friction instead of the steerability cap; if no
    exponential fits any more, it asks for the full friction limit at once.
    """

    params: TypeBParams = field(default_factory=TypeBParams)
    g: float = G
    triggered: bool = False
    stopped: bool = False
    mu_plan: float | None = None
    cap: float | None = None
    solution: TypeBSolution | None = None
    start_tick: int = 0
    resolves: int = 0
    _tyre_sum: float = 0.0
    _tyre_n: int = 0

    def plan_distance(self, dist_to_conflict: float, ego_speed: float) -> float:
        p = self.params
        return dist_to_conflict - p.intersection_offset - p.stop_margin - ego_speed * p.lag_comp

    def trigger_level(self, mu: float) -> float:
        p = self.params
        return p.a_max_frac * mu * self.g - p.a_tuned

    def plan(self, dist_to_conflict, ego_speed, mu, a_current) -> TypeBSolution | None:
        d = self.plan_distance(dist_to_conflict, ego_speed)
        if ego_speed <= 0 or d <= 0:
            return None
        A = -max(self.params.k_min * mu * self.g, abs(a_current))
        return type_b_solve(ego_speed, d, A)

    def feed_tyre(self, mu_estimate: float | None):
        if mu_estimate is not None:
            self._tyre_sum += mu_estimate
            self._tyre_n += 1

    @property
    def tyre_mean(self) -> float | None:
        if self._tyre_n < self.params.min_tyre_samples:
            return None
        return self._tyre_sum / self._tyre_n

    def request_at(self, tick: int, dt: float) -> float:
        sol = self.solution
        if sol is None:
            return -self.cap
        a = sol.A * math.exp(sol.alpha * (tick - self.start_tick) * dt)
        return max(a, -self.cap, NO_REQUEST)

    def step(self, risk, mu_known, ego_speed, a_current, tick, dt, active=True,
             stopped=False) -> AebCommand:
        if self.stopped:
            return IDLE
        if not self.triggered:
            if risk is None or risk.ttc is None or mu_known is None or not active:
                return IDLE
            sol = self.plan(risk.dist_to_conflict, ego_speed, mu_known, a_current)
            if sol is None or not sol.feasible or sol.terminal_decel < self.trigger_level(mu_known):
                return IDLE
            self.triggered = True
            self.mu_plan = mu_known
            self.cap = self.params.a_max_frac * mu_known * self.g
            self.solution, self.start_tick = sol, tick
            return AebCommand(self.request_at(tick, dt), True, Source.EXP_PROFILE)
        if stopped:
            self.stopped = True
            return IDLE
        est = self.tyre_mean
        if est is not None and abs(est - self.mu_plan) > self.params.resolve_threshold \
                and risk is not None and risk.dist_to_conflict is not None:
            self._replan(risk.dist_to_conflict, ego_speed, est, a_current, tick)
        return AebCommand(self.request_at(tick, dt), False, Source.EXP_PROFILE)

    def _replan(self, dist, ego_speed, mu, a_current, tick):
        self.mu_plan = mu
        self.resolves += 1
        self.cap = mu * self.g
        sol = self.plan(dist, ego_speed, mu, a_current)
        if sol is not None and sol.feasible and sol.terminal_decel <= self.cap:
            self.solution, self.start_tick = sol, tick
        else:
            self.solution = None


def type_b_step(ctrl: TypeBController, risk, mu_known, ego_speed, a_current, tick, dt,
                active=True, stopped=False) -> AebCommand:
    return ctrl.step(risk, mu_known, ego_speed, a_current, tick, dt, active, stopped)
