import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from iaeb.dynamics import G, BrakeActuator, FrictionField, VehicleState, achievable_decel, apply_brake


def test_uniform_motion_without_brake():
    ego = VehicleState((0.0, 0.0), math.pi / 2, 16.67)
    out = apply_brake(ego, BrakeActuator(), 0.85, 0.001)
    assert out.pos[1] == pytest.approx(0.01667, abs=1e-12)
    assert out.pos[0] == pytest.approx(0.0, abs=1e-15)
    assert out.speed == 16.67 and out.accel == 0.0


def test_rest_is_a_fixed_point():
    v = VehicleState((1.0, 2.0), 0.3, 0.0)
    act = BrakeActuator(pedal=1.0)
    out = apply_brake(v, act, 0.85, 0.001)
    assert out.pos == v.pos and out.speed == 0.0 and out.accel == 0.0


def test_vehicle_validation():
    with pytest.raises(ValueError):
        VehicleState((0, 0), 0, -1.0)
    with pytest.raises(ValueError):
        VehicleState((0, 0), 0, 1.0, length=0)


def test_nose_is_half_length_ahead():
    v = VehicleState((1.0, 1.0), math.pi / 2, 5.0, length=4.0)
    assert v.nose == pytest.approx((1.0, 3.0))


def test_actuator_lag_reaches_one_minus_inverse_e_after_tau():
    # exact discretisation: after n steps the lagged pedal is 1 - exp(-n dt / tau)
    act = BrakeActuator(pedal=1.0)
    for _ in range(150):
        act.advance(0.001)
    assert act.lagged == pytest.approx(1 - math.exp(-1), rel=1e-12)  # 0.6321205588...


def test_actuator_without_lag_is_immediate():
    act = BrakeActuator(tau_act=0.0, pedal=0.4)
    assert act.advance(0.001) == 0.4


def test_friction_caps_deceleration():
    assert achievable_decel(1.0, BrakeActuator(), 0.85) == pytest.approx(0.85 * G)
    assert achievable_decel(0.5, BrakeActuator(), 0.85) == pytest.approx(5.5)


def test_full_pedal_saturates_at_mu_g():
    v = VehicleState((0, 0), 0, 20.0)
    act = BrakeActuator(pedal=1.0)
    peak = 0.0
    for _ in range(2000):
        v = apply_brake(v, act, 0.4, 0.001)
        peak = max(peak, -v.accel)
    assert peak == pytest.approx(0.4 * G)
    assert peak <= 3.924 + 1e-12


def test_friction_field_validation_and_map_default():
    f = FrictionField(0.4)
    assert f.map_value == 0.4 and f.limit == pytest.approx(0.4 * G)
    assert FrictionField(0.4, 0.6).map_value == 0.6
    with pytest.raises(ValueError):
        FrictionField(0.0)
    with pytest.raises(ValueError):
        FrictionField(0.4, 1.3)


@given(st.floats(0, 40), st.floats(0, 1), st.floats(0.05, 1.2), st.integers(1, 400))
def test_braking_never_increases_speed_and_never_goes_negative(v0, pedal, mu, n):
    v = VehicleState((0, 0), 1.0, v0)
    act = BrakeActuator(pedal=pedal)
    for _ in range(n):
        nxt = apply_brake(v, act, mu, 0.001)
        assert 0.0 <= nxt.speed <= v.speed
        assert -nxt.accel <= mu * G + 1e-12
        v = nxt
