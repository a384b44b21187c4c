import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lowgrip.core import (
    DataError,
    Deformable,
    HardSurface,
    ManeuverId,
    Scenario,
    Trajectory,
    VehicleParams,
    current_from_torque,
    min_obstacle_distance,
    torque_from_current,
)

coord = st.floats(-20, 20, allow_nan=False)
paths = st.lists(st.tuples(coord, coord), min_size=1, max_size=12)


def test_vehicle_defaults():
    p = VehicleParams()
    assert (p.mass_kg, p.wheel_radius_m, p.wheel_width_m, p.gravity_mps2) == (14.85, 0.1, 0.07, 9.81)
    assert p.max_steer_rad == pytest.approx(0.4363, abs=1e-4)


@pytest.mark.parametrize("kw", [{"mass_kg": 0}, {"wheel_radius_m": -1}, {"max_steer_rad": 2.0}])
def test_vehicle_invalid(kw):
    with pytest.raises(ValueError):
        VehicleParams(**kw)


def test_ground_invariants():
    with pytest.raises(ValueError):
        HardSurface(0.0)
    with pytest.raises(ValueError):
        HardSurface(2.5)
    with pytest.raises(ValueError):
        Deformable(0.0, 1e3, 0.5)
    with pytest.raises(ValueError):
        Deformable(0.01, -1.0, 0.5)
    with pytest.raises(ValueError):
        Deformable(0.01, 0.0, math.pi / 2)
    g = Deformable.from_table(0.03, 74, 31)
    assert g.cohesion_pa == 74e3 and g.cohesion_kpa == pytest.approx(74)
    assert g.shear_angle_deg == pytest.approx(31)


def test_scenario_invariants():
    assert Scenario(1.0, HardSurface(0.5)).obstacle == (6.0, 0.0)
    with pytest.raises(ValueError):
        Scenario(0.0, HardSurface(0.5))
    with pytest.raises(ValueError):
        Scenario(1.0, HardSurface(0.5), obstacle_distance_m=0.0)


def test_maneuver_enum():
    assert [int(m) for m in ManeuverId] == [1, 2, 3, 4, 5]
    assert [m.brake for m in ManeuverId] == ["lock", "abs", None, "lock", "abs"]
    assert [m.steers for m in ManeuverId] == [False, False, True, True, True]


def test_trajectory_times_increasing():
    with pytest.raises(ValueError):
        Trajectory(((0.0, 0, 0, 0, 0), (0.0, 1, 0, 0, 0)))


def test_distance_examples():
    assert min_obstacle_distance([(0.0, 0.0)], (6.0, 0.0)) == 6.0
    assert min_obstacle_distance([(0.0, 0.0), (10.0, 0.0)], (6.0, 0.0)) == 0.0
    assert min_obstacle_distance([(0.0, 1.0), (10.0, 1.0)], (6.0, 0.0)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DataError, match="empty trajectory"):
        min_obstacle_distance([], (6.0, 0.0))


def test_distance_matches_dense_sampling():
    pts = [(0.0, 1.0), (3.0, 2.0), (7.0, -0.5), (10.0, 1.0)]
    dense = []
    for (ax, ay), (bx, by) in zip(pts, pts[1:]):
        for u in np.linspace(0, 1, 20001):
            dense.append(math.hypot(ax + u * (bx - ax) - 6, ay + u * (by - ay)))
    assert min_obstacle_distance(pts, (6.0, 0.0)) == pytest.approx(min(dense), abs=1e-6)


@given(paths, st.tuples(coord, coord), st.floats(0, 2 * math.pi), st.tuples(coord, coord))
def test_distance_rigid_invariance(pts, obs, angle, shift):
    c, s = math.cos(angle), math.sin(angle)

    def tf(p):
        return (c * p[0] - s * p[1] + shift[0], s * p[0] + c * p[1] + shift[1])

    d0 = min_obstacle_distance(pts, obs)
    d1 = min_obstacle_distance([tf(p) for p in pts], tf(obs))
    assert abs(d0 - d1) <= 1e-9 * max(1.0, d0)


@given(paths, st.tuples(coord, coord))
def test_distance_bounded_by_samples(pts, obs):
    d = min_obstacle_distance(pts, obs)
    assert d <= min(math.hypot(x - obs[0], y - obs[1]) for x, y in pts) + 1e-12
    assert d >= 0.0


@given(paths, st.tuples(coord, coord), st.integers(1, 5))
def test_distance_densify(pts, obs, k):
    dense = [pts[0]]
    for a, b in zip(pts, pts[1:]):
        for i in range(1, k + 1):
            u = i / k
            dense.append((a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])))
    assert min_obstacle_distance(dense, obs) <= min_obstacle_distance(pts, obs) + 1e-9


def test_torque_current():
    assert torque_from_current(0.0, 0.3) == 0.0
    assert torque_from_current(2.0, 0.05) == pytest.approx(0.1)
    assert current_from_torque(torque_from_current(1.7, 0.5), 0.5) == pytest.approx(1.7)
    with pytest.raises(ValueError):
        torque_from_current(1.0, 0.0)
