"""Shared domain types and the obstacle-clearance metric.

All quantities are SI. Cohesion is carried in Pa; kPa only appears at the
CSV / CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Sequence, Tuple, Union


class LowgripError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class DataError(LowgripError):
    """Malformed or insufficient input data."""

    exit_code = 2


class NumericalError(LowgripError):
    """A numerical procedure could not produce a trustworthy result."""

    exit_code = 3


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class VehicleParams:
    mass_kg: float = 14.85
    wheel_radius_m: float = 0.1
    wheel_width_m: float = 0.07
    max_steer_rad: float = math.radians(25.0)
    gravity_mps2: float = 9.81

    def __post_init__(self):
        for name in ("mass_kg", "wheel_radius_m", "wheel_width_m", "max_steer_rad", "gravity_mps2"):
            _require(getattr(self, name) > 0, f"{name} must be strictly positive")
        _require(self.max_steer_rad <= math.pi / 2, "max_steer_rad must be <= pi/2")

    @property
    def weight_N(self) -> float:
        return self.mass_kg * self.gravity_mps2


@dataclass(frozen=True)
class HardSurface:
    mu: float

    kind = "hard"

    def __post_init__(self):
        _require(0.0 < self.mu <= 2.0, f"mu must lie in (0, 2], got {self.mu}")


@dataclass(frozen=True)
class Deformable:
    sinkage_m: float
    cohesion_pa: float
    shear_angle_rad: float

    kind = "deformable"

    def __post_init__(self):
        _require(self.sinkage_m > 0.0, "sinkage must be > 0")
        _require(self.cohesion_pa >= 0.0, "cohesion must be >= 0")
        _require(0.0 < self.shear_angle_rad < math.pi / 2, "shear angle must lie in (0, pi/2)")

    @classmethod
    def from_table(cls, sinkage_m: float, cohesion_kpa: float, shear_angle_deg: float) -> "Deformable":
        return cls(sinkage_m, cohesion_kpa * 1e3, math.radians(shear_angle_deg))

    @property
    def cohesion_kpa(self) -> float:
        return self.cohesion_pa / 1e3

    @property
    def shear_angle_deg(self) -> float:
        return math.degrees(self.shear_angle_rad)


GroundModel = Union[HardSurface, Deformable]

# Ground conditions used in the 1/5-scale test campaign.
HARD_GROUNDS = {
    "plastic-polyethylene": 0.25,
    "rubber-linoleum": 0.45,
    "rubber-rubber": 0.9,
}
# (cohesion kPa, internal shear angle deg)
SOILS = {
    "poorly-graded-sand": (0.0, 35.0),
    "clayey-sand-compacted": (74.0, 31.0),
    "clay-loam-compacted": (83.0, 25.0),
    "clay-loam-saturated": (15.0, 25.0),
}


@dataclass(frozen=True)
class SensorFrame:
    t_s: float
    a_imu_mps2: float
    x_lidar_m: float
    y_lidar_m: float
    omega_f_radps: float
    omega_r_radps: float
    torque_est_Nm: float
    lidar_fresh: bool = True

    def __post_init__(self):
        vals = (self.t_s, self.a_imu_mps2, self.x_lidar_m, self.y_lidar_m,
                self.omega_f_radps, self.omega_r_radps, self.torque_est_Nm)
        _require(all(math.isfinite(v) for v in vals), "sensor frame contains non-finite values")


@dataclass(frozen=True)
class Scenario:
    v0_mps: float
    ground: GroundModel
    obstacle_distance_m: float = 6.0

    def __post_init__(self):
        _require(self.v0_mps > 0, "v0 must be > 0")
        _require(self.obstacle_distance_m > 0, "obstacle distance must be > 0")

    @property
    def obstacle(self) -> Tuple[float, float]:
        return (self.obstacle_distance_m, 0.0)


class ManeuverId(IntEnum):
    Brake100 = 1
    BrakeABS = 2
    Turn100 = 3
    Turn100Brake100 = 4
    Turn100BrakeABS = 5

    @property
    def steers(self) -> bool:
        return self in (ManeuverId.Turn100, ManeuverId.Turn100Brake100, ManeuverId.Turn100BrakeABS)

    @property
    def brake(self) -> str | None:
        """'lock', 'abs' or None."""
        if self in (ManeuverId.Brake100, ManeuverId.Turn100Brake100):
            return "lock"
        if self in (ManeuverId.BrakeABS, ManeuverId.Turn100BrakeABS):
            return "abs"
        return None

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    ManeuverId.Brake100: "Brake 100%",
    ManeuverId.BrakeABS: "Brake ABS",
    ManeuverId.Turn100: "Turn 100%",
    ManeuverId.Turn100Brake100: "Turn 100%, Brake 100%",
    ManeuverId.Turn100BrakeABS: "Turn 100%, Brake ABS",
}


@dataclass(frozen=True)
class Trajectory:
    """Samples of (t, x, y, v, omega_f), starting at the origin heading +x."""

    samples: Tuple[Tuple[float, float, float, float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.samples:
            return
        ts = [s[0] for s in self.samples]
        _require(all(b > a for a, b in zip(ts, ts[1:])), "trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(s[1], s[2]) for s in self.samples]


@dataclass(frozen=True)
class ManeuverOutcome:
    scenario: Scenario
    maneuver: ManeuverId
    min_distance_m: float
    status: str = "ok"


def _point_segment_distance(px: float, py: float, ax: float, ay: float, bx: float, by: float) -> float:
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return math.hypot(px - ax, py - ay)
    u = ((px - ax) * dx + (py - ay) * dy) / seg2
    u = min(1.0, max(0.0, u))
    return math.hypot(px - (ax + u * dx), py - (ay + u * dy))


def min_obstacle_distance(traj: Union[Trajectory, Sequence[Tuple[float, float]]],
                          obstacle: Tuple[float, float]) -> float:
    """Smallest Euclidean distance between the piecewise-linear path and a point.

    Accepts a Trajectory or a plain sequence of (x, y) points.
    """
    pts = traj.points if isinstance(traj, Trajectory) else [(p[0], p[1]) for p in traj]
    if not pts:
        raise DataError("empty trajectory")
    ox, oy = obstacle
    if len(pts) == 1:
        return math.hypot(pts[0][0] - ox, pts[0][1] - oy)
    best = math.inf
    for (ax, ay), (bx, by) in zip(pts, pts[1:]):
        d = _point_segment_distance(ox, oy, ax, ay, bx, by)
        if d < best:
            best = d
    return best


def torque_from_current(current_A: float, motor_constant_NmPerA: float) -> float:
    if motor_constant_NmPerA <= 0:
        raise ValueError("motor constant must be > 0")
    return motor_constant_NmPerA * current_A


def current_from_torque(torque_Nm: float, motor_constant_NmPerA: float) -> float:
    if motor_constant_NmPerA <= 0:
        raise ValueError("motor constant must be > 0")
    return torque_Nm / motor_constant_NmPerA
