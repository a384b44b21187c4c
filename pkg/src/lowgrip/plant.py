"""Deterministic vehicle plant, emergency-maneuver controllers and sensor synthesis.

The plant is a lumped single-track model: one braked/driven front wheel
carrying the normal load of the whole car, a free-rolling rear wheel, and a
kinematic bicycle for heading with the lateral acceleration saturated by the
friction circle.

Wheel-ground contact is expressed as a single function ``G(s_x)``: the
torque about the wheel axle that the ground applies when the wheel runs at
slip ``s_x`` (positive pushes the car forward and resists wheel spin-up).
It is tabulated once per (ground, vehicle, config) and the wheel is
integrated implicitly against it, so the stiff tire dynamics stay stable at
the drive-loop rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    DataError,
    Deformable,
    GroundModel,
    HardSurface,
    LowgripError,
    ManeuverId,
    ManeuverOutcome,
    Scenario,
    SensorFrame,
    Trajectory,
    VehicleParams,
    _point_segment_distance,
    min_obstacle_distance,
)

FAST_RATE_HZ = 90.0
STOP_SPEED = 0.01
MAX_SIM_TIME = 60.0


class RunawayRollout(LowgripError):
    exit_code = 3


@dataclass(frozen=True)
class TireCurveConfig:
    """rho(s) rises linearly to mu at the breakpoint, then plateaus.

    ``sliding_ratio < 1`` makes the plateau sag linearly to ``sliding_ratio * mu``
    at full lock (peaked curve); the default keeps the flat plateau.
    """

    slip_breakpoint: float = 0.03
    sliding_ratio: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.slip_breakpoint < 1.0:
            raise ValueError("slip_breakpoint must lie in (0, 1)")
        if not 0.0 < self.sliding_ratio <= 1.0:
            raise ValueError("sliding_ratio must lie in (0, 1]")

    def rho(self, s_x: float, mu: float) -> float:
        a = abs(s_x)
        bp = self.slip_breakpoint
        if a <= bp:
            return mu * s_x / bp
        sag = (1.0 - self.sliding_ratio) * (min(a, 1.0) - bp) / (1.0 - bp)
        return math.copysign(mu * (1.0 - sag), s_x)


@dataclass(frozen=True)
class PlantConfig:
    tire: TireCurveConfig = field(default_factory=TireCurveConfig)
    wheel_inertia_kgm2: float = 0.01      # lumped front wheels + reflected rotor
    wheelbase_m: float = 0.5
    steer_rate_radps: float = 4.0
    rolling_resistance: float = 0.02      # fraction of available friction
    compaction_per_m: float = 3.0         # resistance / weight, per metre of sinkage
    thin_layer_m: float = 5e-4            # sinkage scale below which the tread bears on the substrate
    cornering_drag_share: float = 0.5     # share of lateral force carried by the steered axle
    brake_gain_Nms: float = 8.0
    brake_torque_max_Nm: float = 30.0
    torque_slew_Nmps: float = 3000.0     # current build-up rate limit of the motor drive
    abs_threshold: float = 0.03
    abs_hysteresis: float = 0.01
    motor_constant_NmPerA: float = 0.5
    substeps: int = 10                    # drive-loop steps per 90 Hz frame
    abs_substeps: int = 80                # the ABS switching loop runs faster
    table_points: int = 4001


@dataclass(frozen=True)
class PlantState:
    x_m: float = 0.0
    y_m: float = 0.0
    heading_rad: float = 0.0
    v_mps: float = 0.0
    omega_f_radps: float = 0.0
    omega_r_radps: float = 0.0
    steer_rad: float = 0.0

    def as_tuple(self) -> tuple:
        return (self.x_m, self.y_m, self.heading_rad, self.v_mps,
                self.omega_f_radps, self.omega_r_radps, self.steer_rad)


@dataclass(frozen=True)
class NoiseConfig:
    imu_accel_std: float = 0.05
    lidar_pos_std: float = 0.01
    encoder_std: float = 0.005
    torque_std: float = 0.02
    lidar_rate_hz: float = 10.0
    fast_rate_hz: float = FAST_RATE_HZ
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("imu_accel_std", "lidar_pos_std", "encoder_std", "torque_std"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.lidar_rate_hz <= 0 or self.fast_rate_hz <= 0:
            raise ValueError("rates must be > 0")

    @classmethod
    def noiseless(cls, **kw) -> "NoiseConfig":
        return cls(imu_accel_std=0.0, lidar_pos_std=0.0, encoder_std=0.0, torque_std=0.0, **kw)


# ---------------------------------------------------------------------------
# wheel-soil forward model


def soil_stress_torque(zeta: float, ground: Deformable, params: VehicleParams) -> float:
    """Axle torque balancing the soil at braking-convention slip ``zeta``.

    Normal and shear stress are tent profiles over the contact arc, zero at
    the entry angle beta and at the bottom, peaking at beta/2. The peak
    shear follows a Mohr-Coulomb law with a mobilization factor alpha(zeta)
    plus a constant adhesion share ``c/2``:

        tau_m = alpha * (c + sigma_m * tan(phi)) + c / 2

    Vertical equilibrium W = R b (sigma_m * Ic + tau_m * Is) then fixes
    sigma_m and tau_m, and the axle torque is R^2 b tau_m beta / 2.
    """
    R, b = params.wheel_radius_m, params.wheel_width_m
    z, c, tphi = ground.sinkage_m, ground.cohesion_pa, math.tan(ground.shear_angle_rad)
    if z >= R:
        raise DataError("wheel buried")
    beta = math.acos((R - z) / R)
    half = beta / 2.0
    # integrals of the unit tent against cos and sin over [0, beta]
    ic = (2.0 * math.cos(half) - 1.0 - math.cos(beta)) / half
    is_ = (2.0 * math.sin(half) - math.sin(beta)) / half
    alpha = 1.0 - math.exp((R / b) * (half + (1.0 - zeta) * (math.sin(half) - math.sin(beta))))
    W = params.weight_N
    # tau_m - alpha*tphi*sigma_m = c*(alpha + 1/2);  ic*sigma_m + is*tau_m = W/(R b)
    a11, a12, r1 = -alpha * tphi, 1.0, c * (alpha + 0.5)
    a21, a22, r2 = ic, is_, W / (R * b)
    det = a11 * a22 - a12 * a21
    tau_m = (a11 * r2 - a21 * r1) / det
    return R * R * b * tau_m * half


def _slip_to_zeta(s: float) -> float:
    # s <= 0: omega R <= v  -> zeta = -s ; s > 0: v = (1 - s) omega R
    if s <= 0.0:
        return -s
    return 1.0 - 1.0 / max(1.0 - s, 1e-9)


@dataclass(frozen=True)
class ContactModel:
    """Tabulated contact torque ``G(s)`` plus resistances for one ground."""

    s_nodes: Tuple[float, ...]
    g_nodes: Tuple[float, ...]
    lateral_mu: float
    resist_accel: float   # m/s^2 of speed-independent rolling/compaction drag

    def torque(self, s: float) -> float:
        n = len(self.s_nodes) - 1
        u = (s + 1.0) * 0.5 * n
        i = min(n - 1, max(0, int(u)))
        f = u - i
        return self.g_nodes[i] + f * (self.g_nodes[i + 1] - self.g_nodes[i])


@lru_cache(maxsize=256)
def contact_model(ground: GroundModel, params: VehicleParams, cfg: PlantConfig) -> ContactModel:
    n = cfg.table_points - 1
    s_nodes = tuple(-1.0 + 2.0 * i / n for i in range(n + 1))
    W, R, g = params.weight_N, params.wheel_radius_m, params.gravity_mps2
    tire = cfg.tire
    if isinstance(ground, HardSurface):
        mu = ground.mu
        g_nodes = tuple(R * W * tire.rho(s, mu) for s in s_nodes)
        return ContactModel(s_nodes, g_nodes, mu, cfg.rolling_resistance * mu * g)
    if ground.sinkage_m >= R:
        raise DataError("wheel buried")
    beta = math.acos((R - ground.sinkage_m) / R)
    tphi = math.tan(ground.shear_angle_rad)
    area = params.wheel_width_m * R * beta
    mu_thin = tphi + ground.cohesion_pa * area / W
    w = math.exp(-ground.sinkage_m / cfg.thin_layer_m)
    nodes = []
    for s in s_nodes:
        zeta = _slip_to_zeta(s)
        t_soil = soil_stress_torque(zeta, ground, params)
        # the soil only ever dissipates: keep torque whose power T*zeta*v/R <= 0
        if t_soil * zeta > 0.0:
            t_soil = 0.0
        t_thin = R * W * tire.rho(s, mu_thin)
        nodes.append((1.0 - w) * t_soil + w * t_thin)
    resist = g * ((1.0 - w) * cfg.compaction_per_m * ground.sinkage_m
                  + w * cfg.rolling_resistance * mu_thin)
    return ContactModel(s_nodes, tuple(nodes), mu_thin, resist)


# ---------------------------------------------------------------------------
# integrator


def _wheel_implicit(cm: ContactModel, omega: float, v: float, torque: float,
                    J: float, R: float, dt: float, hint: int) -> Tuple[float, int]:
    """Solve J (w' - w)/dt = torque - G(s(w', v)) for w' >= 0.

    H(s) = J (w'(s) - w)/dt - torque + G(s) is increasing in s, so the root
    is bracketed by a pair of table nodes; found by a warm-started search.
    """
    nodes_s, nodes_g = cm.s_nodes, cm.g_nodes
    n = len(nodes_s) - 1
    v = max(v, 1e-3)
    k = J / dt
    inv_vr = v / R

    def H(i: int) -> float:
        s = nodes_s[i]
        w = inv_vr * (1.0 + s) if s <= 0.0 else (inv_vr / (1.0 - s) if s < 1.0 else math.inf)
        return k * (w - omega) - torque + nodes_g[i]

    if H(0) >= 0.0:
        return 0.0, 0
    top = n - 1
    if H(top) <= 0.0:
        i = top - 1
    else:
        i = min(max(hint, 0), top - 1)
        if not (H(i) <= 0.0 < H(i + 1)):
            lo, hi = 0, top
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if H(mid) <= 0.0:
                    lo = mid
                else:
                    hi = mid
            i = lo
    s0, s1 = nodes_s[i], nodes_s[i + 1]
    g0, g1 = nodes_g[i], nodes_g[i + 1]
    if s1 <= 0.0:
        # exact: w' and G both linear in s on this segment
        # k*(inv_vr*(1+s) - omega) - torque + g0 + (g1-g0)(s-s0)/(s1-s0) = 0
        slope_g = (g1 - g0) / (s1 - s0)
        s = (torque - g0 + slope_g * s0 - k * (inv_vr - omega)) / (k * inv_vr + slope_g)
        s = min(s1, max(s0, s))
        return inv_vr * (1.0 + s), i
    h0, h1 = H(i), H(i + 1)
    if not math.isfinite(h1):
        return inv_vr / (1.0 - s0), i
    f = h0 / (h0 - h1) if h1 != h0 else 0.0
    s = s0 + f * (s1 - s0)
    return inv_vr / (1.0 - s), i


def _advance(cm: ContactModel, st: tuple, torque: float, steer_cmd: float,
             params: VehicleParams, cfg: PlantConfig, dt: float, hint: int = 0):
    x, y, psi, v, wf, wr, steer = st
    R, m, g = params.wheel_radius_m, params.mass_kg, params.gravity_mps2
    lim = params.max_steer_rad
    steer_cmd = max(-lim, min(lim, steer_cmd))
    dmax = cfg.steer_rate_radps * dt
    steer += max(-dmax, min(dmax, steer_cmd - steer))

    wf_new, hint = _wheel_implicit(cm, wf, v, torque, cfg.wheel_inertia_kgm2, R, dt, hint)
    # same speed floor as the wheel solve, so wheel and car see one slip
    v_eff = max(v, 1e-3)
    s = (wf_new * R - v_eff) / max(wf_new * R, v_eff)
    ax = cm.torque(s) / (R * m)

    # friction circle on what the tires have left after the longitudinal force; a
    # sliding front wheel pushes along its sliding velocity and stops steering the car
    bp = cfg.tire.slip_breakpoint
    steerable = min(1.0, max(0.0, (1.0 - abs(s)) / (1.0 - bp)))
    ay_cap = steerable * math.sqrt(max(0.0, (cm.lateral_mu * g) ** 2 - ax * ax))
    yaw = v * math.tan(steer) / cfg.wheelbase_m
    ay = v * yaw
    if abs(ay) > ay_cap:
        yaw = math.copysign(ay_cap / v, yaw) if v > 0 else 0.0
        ay = v * yaw
    drag = cfg.cornering_drag_share * abs(ay) * math.sin(abs(steer))
    a = ax - (cm.resist_accel + drag if v > 0.0 else 0.0)
    v_new = v + a * dt
    if v_new < 0.0:
        v_new = 0.0
    psi += yaw * dt
    x += v_new * math.cos(psi) * dt
    y += v_new * math.sin(psi) * dt
    return (x, y, psi, v_new, wf_new, v_new / R, steer), hint, s


def _check_dt(dt_s: float) -> None:
    if not 0.0 < dt_s <= 0.02:
        raise ValueError(f"dt must lie in (0, 0.02], got {dt_s}")


def step_hard(state: PlantState, drive_torque_Nm: float, steer_cmd_rad: float, ground: HardSurface,
              params: VehicleParams, dt_s: float, cfg: Optional[PlantConfig] = None) -> PlantState:
    _check_dt(dt_s)
    cfg = cfg or PlantConfig()
    cm = contact_model(ground, params, cfg)
    out, _, _ = _advance(cm, state.as_tuple(), drive_torque_Nm, steer_cmd_rad, params, cfg, dt_s)
    return PlantState(*out)


def step_deformable(state: PlantState, drive_torque_Nm: float, steer_cmd_rad: float, ground: Deformable,
                    params: VehicleParams, dt_s: float, cfg: Optional[PlantConfig] = None) -> PlantState:
    _check_dt(dt_s)
    if ground.sinkage_m >= params.wheel_radius_m:
        raise DataError("wheel buried")
    cfg = cfg or PlantConfig()
    cm = contact_model(ground, params, cfg)
    out, _, _ = _advance(cm, state.as_tuple(), drive_torque_Nm, steer_cmd_rad, params, cfg, dt_s)
    return PlantState(*out)


def step(state: PlantState, drive_torque_Nm: float, steer_cmd_rad: float, ground: GroundModel,
         params: VehicleParams, dt_s: float, cfg: Optional[PlantConfig] = None) -> PlantState:
    if isinstance(ground, HardSurface):
        return step_hard(state, drive_torque_Nm, steer_cmd_rad, ground, params, dt_s, cfg)
    return step_deformable(state, drive_torque_Nm, steer_cmd_rad, ground, params, dt_s, cfg)


def kinetic_energy(state: PlantState, params: VehicleParams, cfg: Optional[PlantConfig] = None) -> float:
    cfg = cfg or PlantConfig()
    return 0.5 * params.mass_kg * state.v_mps ** 2 + 0.5 * cfg.wheel_inertia_kgm2 * state.omega_f_radps ** 2


# ---------------------------------------------------------------------------
# maneuver controllers


def wheel_slip(v: float, omega: float, R: float) -> float:
    denom = max(omega * R, v)
    return 0.0 if denom <= 1e-3 else (omega * R - v) / denom


def brake_torque(omega_f: float, cfg: PlantConfig) -> float:
    """Saturated proportional velocity loop driving the front wheels to 0 rad/s."""
    return -min(cfg.brake_torque_max_Nm, cfg.brake_gain_Nms * max(omega_f, 0.0))


def update_abs_latch(released: bool, s_x: float, cfg: PlantConfig) -> bool:
    if abs(s_x) > cfg.abs_threshold:
        return True
    if abs(s_x) < cfg.abs_threshold - cfg.abs_hysteresis:
        return False
    return released


def maneuver_controller(maneuver: ManeuverId, state: PlantState, params: VehicleParams,
                        cfg: Optional[PlantConfig] = None, abs_released: bool = False) -> Tuple[float, float]:
    """(front drive torque, steer command) for one of the five maneuvers.

    ``abs_released`` is the ABS latch; see :class:`ManeuverController` for
    the stateful form that keeps it between calls.
    """
    cfg = cfg or PlantConfig()
    maneuver = ManeuverId(maneuver)
    steer = params.max_steer_rad if maneuver.steers else 0.0
    mode = maneuver.brake
    if mode is None:
        return 0.0, steer
    if mode == "abs" and abs_released:
        return 0.0, steer
    return brake_torque(state.omega_f_radps, cfg), steer


class ManeuverController:
    def __init__(self, maneuver: ManeuverId, params: VehicleParams, cfg: Optional[PlantConfig] = None):
        self.maneuver = ManeuverId(maneuver)
        self.params = params
        self.cfg = cfg or PlantConfig()
        self.abs_released = False

    def __call__(self, state: PlantState) -> Tuple[float, float]:
        if self.maneuver.brake == "abs":
            s = wheel_slip(state.v_mps, state.omega_f_radps, self.params.wheel_radius_m)
            self.abs_released = update_abs_latch(self.abs_released, s, self.cfg)
        return maneuver_controller(self.maneuver, state, self.params, self.cfg, self.abs_released)


# ---------------------------------------------------------------------------
# rollouts


@dataclass
class Rollout:
    """Frame-rate record of a simulation: states, applied torques, slip."""

    dt_s: float
    times: List[float]
    states: List[PlantState]
    torques: List[float]

    def trajectory(self) -> Trajectory:
        return Trajectory(tuple((t, s.x_m, s.y_m, s.v_mps, s.omega_f_radps)
                                for t, s in zip(self.times, self.states)))


def _slew(applied: float, cmd: float, dT: float) -> float:
    # current build-up is rate limited; cutting it (release) is immediate
    if abs(cmd) <= abs(applied) and cmd * applied >= 0.0:
        return cmd
    return applied + max(-dT, min(dT, cmd - applied))


def _simulate(ground: GroundModel, params: VehicleParams, cfg: PlantConfig, init: PlantState,
              command: Callable[[tuple, float], Tuple[float, float]], dt_s: float,
              done: Callable[[tuple, float], bool], t_max: float,
              n_sub: Optional[int] = None) -> Rollout:
    cm = contact_model(ground, params, cfg)
    n_sub = n_sub or cfg.substeps
    h = dt_s / n_sub
    st = init.as_tuple()
    t = 0.0
    times, states, torques = [0.0], [init], []
    hint = 0
    frame = 0
    dT = cfg.torque_slew_Nmps * h
    applied = 0.0  # cruising: no motor torque before the maneuver starts
    while True:
        frame_torque = applied
        for _ in range(n_sub):
            cmd, steer = command(st, h)
            applied = _slew(applied, cmd, dT)
            st, hint, _ = _advance(cm, st, applied, steer, params, cfg, h, hint)
        torques.append(frame_torque)
        frame += 1
        t = frame * dt_s
        times.append(t)
        states.append(PlantState(*st))
        if done(st, t):
            break
        if t >= t_max:
            raise RunawayRollout("runaway rollout")
    torques.append(applied)
    return Rollout(dt_s, times, states, torques)


def _maneuver_command(maneuver: ManeuverId, params: VehicleParams, cfg: PlantConfig):
    R = params.wheel_radius_m
    steer = params.max_steer_rad if maneuver.steers else 0.0
    mode = maneuver.brake
    latch = [False]

    def command(st, _h):
        if mode is None:
            return 0.0, steer
        wf = st[4]
        if mode == "abs":
            latch[0] = update_abs_latch(latch[0], wheel_slip(st[3], wf, R), cfg)
            if latch[0]:
                return 0.0, steer
        return brake_torque(wf, cfg), steer

    return command


def initial_state(v0: float, params: VehicleParams) -> PlantState:
    return PlantState(v_mps=v0, omega_f_radps=v0 / params.wheel_radius_m,
                      omega_r_radps=v0 / params.wheel_radius_m)


def rollout_maneuver(scn: Scenario, maneuver: ManeuverId, params: Optional[VehicleParams] = None,
                     dt_s: float = 1.0 / FAST_RATE_HZ, cfg: Optional[PlantConfig] = None,
                     stop: Optional[Callable[[tuple], bool]] = None) -> Rollout:
    """Frame-rate rollout until standstill or well past the obstacle.

    ``stop`` is an extra early-termination test on the raw state tuple.
    """
    params = params or VehicleParams()
    cfg = cfg or PlantConfig()
    _check_dt(dt_s)
    if isinstance(scn.ground, Deformable) and scn.ground.sinkage_m >= params.wheel_radius_m:
        raise DataError("wheel buried")
    x_limit = 2.0 * scn.obstacle_distance_m

    def done(st, _t):
        halt = stop is not None and stop(st)  # always called: it may track every frame
        return halt or st[3] < STOP_SPEED or st[0] > x_limit

    maneuver = ManeuverId(maneuver)
    n_sub = cfg.abs_substeps if maneuver.brake == "abs" else cfg.substeps
    return _simulate(scn.ground, params, cfg, initial_state(scn.v0_mps, params),
                     _maneuver_command(maneuver, params, cfg), dt_s, done, MAX_SIM_TIME, n_sub)


def run_maneuver(scn: Scenario, maneuver: ManeuverId, params: Optional[VehicleParams] = None,
                 dt_s: float = 1.0 / FAST_RATE_HZ,
                 cfg: Optional[PlantConfig] = None) -> Tuple[Trajectory, ManeuverOutcome]:
    ro = rollout_maneuver(scn, maneuver, params, dt_s, cfg)
    traj = ro.trajectory()
    d = min_obstacle_distance(traj, scn.obstacle)
    return traj, ManeuverOutcome(scn, ManeuverId(maneuver), d)


def maneuver_clearance(scn: Scenario, maneuver: ManeuverId, params: Optional[VehicleParams] = None,
                       dt_s: float = 1.0 / FAST_RATE_HZ, cfg: Optional[PlantConfig] = None) -> ManeuverOutcome:
    """Same distance as :func:`run_maneuver`, without simulating the tail that cannot matter.

    Resistance decelerates the car by at least ``resist_accel`` while it
    moves, so from kinetic energy E the remaining path is at most
    E / (m * resist_accel). Once the current distance minus that bound
    exceeds the best distance so far, the minimum is final.
    """
    params = params or VehicleParams()
    cfg = cfg or PlantConfig()
    cm = contact_model(scn.ground, params, cfg)
    ox, oy = scn.obstacle
    m, J = params.mass_kg, cfg.wheel_inertia_kgm2
    a_min = cm.resist_accel
    last = [0.0, 0.0]
    best = [math.hypot(ox, oy)]

    def stop(st):
        x, y = st[0], st[1]
        d = _point_segment_distance(ox, oy, last[0], last[1], x, y)
        last[0], last[1] = x, y
        if d < best[0]:
            best[0] = d
        if a_min <= 0.0:
            return False
        energy = 0.5 * m * st[3] ** 2 + 0.5 * J * st[4] ** 2
        reach = 1.05 * energy / (m * a_min) + 2.0 * st[3] * dt_s + 1e-3
        return math.hypot(x - ox, y - oy) - reach > best[0]

    rollout_maneuver(scn, maneuver, params, dt_s, cfg, stop)
    return ManeuverOutcome(scn, ManeuverId(maneuver), best[0])


def run_acceleration(ground: GroundModel, params: Optional[VehicleParams] = None, v_target: float = 3.0,
                     torque_max_Nm: float = 10.0, gain_Nms: float = 20.0, hold_s: float = 0.5,
                     dt_s: float = 1.0 / FAST_RATE_HZ, cfg: Optional[PlantConfig] = None) -> Rollout:
    """Straight run from rest to a speed set-point, then hold it for ``hold_s``."""
    params = params or VehicleParams()
    cfg = cfg or PlantConfig()
    reached = [None]

    def command(st, _h):
        return max(0.0, min(torque_max_Nm, gain_Nms * (v_target - st[3]))), 0.0

    def done(st, t):
        if reached[0] is None and st[3] >= 0.99 * v_target:
            reached[0] = t
        return reached[0] is not None and t - reached[0] >= hold_s

    return _simulate(ground, params, cfg, PlantState(), command, dt_s, done, MAX_SIM_TIME)


# ---------------------------------------------------------------------------
# sensors


def synthesize_sensors(states: Sequence[PlantState], torques: Sequence[float], noise: NoiseConfig,
                       params: Optional[VehicleParams] = None,
                       cfg: Optional[PlantConfig] = None, t0: float = 0.0) -> List[SensorFrame]:
    """Sensor frames at the fast rate from frame-rate plant states.

    LIDAR position is refreshed every ``fast_rate/lidar_rate`` frames and
    held in between (``lidar_fresh`` marks the refreshed ones), so N frames
    carry exactly floor(N / ratio) fresh readings.
    """
    params = params or VehicleParams()
    cfg = cfg or PlantConfig()
    if len(torques) != len(states):
        raise ValueError("need one torque per state")
    dt = 1.0 / noise.fast_rate_hz
    ratio = max(1, int(round(noise.fast_rate_hz / noise.lidar_rate_hz)))
    rng = np.random.default_rng(noise.rng_seed)
    n = len(states)
    v = np.array([s.v_mps for s in states])
    acc = np.zeros(n)
    if n > 1:
        acc[1:] = np.diff(v) / dt
        acc[0] = acc[1]
    e_imu = rng.normal(0.0, noise.imu_accel_std, n) if noise.imu_accel_std > 0 else np.zeros(n)
    e_wf = rng.normal(0.0, noise.encoder_std, n) if noise.encoder_std > 0 else np.zeros(n)
    e_wr = rng.normal(0.0, noise.encoder_std, n) if noise.encoder_std > 0 else np.zeros(n)
    e_tq = rng.normal(0.0, noise.torque_std, n) if noise.torque_std > 0 else np.zeros(n)
    e_lx = rng.normal(0.0, noise.lidar_pos_std, n) if noise.lidar_pos_std > 0 else np.zeros(n)
    e_ly = rng.normal(0.0, noise.lidar_pos_std, n) if noise.lidar_pos_std > 0 else np.zeros(n)
    kt = cfg.motor_constant_NmPerA
    frames = []
    # a scan completes at the end of each LIDAR period; before the first one
    # the fields hold a stale reading of the start pose
    lx = states[0].x_m + float(e_lx[0]) if n else 0.0
    ly = states[0].y_m + float(e_ly[0]) if n else 0.0
    for k, s in enumerate(states):
        fresh = (k + 1) % ratio == 0
        if fresh:
            lx = s.x_m + float(e_lx[k])
            ly = s.y_m + float(e_ly[k])
        current = torques[k] / kt + float(e_tq[k]) / kt
        frames.append(SensorFrame(
            t_s=t0 + k * dt,
            a_imu_mps2=float(acc[k] + e_imu[k]),
            x_lidar_m=lx,
            y_lidar_m=ly,
            omega_f_radps=s.omega_f_radps + float(e_wf[k]),
            omega_r_radps=s.omega_r_radps + float(e_wr[k]),
            torque_est_Nm=kt * current,
            lidar_fresh=fresh,
        ))
    return frames
