"""Fixed-gain multirate observer for (v, omega_f, a).

The model is two decoupled constant-rate blocks sampled at the fast rate:
``[v, a]`` driven by white jerk and ``[omega_f, domega_f]`` driven by white
wheel jerk. Every frame corrects with the rear encoder (free rolling, so
``omega_r * R`` measures v), the IMU and the front encoder. Frames flagged
``lidar_fresh`` additionally correct with the first difference of
consecutive LIDAR positions, which is the mean speed over the LIDAR period
and therefore lags v by half a period; the measurement row accounts for it.

Gains are the steady-state Kalman gains of that model, computed once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.linalg import solve_discrete_are

from .core import DataError, NumericalError, SensorFrame


@dataclass(frozen=True)
class ObserverConfig:
    q_jerk: float = 400.0          # (m/s^3)^2 / Hz, vehicle jerk spectral density
    q_wheel_jerk: float = 4.0e6    # (rad/s^3)^2 / Hz
    lidar_pos_std: float = 0.01
    encoder_std: float = 0.005
    imu_accel_std: float = 0.05
    wheel_radius_m: float = 0.1
    fast_rate_hz: float = 90.0
    lidar_rate_hz: float = 10.0

    def __post_init__(self):
        for name in ("q_jerk", "q_wheel_jerk", "lidar_pos_std", "encoder_std", "imu_accel_std",
                     "wheel_radius_m", "fast_rate_hz", "lidar_rate_hz"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class StateEstimate:
    v_hat_mps: float
    omega_hat_radps: float
    a_hat_mps2: float
    t_s: float


def _ca_block(dt: float, q: float) -> Tuple[np.ndarray, np.ndarray]:
    F = np.array([[1.0, dt], [0.0, 1.0]])
    Q = q * np.array([[dt ** 3 / 3.0, dt ** 2 / 2.0], [dt ** 2 / 2.0, dt]])
    return F, Q


def _model(cfg: ObserverConfig, dt: float):
    F1, Q1 = _ca_block(dt, cfg.q_jerk)
    F2, Q2 = _ca_block(dt, cfg.q_wheel_jerk)
    F = np.zeros((4, 4))
    Q = np.zeros((4, 4))
    F[:2, :2], F[2:, 2:] = F1, F2
    Q[:2, :2], Q[2:, 2:] = Q1, Q2
    return F, Q


@dataclass(frozen=True)
class ObserverGains:
    F: np.ndarray
    K_fast: np.ndarray
    K_lidar: np.ndarray
    H_fast: np.ndarray
    H_lidar: np.ndarray
    spectral_radius_fast: float
    spectral_radius_cycle: float


def design_gains(cfg: ObserverConfig) -> ObserverGains:
    """Steady-state gains; raises NumericalError if the error dynamics are unstable."""
    dt = 1.0 / cfg.fast_rate_hz
    t_l = 1.0 / cfg.lidar_rate_hz
    F, Q = _model(cfg, dt)
    H = np.array([[1.0, 0.0, 0.0, 0.0],
                  [0.0, 1.0, 0.0, 0.0],
                  [0.0, 0.0, 1.0, 0.0]])
    Rm = np.diag([(cfg.encoder_std * cfg.wheel_radius_m) ** 2, cfg.imu_accel_std ** 2, cfg.encoder_std ** 2])
    try:
        P = solve_discrete_are(F.T, H.T, Q, Rm)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"observer gain design failed: {exc}") from exc
    K = P @ H.T @ np.linalg.inv(H @ P @ H.T + Rm)
    P_post = (np.eye(4) - K @ H) @ P
    Hl = np.array([[1.0, -t_l / 2.0, 0.0, 0.0]])
    r_l = 2.0 * cfg.lidar_pos_std ** 2 / t_l ** 2
    Kl = P_post @ Hl.T / (float((Hl @ P_post @ Hl.T)[0, 0]) + r_l)
    A_fast = (np.eye(4) - K @ H) @ F
    ratio = max(1, int(round(cfg.fast_rate_hz / cfg.lidar_rate_hz)))
    A_cycle = (np.eye(4) - Kl @ Hl) @ np.linalg.matrix_power(A_fast, ratio)
    rho_f = float(max(abs(np.linalg.eigvals(A_fast))))
    rho_c = float(max(abs(np.linalg.eigvals(A_cycle))))
    if not (rho_f < 1.0 and rho_c < 1.0) or not np.all(np.isfinite(K)):
        raise NumericalError(f"unstable observer gains (spectral radius {max(rho_f, rho_c):.4g})")
    return ObserverGains(F, K, Kl, H, Hl, rho_f, rho_c)


@dataclass
class ObserverState:
    cfg: ObserverConfig
    gains: ObserverGains
    x: np.ndarray
    t_s: float
    last_lidar: Optional[Tuple[float, float, float]] = None

    def estimate(self) -> StateEstimate:
        return StateEstimate(float(self.x[0]), float(self.x[2]), float(self.x[1]), self.t_s)


def observer_init(cfg: ObserverConfig, frame0: SensorFrame) -> ObserverState:
    gains = design_gains(cfg)
    x = np.array([frame0.omega_f_radps * cfg.wheel_radius_m, frame0.a_imu_mps2, frame0.omega_f_radps, 0.0])
    last = (frame0.t_s, frame0.x_lidar_m, frame0.y_lidar_m) if frame0.lidar_fresh else None
    return ObserverState(cfg, gains, x, frame0.t_s, last)


def observer_update(state: ObserverState, frame: SensorFrame) -> Tuple[ObserverState, StateEstimate]:
    """Predict to ``frame.t_s`` and correct; the state is updated in place and returned."""
    dt = frame.t_s - state.t_s
    if not dt > 0:
        raise DataError(f"non-monotone timestamp {frame.t_s} after {state.t_s}")
    g = state.gains
    nominal = 1.0 / state.cfg.fast_rate_hz
    F = g.F if abs(dt - nominal) < 1e-9 else _model(state.cfg, dt)[0]
    x = F @ state.x
    z = np.array([frame.omega_r_radps * state.cfg.wheel_radius_m, frame.a_imu_mps2, frame.omega_f_radps])
    x = x + g.K_fast @ (z - g.H_fast @ x)
    if frame.lidar_fresh:
        if state.last_lidar is not None:
            t0, x0, y0 = state.last_lidar
            span = frame.t_s - t0
            if span > 0:
                v_l = math.hypot(frame.x_lidar_m - x0, frame.y_lidar_m - y0) / span
                x = x + g.K_lidar[:, 0] * (v_l - float(g.H_lidar[0] @ x))
        state.last_lidar = (frame.t_s, frame.x_lidar_m, frame.y_lidar_m)
    state.x = x
    state.t_s = frame.t_s
    return state, state.estimate()


def run_observer(frames: Iterable[SensorFrame], cfg: Optional[ObserverConfig] = None) -> List[StateEstimate]:
    frames = list(frames)
    if not frames:
        raise DataError("empty trace")
    cfg = cfg or ObserverConfig()
    st = observer_init(cfg, frames[0])
    out = [st.estimate()]
    for fr in frames[1:]:
        st, est = observer_update(st, fr)
        out.append(est)
    return out
