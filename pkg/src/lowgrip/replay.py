"""Trace replay: sensor frames -> observer -> friction or soil estimator."""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

from .core import GroundModel, HardSurface, ManeuverId, Scenario, SensorFrame, VehicleParams
from .estimators import FrictionEstimatorState, SlipSample, TerraEstimator, compute_rho, compute_slip, friction_update
from .observer import ObserverConfig, StateEstimate, run_observer
from .plant import NoiseConfig, PlantConfig, rollout_maneuver, run_acceleration, synthesize_sensors


def replay_friction(frames: Sequence[SensorFrame], params: Optional[VehicleParams] = None,
                    obs_cfg: Optional[ObserverConfig] = None, n_window: int = 10
                    ) -> Tuple[List[Tuple[float, float]], List[StateEstimate], List[float]]:
    """Returns ``(t, mu_hat)`` series, the observer estimates and the per-frame slip."""
    params = params or VehicleParams()
    est = run_observer(frames, obs_cfg or ObserverConfig(wheel_radius_m=params.wheel_radius_m))
    st = FrictionEstimatorState(n_window=n_window)
    series, slips = [], []
    for e in est:
        s = compute_slip(e.v_hat_mps, e.omega_hat_radps, params.wheel_radius_m)
        slips.append(s.s_x)
        if not s.standstill:
            friction_update(st, SlipSample(s.s_x, compute_rho(e.a_hat_mps2, params.gravity_mps2), e.t_s))
        series.append((e.t_s, st.mu_hat))
    return series, est, slips


def replay_terra(frames: Sequence[SensorFrame], sinkage_m: float, params: Optional[VehicleParams] = None,
                 obs_cfg: Optional[ObserverConfig] = None, j_window: int = 10
                 ) -> List[Tuple[float, Optional[float], Optional[float]]]:
    """``(t, c_hat_kpa, phi_hat_deg)`` per frame; None until the first estimate."""
    params = params or VehicleParams()
    est = run_observer(frames, obs_cfg or ObserverConfig(wheel_radius_m=params.wheel_radius_m))
    te = TerraEstimator(params, sinkage_m, j_window=j_window)
    out = []
    for e, f in zip(est, frames):
        r = te.update(f.torque_est_Nm, e.v_hat_mps, e.omega_hat_radps, e.t_s)
        if r is None:
            out.append((e.t_s, None, None))
        else:
            out.append((e.t_s, r.c_hat_kpa, math.degrees(r.phi_hat_rad)))
    return out


def acceleration_trace(ground: GroundModel, seed: int = 0, params: Optional[VehicleParams] = None,
                       cfg: Optional[PlantConfig] = None) -> List[SensorFrame]:
    """Noisy sensor frames of a straight run from rest."""
    params = params or VehicleParams()
    cfg = cfg or PlantConfig()
    ro = run_acceleration(ground, params, cfg=cfg)
    return synthesize_sensors(ro.states, ro.torques, NoiseConfig(rng_seed=seed), params, cfg)


def maneuver_trace(scn: Scenario, maneuver: ManeuverId, seed: int = 0, params: Optional[VehicleParams] = None,
                   cfg: Optional[PlantConfig] = None) -> List[SensorFrame]:
    """Noisy sensor frames of one emergency maneuver."""
    params = params or VehicleParams()
    cfg = cfg or PlantConfig()
    ro = rollout_maneuver(scn, maneuver, params, cfg=cfg)
    return synthesize_sensors(ro.states, ro.torques, NoiseConfig(rng_seed=seed), params, cfg)


def hard_acceleration_trace(mu: float = 0.45, seed: int = 0) -> List[SensorFrame]:
    return acceleration_trace(HardSurface(mu), seed)
