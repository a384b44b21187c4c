"""Ground-parameter estimators.

Two stream processors live here:

* a slip-slope friction estimator that averages the normalized traction
  force over the last ``N`` samples taken while the wheel is slipping, and
* a terramechanics estimator that regresses cohesion and ``tan(phi)`` from
  wheel torque, sinkage and slip using a linear least-squares fit over the
  last ``j`` contact points.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .core import DataError, NumericalError, VehicleParams

log = logging.getLogger(__name__)

SLIP_EPS = 1e-3  # m/s, below this both speeds count as standstill
SLIP_GATE = 0.03
KAPPA3_MIN = 1e-12


@dataclass(frozen=True)
class SlipResult:
    s_x: float
    standstill: bool = False


def compute_slip(v: float, omega: float, R: float) -> SlipResult:
    """Longitudinal slip (omega*R - v) / max(omega*R, v), clamped to [-1, 1]."""
    wr = omega * R
    denom = max(wr, v)
    if denom <= SLIP_EPS:
        return SlipResult(0.0, True)
    s = (wr - v) / denom
    return SlipResult(min(1.0, max(-1.0, s)))


def compute_rho(a: float, g: float) -> float:
    if g <= 0:
        raise ValueError("g must be > 0")
    return a / g


@dataclass(frozen=True)
class SlipSample:
    s_x: float
    rho: float
    t_s: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.s_x <= 1.0:
            raise ValueError("slip must lie in [-1, 1]")


@dataclass
class FrictionEstimatorState:
    n_window: int = 10
    mu_hat: float = 0.0
    window: deque = field(default_factory=deque)
    admitted: int = 0
    gated: int = 0

    def __post_init__(self):
        if self.n_window < 1:
            raise ValueError("window length must be >= 1")


def friction_update(st: FrictionEstimatorState, sample: SlipSample,
                    gate: float = SLIP_GATE) -> tuple[FrictionEstimatorState, float]:
    """Advance the sliding-mean friction estimate by one sample.

    Samples with ``|s_x| < gate`` leave the estimate untouched. Admitted
    samples push ``|rho|`` into a FIFO of length N and the estimate becomes
    the window mean; during warm-up that is the mean of what is available.
    The state object is updated in place and also returned.
    """
    if abs(sample.s_x) < gate:
        st.gated += 1
        return st, st.mu_hat
    st.window.append(abs(sample.rho))
    if len(st.window) > st.n_window:
        st.window.popleft()
    st.admitted += 1
    st.mu_hat = math.fsum(st.window) / len(st.window)
    return st, st.mu_hat


@dataclass(frozen=True)
class TerraDataPoint:
    kappa1: float
    kappa2: float
    kappa3: float
    t_s: float = 0.0

    @property
    def regressor(self) -> float:
        return -self.kappa1 / self.kappa3

    @property
    def target(self) -> float:
        return self.kappa2 / self.kappa3


@dataclass(frozen=True)
class TerraEstimate:
    c_hat_pa: float
    tan_phi_hat: float

    @property
    def physical(self) -> bool:
        return self.tan_phi_hat > 0.0

    @property
    def phi_hat_rad(self) -> float:
        return math.atan(self.tan_phi_hat)

    @property
    def c_hat_kpa(self) -> float:
        return self.c_hat_pa / 1e3


def entry_angle(z: float, R: float) -> float:
    if not 0.0 < z < R:
        raise ValueError(f"sinkage {z} must lie in (0, R={R})")
    return math.acos((R - z) / R)


def slip_zeta(v: float, omega: float, R: float) -> float:
    """Braking-convention slip 1 - omega*R/v used in the shear mobilization."""
    return 1.0 - omega * R / v


def shear_mobilization(beta: float, zeta: float, R: float, b: float) -> float:
    """alpha = 1 - exp{(R/b) [beta/2 + (1 - zeta)(-sin(beta) + sin(beta/2))]}."""
    expo = (R / b) * (beta / 2.0 + (1.0 - zeta) * (-math.sin(beta) + math.sin(beta / 2.0)))
    return 1.0 - math.exp(expo)


def kappa_terms(T: float, z: float, v: float, omega: float, params: VehicleParams,
                t_s: float = 0.0) -> Optional[TerraDataPoint]:
    """Coefficients of the wheel-soil equilibrium ``kappa2 = c*kappa3 - tan(phi)*kappa1``.

    Returns None when the point carries no information (|kappa3| below
    threshold, or speeds inside the standstill guard).
    """
    R, b = params.wheel_radius_m, params.wheel_width_m
    beta = entry_angle(z, R)
    if v <= SLIP_EPS or omega * R <= SLIP_EPS:
        return None
    zeta = slip_zeta(v, omega, R)
    alpha = shear_mobilization(beta, zeta, R, b)
    sb, sh = math.sin(beta), math.sin(beta / 2.0)
    cb, ch = math.cos(beta), math.cos(beta / 2.0)
    W = params.mass_kg * params.gravity_mps2
    k1 = alpha * (beta * beta * W * R + 4.0 * T * sb - 8.0 * T * sh)
    k2 = 4.0 * T * (cb - 2.0 * ch + 1.0)
    k3 = beta * R * R * b * (cb - 2.0 * ch + 2.0 * alpha * cb - 4.0 * alpha * ch + 2.0 * alpha + 1.0)
    if abs(k3) < KAPPA3_MIN:
        return None
    return TerraDataPoint(k1, k2, k3, t_s)


def _regression_matrices(points: Sequence[TerraDataPoint]) -> tuple[np.ndarray, np.ndarray]:
    K1 = np.array([p.target for p in points], dtype=float)
    K2 = np.column_stack([np.ones(len(points)), [p.regressor for p in points]])
    return K1, K2


def terra_solve(points: Sequence[TerraDataPoint], j_window: int = 10,
                rel_rank_tol: float = 1e-9) -> TerraEstimate:
    """Least-squares ``[c, tan(phi)]`` over the last ``j_window`` points (QR solve)."""
    pts = list(points)[-j_window:]
    if len(pts) < 2:
        raise DataError("insufficient data")
    K1, K2 = _regression_matrices(pts)
    Q, Rm = np.linalg.qr(K2)
    diag = np.abs(np.diag(Rm))
    if diag.min() <= rel_rank_tol * max(diag.max(), 1e-300):
        raise NumericalError("degenerate regressor")
    theta = solve_triangular(Rm, Q.T @ K1)
    return TerraEstimate(float(theta[0]), float(theta[1]))


@dataclass
class TerraEstimator:
    """Streaming wrapper: accumulate kappa points, re-solve on every admitted one.

    Keeps the previous estimate when the current window is degenerate.
    """

    params: VehicleParams
    sinkage_m: float
    j_window: int = 10
    min_speed_mps: float = 0.3
    points: deque = field(default_factory=deque)
    estimate: Optional[TerraEstimate] = None
    dropped: int = 0
    degenerate: int = 0
    unphysical: int = 0

    def update(self, T: float, v: float, omega: float, t_s: float = 0.0) -> Optional[TerraEstimate]:
        if v < self.min_speed_mps:
            self.dropped += 1
            return self.estimate
        pt = kappa_terms(T, self.sinkage_m, v, omega, self.params, t_s)
        if pt is None:
            self.dropped += 1
            return self.estimate
        self.points.append(pt)
        while len(self.points) > self.j_window:
            self.points.popleft()
        if len(self.points) < 2:
            return self.estimate
        try:
            est = terra_solve(self.points, self.j_window)
        except NumericalError:
            self.degenerate += 1
            return self.estimate
        if not est.physical:
            self.unphysical += 1
            log.debug("non-physical tan(phi) estimate %.4g at t=%.3f", est.tan_phi_hat, t_s)
        self.estimate = est
        return est


def normal_equation_residual(points: Iterable[TerraDataPoint], est: TerraEstimate) -> tuple[float, float]:
    """(||K2^T (K2 theta - K1)||, ||K2^T K1||) for diagnostics and tests."""
    K1, K2 = _regression_matrices(list(points))
    theta = np.array([est.c_hat_pa, est.tan_phi_hat])
    return (float(np.linalg.norm(K2.T @ (K2 @ theta - K1))), float(np.linalg.norm(K2.T @ K1)))
