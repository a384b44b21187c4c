import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from lowgrip.core import SOILS, DataError, Deformable, NumericalError, VehicleParams
from lowgrip.estimators import (
    FrictionEstimatorState,
    SlipSample,
    TerraDataPoint,
    TerraEstimator,
    compute_rho,
    compute_slip,
    entry_angle,
    friction_update,
    kappa_terms,
    normal_equation_residual,
    terra_solve,
)
from lowgrip.plant import soil_stress_torque

P = VehicleParams()
speeds = st.floats(0.0, 50.0, allow_nan=False)


# -- slip / rho -------------------------------------------------------------

def test_slip_examples():
    assert compute_slip(1.0, 10.0, 0.1).s_x == pytest.approx(0.0, abs=1e-15)
    assert compute_slip(1.0, 5.0, 0.1).s_x == pytest.approx(-0.5)
    r = compute_slip(0.0005, 0.001, 0.1)
    assert r.s_x == 0.0 and r.standstill


@given(speeds, speeds, st.floats(0.01, 1.0))
def test_slip_bounds_and_sign(v, omega, R):
    r = compute_slip(v, omega, R)
    assert -1.0 <= r.s_x <= 1.0
    if not r.standstill:
        diff = omega * R - v
        if diff != 0 and abs(diff) > 1e-12 * max(v, omega * R):
            assert math.copysign(1.0, r.s_x) == math.copysign(1.0, diff)


def test_rho_examples():
    assert compute_rho(0.0, 9.81) == 0.0
    assert compute_rho(9.81, 9.81) == 1.0
    assert compute_rho(-4.4145, 9.81) == pytest.approx(-0.45)
    with pytest.raises(ValueError):
        compute_rho(1.0, 0.0)


def test_slip_sample_bounds():
    with pytest.raises(ValueError):
        SlipSample(1.5, 0.1)


# -- friction ---------------------------------------------------------------

def test_gated_sample_leaves_estimate():
    st_ = FrictionEstimatorState()
    friction_update(st_, SlipSample(0.05, 0.3))
    _, mu = friction_update(st_, SlipSample(0.01, 0.9))
    assert mu == 0.3 and st_.gated == 1


def test_constant_window():
    st_ = FrictionEstimatorState(n_window=10)
    for _ in range(10):
        _, mu = friction_update(st_, SlipSample(-0.2, -0.45))
    assert mu == 0.45


def test_warmup_partial_mean():
    st_ = FrictionEstimatorState(n_window=10)
    friction_update(st_, SlipSample(0.1, 0.2))
    _, mu = friction_update(st_, SlipSample(0.1, 0.4))
    assert mu == pytest.approx(0.3)


rho_vals = st.floats(-2.0, 2.0, allow_nan=False)
slips = st.floats(-1.0, 1.0, allow_nan=False)


@given(st.lists(st.tuples(slips, rho_vals), max_size=40), st.integers(1, 15), rho_vals)
def test_window_mean_exactness(prefix, n, rho0):
    st_ = FrictionEstimatorState(n_window=n)
    for s, r in prefix:
        friction_update(st_, SlipSample(s, r))
    for _ in range(n):
        _, mu = friction_update(st_, SlipSample(0.5, rho0))
    assert mu == pytest.approx(abs(rho0), rel=1e-12, abs=1e-15)
    assert len(st_.window) <= n and mu >= 0


@given(st.lists(st.tuples(slips, rho_vals), max_size=40))
def test_gated_never_changes(samples):
    st_ = FrictionEstimatorState()
    for s, r in samples:
        before = st_.mu_hat
        _, mu = friction_update(st_, SlipSample(s, r))
        if abs(s) < 0.03:
            assert mu == before
        assert len(st_.window) <= st_.n_window


# -- terramechanics ---------------------------------------------------------

def test_entry_angle():
    assert entry_angle(0.03, 0.1) == pytest.approx(math.acos(0.7), abs=1e-15)
    assert entry_angle(0.03, 0.1) == pytest.approx(0.7954, abs=1e-4)
    with pytest.raises(ValueError):
        entry_angle(0.1, 0.1)


def test_kappa_degenerate_contact():
    assert kappa_terms(1.0, 1e-14, 1.0, 5.0, P) is None


def test_kappa2_linear_in_torque():
    a = kappa_terms(1.5, 0.03, 2.0, 12.0, P)
    b = kappa_terms(3.0, 0.03, 2.0, 12.0, P)
    assert b.kappa2 == pytest.approx(2 * a.kappa2, rel=1e-14)


def _forward_points(c_kpa, phi_deg, z=0.03, zetas=(0.05, 0.15, 0.3, 0.5, 0.7, 0.9), v=2.0):
    g = Deformable.from_table(z, c_kpa, phi_deg)
    pts = []
    for zeta in zetas:
        omega = (1.0 - zeta) * v / P.wheel_radius_m
        pts.append(kappa_terms(soil_stress_torque(zeta, g, P), z, v, omega, P))
    return pts


@pytest.mark.parametrize("soil", list(SOILS.values()), ids=list(SOILS))
def test_terra_forward_recovery(soil):
    c, phi = soil
    est = terra_solve(_forward_points(c, phi))
    assert est.c_hat_pa == pytest.approx(c * 1e3, rel=1e-6, abs=1e-6 * 1e3)
    assert est.tan_phi_hat == pytest.approx(math.tan(math.radians(phi)), rel=1e-6)


def _synthetic(c_pa, tphi, xs):
    # kappa3 = 1: target = c + regressor * tan(phi)
    return [TerraDataPoint(-x, c_pa + x * tphi, 1.0) for x in xs]


def test_terra_synthetic_exact():
    e = terra_solve(_synthetic(74e3, math.tan(math.radians(31)), [1e3, 2e3, 5e3, 9e3]))
    assert e.c_hat_pa == pytest.approx(74e3, rel=1e-6)
    assert math.degrees(e.phi_hat_rad) == pytest.approx(31, rel=1e-6)
    e = terra_solve(_synthetic(0.0, math.tan(math.radians(35)), [1e3, 2e3, 5e3]))
    assert abs(e.c_hat_pa) < 1e-6 and math.degrees(e.phi_hat_rad) == pytest.approx(35, rel=1e-9)


def test_terra_errors():
    p = TerraDataPoint(1.0, 2.0, 3.0)
    with pytest.raises(NumericalError, match="degenerate regressor"):
        terra_solve([p, p])
    with pytest.raises(DataError, match="insufficient data"):
        terra_solve([p])


def test_terra_window():
    pts = _synthetic(1e3, 0.2, [1, 2]) + _synthetic(5e3, 0.7, [3, 4, 5])
    e = terra_solve(pts, j_window=3)
    assert e.c_hat_pa == pytest.approx(5e3) and e.tan_phi_hat == pytest.approx(0.7)


points = st.lists(st.tuples(st.floats(-1e5, 1e5), st.floats(-1e5, 1e5), st.floats(0.1, 10)),
                  min_size=2, max_size=10)


@given(points)
def test_terra_normal_equations(raw):
    pts = [TerraDataPoint(a, b, k) for a, b, k in raw]
    xs = np.array([p.regressor for p in pts])
    assume(np.ptp(xs) > 1e-3 * (1 + np.abs(xs).max()))
    est = terra_solve(pts)
    res, scale = normal_equation_residual(pts, est)
    assert res <= 1e-9 * max(scale, 1.0)


@given(st.floats(0, 1e5), st.floats(0.05, 1.5), st.lists(st.floats(-1e4, 1e4), min_size=2, max_size=10, unique=True),
       st.lists(st.floats(-1.0, 1.0), min_size=10, max_size=10))
def test_terra_matches_lstsq_oracle(c, tphi, xs, noise):
    xs = np.array(xs)
    assume(np.ptp(xs) > 1.0)
    y = c + xs * tphi + np.array(noise[:len(xs)]) * 10.0
    pts = [TerraDataPoint(-x, t, 1.0) for x, t in zip(xs, y)]
    est = terra_solve(pts)
    ref, *_ = np.linalg.lstsq(np.column_stack([np.ones_like(xs), xs]), y, rcond=None)
    assert est.c_hat_pa == pytest.approx(ref[0], rel=1e-6, abs=1e-6)
    assert est.tan_phi_hat == pytest.approx(ref[1], rel=1e-6, abs=1e-9)


def test_streaming_estimator_drops_slow_points():
    te = TerraEstimator(P, 0.03)
    assert te.update(1.0, 0.1, 0.5) is None and te.dropped == 1
    g = Deformable.from_table(0.03, 74, 31)
    for zeta in (0.1, 0.2, 0.4, 0.6):
        v = 2.0
        est = te.update(soil_stress_torque(zeta, g, P), v, (1 - zeta) * v / P.wheel_radius_m)
    assert est.c_hat_kpa == pytest.approx(74, rel=1e-6)
