"""Quadrature, turning points, the libration action, Monte Carlo volumes."""

import math

import numpy as np
import pytest

from cartograph import (
    ConvergenceError,
    DomainError,
    QuadratureSpec,
    adaptive_quad,
    effective_potential,
    make_system,
    mc_fiber_volume,
    pendulum_action,
    potential_minimum,
    reduced_orbit,
    turning_points,
)

SQRT_SPEC = QuadratureSpec(endpoint_singularity="inverse-sqrt")

# libration action at (ell, energy) = (0.3, 0.5) from a 10^6-node composite
# midpoint rule on the raw integrand (independent of the adaptive path)
A2_ORACLE_03_05 = 0.6848185331319514


def test_adaptive_quad_polynomial():
    assert adaptive_quad(lambda x: x, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_adaptive_quad_inverse_sqrt_endpoint():
    val = adaptive_quad(lambda x: 1.0 / math.sqrt(x), 0.0, 1.0, SQRT_SPEC)
    assert val == pytest.approx(2.0, abs=1e-10)


def test_adaptive_quad_sin_against_fixed_rule_oracle():
    # 200-node Gauss-Legendre oracle
    xg, wg = np.polynomial.legendre.leggauss(200)
    oracle = float((np.sin((xg + 1) * math.pi / 2) * wg).sum() * math.pi / 2)
    val = adaptive_quad(math.sin, 0.0, math.pi)
    assert val == pytest.approx(oracle, abs=1e-10)
    assert val == pytest.approx(2.0, abs=1e-10)


def test_adaptive_quad_deterministic_and_oriented():
    spec = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-12)
    f = lambda x: math.exp(-x * x)
    v1 = adaptive_quad(f, -1.0, 2.0, spec)
    v2 = adaptive_quad(f, -1.0, 2.0, spec)
    assert v1 == v2
    assert adaptive_quad(f, 2.0, -1.0, spec) == -v1
    assert adaptive_quad(f, 1.0, 1.0, spec) == 0.0


def test_adaptive_quad_depth_exhaustion():
    spec = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-14, max_depth=2)
    with pytest.raises(ConvergenceError):
        adaptive_quad(lambda x: math.sin(40.0 * x) ** 2, 0.0, 3.0, spec)


def test_turning_points_degenerate_orbit():
    theta_m, u_min = potential_minimum(0.5)
    lo, hi = turning_points(0.5, u_min)
    assert lo == pytest.approx(theta_m, abs=1e-9)
    assert hi == pytest.approx(theta_m, abs=1e-9)


def test_turning_points_residuals():
    lo, hi = turning_points(0.5, 1.5)
    assert effective_potential(0.5, lo) == pytest.approx(1.5, abs=1e-10)
    assert effective_potential(0.5, hi) == pytest.approx(1.5, abs=1e-10)
    assert lo < hi


def test_turning_points_below_minimum_is_error():
    _, u_min = potential_minimum(0.5)
    with pytest.raises(DomainError):
        turning_points(0.5, u_min - 0.1)


def test_reduced_orbit_brackets_potential():
    orbit = reduced_orbit(0.4, 0.9)
    mid = 0.5 * (orbit.turning_lo + orbit.turning_hi)
    assert effective_potential(0.4, mid) <= orbit.energy


def test_pendulum_action_zero_at_minimum():
    _, u_min = potential_minimum(0.7)
    assert pendulum_action(0.7, u_min) == 0.0


def test_pendulum_action_monotone_in_energy():
    values = [pendulum_action(0.4, e) for e in np.linspace(-0.2, 2.0, 12)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_pendulum_action_against_brute_force_oracle():
    ell, energy = 0.3, 0.5
    val = pendulum_action(ell, energy)
    assert val == pytest.approx(A2_ORACLE_03_05, abs=1e-8)
    # recompute the oracle here so the frozen value stays auditable
    lo, hi = turning_points(ell, energy)
    n = 1_000_000
    t = lo + (hi - lo) * (np.arange(n) + 0.5) / n
    u = ell * ell / (2 * np.sin(t) ** 2) + np.cos(t)
    oracle = float(np.sqrt(np.clip(2 * (energy - u), 0, None)).sum() * (hi - lo) / n) / math.pi
    assert oracle == pytest.approx(A2_ORACLE_03_05, abs=1e-9)


def test_pendulum_action_even_in_momentum():
    for ell in (0.2, 0.6, 1.1):
        for e in (0.7, 1.4):
            assert pendulum_action(ell, e) == pytest.approx(
                pendulum_action(-ell, e), abs=1e-8)


def test_pendulum_action_energy_derivative_positive():
    h = 1e-4
    for ell in (0.1, 0.5, 1.0):
        for e in (0.6, 1.0, 1.6):
            d = (pendulum_action(ell, e + h) - pendulum_action(ell, e - h)) / (2 * h)
            assert d > 0


def test_mc_fiber_volume_deterministic_and_worker_independent(toric):
    a = mc_fiber_volume(toric, 0.25, 0.0, 20_000, seed=42)
    b = mc_fiber_volume(toric, 0.25, 0.0, 20_000, seed=42)
    c = mc_fiber_volume(toric, 0.25, 0.0, 20_000, seed=42, workers=4)
    assert a == b == c
    d = mc_fiber_volume(toric, 0.25, 0.0, 20_000, seed=43)
    assert d != a


def test_mc_fiber_volume_toric_full_fiber(toric):
    est = mc_fiber_volume(toric, 0.0, math.inf, 50_000, seed=7)
    # the density is constant, so every sample contributes exactly 2
    assert est.value == pytest.approx(2.0, abs=1e-12)


def test_mc_fiber_volume_toric_half_fiber(toric):
    est = mc_fiber_volume(toric, 0.25, 0.0, 50_000, seed=7)
    assert est.within(1.0)
    assert est.stderr < 0.02


def test_mc_fiber_volume_coupled_truncated(coupled_m):
    # level at the image of z2 = 0 cuts the fiber to the lower hemisphere
    level = coupled_m.eval_F((math.sqrt(1 - 0.25), 0, -0.5, 1, 0, 0),
                             properized=True)[1]
    est = mc_fiber_volume(coupled_m, -0.5, level, 100_000, seed=9)
    assert est.within(1.0)


def test_mc_fiber_volume_pendulum_needs_finite_level(pendulum):
    with pytest.raises(DomainError):
        mc_fiber_volume(pendulum, 0.3, math.inf, 10_000, seed=1)


def test_mc_fiber_volume_pendulum_matches_action(pendulum):
    est = mc_fiber_volume(pendulum, 0.3, 0.5, 200_000, seed=11)
    assert est.within(pendulum_action(0.3, 0.5))


def test_mc_sample_floor():
    toric = make_system("toric_s2s2")
    with pytest.raises(Exception):
        mc_fiber_volume(toric, 0.0, math.inf, 100, seed=1)


def test_quadrature_spec_validation():
    with pytest.raises(Exception):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(Exception):
        QuadratureSpec(endpoint_singularity="pole")


def test_mc_matches_reduced_volume_on_compact_fibers(toric, coupled_m, coupled_n):
    for system, xs in ((toric, (-0.5, 0.3)),
                       (coupled_m, (-0.5, 0.5)),
                       (coupled_n, (-0.5, 0.5))):
        for x in xs:
            est = mc_fiber_volume(system, x, math.inf, 50_000, seed=17)
            vol = system.reduced_volume(x)
            assert abs(est.value - vol) <= max(3 * est.stderr, 1e-12), (
                system.name, x, est, vol)
