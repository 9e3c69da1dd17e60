import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from distortion_lab import DiagonalMap, linear_distortion
from distortion_lab.errors import BranchError, ConstraintViolated, DegenerateSpectrum, DomainError
from distortion_lab.oracles import perturbation_taylor, richardson_derivatives
from distortion_lab.rank_one import (
    alpha_beta_gamma_mu,
    angle_features,
    boundary_positivity_check,
    boundary_q,
    brute_force_min_Q,
    case1_critical_points,
    case1_q,
    case2_critical_point,
    case2_quadratic,
    lagrange_solutions,
    min_q,
    optimal_direction,
    project_to_stationary,
    q_grid,
    q_reduced,
    rank_one_from_spherical,
    require_distinct,
    stationarity_residual,
    taylor_coefficients,
)

A24 = DiagonalMap(2, 4)


def test_golden_direction():
    o = optimal_direction(A24)
    assert np.allclose(o.u, [1 / math.sqrt(30), math.sqrt(5 / 6), math.sqrt(2 / 15)], atol=1e-12)
    assert np.allclose(o.v, [1 / math.sqrt(30), -math.sqrt(5 / 6), math.sqrt(2 / 15)], atol=1e-12)
    assert o.B0[0, 0] == pytest.approx(1 / 30, abs=1e-15)
    assert o.q_min == pytest.approx(-1 / 90, abs=1e-15)
    assert np.linalg.norm(o.u) == pytest.approx(1)


def test_golden_taylor():
    tc = taylor_coefficients(A24, optimal_direction(A24).params)
    assert tc.h0 == 4
    assert abs(tc.linear) < 1e-12
    assert abs(tc.quadratic + 1 / 90) <= 1e-10


def test_optimal_params_reproduce_direction():
    o = optimal_direction(A24)
    p = o.params
    assert p.r == p.s
    assert p.r**2 == pytest.approx(29 / 30)
    assert np.allclose(p.B, o.B0, atol=1e-14)
    assert abs(stationarity_residual(A24, p)) < 1e-14


@pytest.mark.parametrize("ab", [(2, 4), (2, 10), (2, 105), (99, 154), (1.1, 1.3)])
def test_optimal_direction_is_stationary_and_attains_min(ab):
    A = DiagonalMap(*ab)
    o = optimal_direction(A)
    p = o.params
    L, Q = perturbation_taylor(A, o.B0)
    assert abs(L) < 1e-9 * A.b
    assert Q == pytest.approx(o.q_min, rel=1e-8)
    assert o.q_min < 0


def test_degenerate_spectrum():
    with pytest.raises(DegenerateSpectrum):
        require_distinct(DiagonalMap(1 + 1e-12, 3))
    with pytest.raises(DegenerateSpectrum):
        optimal_direction(DiagonalMap(2, 2 + 1e-12))


@pytest.mark.parametrize("args", [(1.1, 0.5, 0, 0), (0.5, -0.1, 0, 0), (0.5, 0.5, 4.0, 0), (0.5, 0.5, 0, -1)])
def test_spherical_domain(args):
    with pytest.raises(DomainError):
        rank_one_from_spherical(*args)


def test_projection_hits_constraint():
    rng = np.random.default_rng(0)
    for _ in range(200):
        p = project_to_stationary(A24, rng.uniform(0.05, 0.999), *rng.uniform(0.05, 3.09, 2))
        assert abs(stationarity_residual(A24, p)) < 1e-10


def test_equal_radius_rule():
    # r = s solves the constraint when r^2 = b / (b + sin th1 sin th2)
    t1, t2 = 0.7, 2.0
    S = math.sin(t1) * math.sin(t2)
    r = math.sqrt(4 / (4 + S))
    assert abs(stationarity_residual(A24, rank_one_from_spherical(r, r, t1, t2))) < 1e-14


@pytest.mark.parametrize("ab", [(2, 4), (3, 7), (1.5, 20)])
def test_taylor_against_finite_differences(ab):
    A = DiagonalMap(*ab)
    rng = np.random.default_rng(1)
    for _ in range(10):
        p = rank_one_from_spherical(*rng.uniform(0.1, 0.9, 2), *rng.uniform(0.1, 3.0, 2))
        tc = taylor_coefficients(A, p)
        d1, d2 = richardson_derivatives(lambda t: linear_distortion(A.matrix + t * p.B))
        assert tc.linear == pytest.approx(d1, abs=1e-6)
        assert tc.quadratic == pytest.approx(d2 / 2, abs=1e-5)
        assert (tc.linear, tc.quadratic) == pytest.approx(perturbation_taylor(A, p.B), abs=1e-9)


def test_reduced_form_matches_general_taylor():
    # Q from (alpha, beta, gamma) equals the general coefficient at the Lagrange point
    rng = np.random.default_rng(2)
    A = DiagonalMap(3, 7)
    n = 0
    for t1, t2 in rng.uniform(0.1, 3.0, (200, 2)):
        try:
            first, _ = lagrange_solutions(A, t1, t2)
        except BranchError:
            continue
        d, e = float(first.delta), float(first.eta)
        if not (0 < d < 1 and 0 < e < 1):
            continue
        p = rank_one_from_spherical(math.sqrt(d), math.sqrt(e), t1, t2)
        assert abs(stationarity_residual(A, p)) < 1e-9
        assert q_reduced(A, t1, t2) == pytest.approx(taylor_coefficients(A, p).quadratic, abs=1e-10)
        n += 1
    assert n > 10


def test_branch_error_and_lenient_mode():
    _, q, valid, _ = q_grid(A24, 65)
    bad = np.argwhere(~valid)
    assert len(bad), "expected some alpha*beta <= 0 points"
    i, j = bad[0]
    th = np.linspace(0, np.pi, 65)
    with pytest.raises(BranchError):
        q_reduced(A24, th[i], th[j])
    assert math.isnan(q_reduced(A24, th[i], th[j], strict=False))


@pytest.mark.parametrize("n", [64, 65, 512])
def test_grid_symmetries_exact(n):
    _, q, _, _ = q_grid(A24, n)
    assert np.array_equal(q, q.T, equal_nan=True)
    assert np.array_equal(q, q[::-1, ::-1], equal_nan=True)


def test_beta_is_alpha_swapped():
    f = alpha_beta_gamma_mu(A24, 0.3, 1.9)
    g = alpha_beta_gamma_mu(A24, 1.9, 0.3)
    assert f.beta == pytest.approx(g.alpha)
    assert f.gamma == pytest.approx(g.gamma)


def test_angle_folding():
    a = angle_features(0.4)
    b = angle_features(0.4 + np.pi)
    assert np.allclose(a, b)


@pytest.mark.parametrize("ab", [(2, 4), (2, 10), (2, 105), (99, 154)])
def test_grid_minimum(ab):
    A = DiagonalMap(*ab)
    gm = brute_force_min_Q(A, 256)
    assert gm.q_min == pytest.approx(min_q(A), abs=8e-4)
    assert min_q(A) <= gm.q_min + 1e-12
    assert gm.dist_antidiagonal <= gm.spacing


def test_grid_too_coarse():
    with pytest.raises(DomainError):
        brute_force_min_Q(A24, 32)


def test_case1():
    pts = case1_critical_points(A24)
    assert pts[1] == pytest.approx((math.pi / 2, 4 / 15))
    tc, qh = pts[3]
    assert math.tan(tc) == pytest.approx(6 / 5)
    assert case1_q(A24, tc) == pytest.approx(qh, rel=1e-10)
    th = np.linspace(0.01, np.pi / 2 - 0.01, 4001)
    vals = case1_q(A24, th)
    assert th[np.argmax(vals)] == pytest.approx(tc, abs=1e-3)


def test_case2():
    theta, val = case2_critical_point(A24)
    assert val == pytest.approx(-1 / 72)
    assert case2_quadratic(A24, 1.0, theta, enforce_constraint=False) == pytest.approx(val)
    with pytest.raises(ConstraintViolated):
        case2_quadratic(A24, 1.0, theta)
    # on the constraint the slice reaches the global minimum
    p = optimal_direction(A24).params
    assert case2_quadratic(A24, p.r, p.theta1) == pytest.approx(-1 / 90)


def test_boundary():
    assert boundary_positivity_check(A24, 128)
    assert boundary_q(A24, 0.0, 1.0) == pytest.approx(4 * 2 * 12 / (4 * 3 * 12))
    with pytest.raises(DomainError):
        boundary_positivity_check(A24, 10)


@settings(max_examples=50, deadline=None)
@given(st.floats(1.05, 20), st.floats(0.05, 50))
def test_min_q_negative_and_matches_perturbation(a, gap):
    A = DiagonalMap(a, a + gap)
    o = optimal_direction(A)
    assert o.q_min < 0
    assert perturbation_taylor(A, o.B0)[1] == pytest.approx(o.q_min, rel=1e-6, abs=1e-12)
