import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from distortion_lab import DiagonalMap, linear_distortion
from distortion_lab.errors import DegenerateSpectrum, DomainError
from distortion_lab.oracles import gram_char_cubic
from distortion_lab.rank_one import optimal_direction
from distortion_lab.window import (
    char_cubic,
    delta,
    discriminant_poly,
    eigen_branches,
    g1_j1,
    h_along,
    p_factor,
    quartic_remainder,
    quartic_remainder_positivity,
    track_branches,
    window,
    window_endpoints,
)

A24 = DiagonalMap(2, 4)

ab_pairs = st.tuples(st.floats(1.05, 40), st.floats(0.05, 60)).map(lambda x: DiagonalMap(x[0], x[0] + x[1]))


def test_golden_window():
    w = window(A24)
    assert w.t_plus == pytest.approx(1.19219, abs=1e-4)
    assert w.t_minus == pytest.approx(-2.04584, abs=1e-4)
    assert w.h_minus == pytest.approx(3.97539, abs=1e-4)
    assert w.h_plus == pytest.approx(w.h_minus, abs=1e-6)
    assert w.width == pytest.approx(w.t_plus - w.t_minus)


def test_endpoints_are_roots_of_p():
    c2, c1, c0 = p_factor(A24)
    for t in window_endpoints(A24):
        assert c2 * t * t + c1 * t + c0 == pytest.approx(0, abs=1e-9 * abs(c0))


@settings(max_examples=100, deadline=None)
@given(ab_pairs, st.floats(-3, 3))
def test_cubic_matches_assembly(A, t):
    B0 = optimal_direction(A).B0
    closed = np.array(char_cubic(A, t)[::-1])  # (D1, C1, B1, A1)
    ref = gram_char_cubic(A, B0, t)
    assert np.allclose(closed, ref, rtol=1e-9, atol=1e-9 * np.max(np.abs(ref)))


@settings(max_examples=100, deadline=None)
@given(ab_pairs)
def test_delta_positive_and_equal_to_discriminant(A):
    c2, c1, c0 = p_factor(A)
    d = delta(A)
    assert d > 0
    assert d == pytest.approx(c1 * c1 - 4 * c2 * c0, rel=1e-8)
    g1, j1 = g1_j1(A)
    assert d == pytest.approx((A.b**2 - 1) ** 2 * j1, rel=1e-12)


def test_eigenvalues_collide_at_endpoints():
    B0 = optimal_direction(A24).B0
    tm, tp = window_endpoints(A24)
    lm = np.linalg.eigvalsh((A24.matrix + tm * B0).T @ (A24.matrix + tm * B0))
    lp = np.linalg.eigvalsh((A24.matrix + tp * B0).T @ (A24.matrix + tp * B0))
    assert lm[2] - lm[1] < 1e-10 * lm[2]  # largest pair at t-
    assert lp[1] - lp[0] < 1e-10 * lp[2]  # smallest pair at t+


def test_h_along_matches_svd_and_stays_below_b():
    B0 = optimal_direction(A24).B0
    tm, tp = window_endpoints(A24)
    ts = np.linspace(tm, tp, 301)[1:-1]
    ref = np.array([linear_distortion(A24.matrix + t * B0) for t in ts])
    assert np.allclose(h_along(A24, ts), ref, rtol=1e-12)
    inner = ts[np.abs(ts) > 1e-6]
    assert np.all(h_along(A24, inner) < 4)


@pytest.mark.parametrize("ab", [(2, 4), (3, 7), (2, 105), (10, 100)])
def test_branches_at_endpoints(ab):
    A = DiagonalMap(*ab)
    w = window(A)
    assert h_along(A, w.t_plus) == pytest.approx(w.h_plus, rel=1e-6)
    assert h_along(A, w.t_minus) == pytest.approx(w.h_minus, rel=1e-6)


def test_branch_range_guard():
    tm, tp = window_endpoints(A24)
    with pytest.raises(DomainError):
        eigen_branches(A24, tp + 0.5 * (tp - tm))
    eigen_branches(A24, tp + 0.05 * (tp - tm))


def test_tracked_branches_cross_at_t_plus():
    tm, tp = window_endpoints(A24)
    ts = np.linspace(0.5 * tp, tp + 0.09 * (tp - tm), 400)
    tr = track_branches(A24, ts)
    before, after = tr[0], tr[-1]
    # the two lowest branches swap order across t+
    lo_before = np.argsort(before)[:2]
    assert np.sign(before[lo_before[0]] - before[lo_before[1]]) != np.sign(after[lo_before[0]] - after[lo_before[1]])


def test_quartic_remainder_exact():
    R = quartic_remainder(A24)
    assert all(isinstance(c, Fraction) for c in R)
    assert len(R) == 5
    assert len(discriminant_poly(A24)) == 9
    assert quartic_remainder_positivity(A24)


@pytest.mark.parametrize("ab", [(2, 105), (99, 154), (1.5, 3)])
def test_quartic_remainder_positive(ab):
    assert quartic_remainder_positivity(DiagonalMap(*ab))


def test_quartic_remainder_sample_floor():
    with pytest.raises(DomainError):
        quartic_remainder_positivity(A24, 10)


def test_degenerate():
    with pytest.raises(DegenerateSpectrum):
        window(DiagonalMap(1 + 1e-12, 2))


@settings(max_examples=100, deadline=None)
@given(ab_pairs)
def test_window_brackets_zero_and_lowers_h(A):
    w = window(A)
    assert w.t_minus < 0 < w.t_plus
    assert max(w.h_minus, w.h_plus) < A.b


@pytest.mark.parametrize("c", [1.5, 2.0, 3.0, 10.0, 100.0])
def test_endpoint_distortions_equal_on_square_family(c):
    w = window(DiagonalMap(c, c * c))
    assert w.h_minus == pytest.approx(w.h_plus, rel=1e-9)


@pytest.mark.parametrize("ab", [(2, 3), (3, 7), (2, 10)])
def test_endpoint_distortions_differ_off_square_family(ab):
    w = window(DiagonalMap(*ab))
    assert abs(w.h_minus - w.h_plus) > 1e-3
