import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from distortion_lab import DiagonalMap, distortion_report, linear_distortion, singular_values
from distortion_lab.errors import DomainError, NonPositiveJacobian, NotSymmetric, SingularMatrix
from distortion_lab.linalg3 import eigenvalues_sym3, gram
from distortion_lab.oracles import jacobi_singular_values


def orthogonal(seed):
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    return q * np.sign(np.diag(r))


entries = st.floats(-10, 10, allow_nan=False)
matrices = st.lists(entries, min_size=9, max_size=9).map(lambda x: np.array(x).reshape(3, 3))
well_conditioned = matrices.filter(lambda M: np.linalg.cond(M) < 1e6)


@pytest.mark.parametrize("a,b", [(1.5, 2.0), (2.0, 4.0), (10.0, 100.0)])
def test_diagonal_map_distortion_is_b(a, b):
    assert linear_distortion(DiagonalMap(a, b).matrix) == b


@pytest.mark.parametrize("a,b", [(4.0, 2.0), (1.0, 3.0), (0.5, 2.0), (3.0, 3.0), (math.nan, 3.0), (2.0, math.inf)])
def test_diagonal_map_rejects(a, b):
    with pytest.raises(DomainError, match="requires 1 < a < b"):
        DiagonalMap(a, b)


def test_golden_report():
    rep = distortion_report(DiagonalMap(2, 4).matrix)
    assert rep.H == 4
    assert rep.K_O == pytest.approx(8)
    assert rep.K_I == pytest.approx(8)
    assert rep.K_frob == pytest.approx((math.sqrt(21 / 3)) ** 3 / 8)


def test_singular_and_negative():
    with pytest.raises(SingularMatrix):
        linear_distortion(np.diag([1.0, 2.0, 0.0]))
    with pytest.raises(NonPositiveJacobian):
        distortion_report(np.diag([1.0, -2.0, 3.0]))
    # H itself does not care about orientation
    assert linear_distortion(np.diag([1.0, -2.0, 3.0])) == 3.0


def test_shape_and_finiteness():
    with pytest.raises(DomainError):
        linear_distortion(np.eye(2))
    with pytest.raises(DomainError):
        linear_distortion(np.full((3, 3), np.nan))


def test_eigen_rejects_asymmetric():
    S = np.eye(3)
    S[0, 1] = 1e-3
    with pytest.raises(NotSymmetric):
        eigenvalues_sym3(S)


def test_eigen_flags_degenerate():
    assert eigenvalues_sym3(np.diag([2.0, 2.0, 5.0])).degenerate
    assert not eigenvalues_sym3(np.diag([1.0, 2.0, 5.0])).degenerate


def test_large_scale_keeps_precision():
    # the Gram route would lose sigma_min entirely here
    assert linear_distortion(np.diag([1.0, 1e4, 1e8])) == pytest.approx(1e8, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_eigen_matches_jacobi(M):
    lam = eigenvalues_sym3(gram(M)).values
    sv = jacobi_singular_values(M)
    scale = max(sv[-1] ** 2, 1e-300)
    assert np.max(np.abs(lam - sv**2)) <= 1e-9 * scale


@settings(max_examples=200, deadline=None)
@given(well_conditioned, st.integers(0, 2**31), st.integers(0, 2**31))
def test_orthogonal_invariance(M, s1, s2):
    h = linear_distortion(M)
    assert linear_distortion(orthogonal(s1) @ M @ orthogonal(s2)) == pytest.approx(h, rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(well_conditioned, st.floats(1e-3, 1e3))
def test_scale_invariance(M, c):
    # sigma_min carries relative error ~ cond * eps
    rel = 50 * np.finfo(float).eps * np.linalg.cond(M)
    assert linear_distortion(c * M) == pytest.approx(linear_distortion(M), rel=max(rel, 1e-14))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.1, 50), min_size=3, max_size=3), st.integers(0, 2**31), st.integers(0, 2**31))
def test_functional_inequalities(diag, s1, s2):
    M = orthogonal(s1) @ np.diag(diag) @ orthogonal(s2)
    if np.linalg.det(M) < 0:
        M[:, 0] *= -1
    rep = distortion_report(M)
    tol = 1e-9
    assert rep.H <= rep.K_I * (1 + tol)
    assert rep.K_I <= rep.H**2 * (1 + tol)
    assert rep.H <= rep.K_O * (1 + tol) and rep.K_O <= rep.H**2 * (1 + tol)
    assert 1 - tol <= rep.K_frob <= rep.K_O * (1 + tol)


def test_singular_values_ascending():
    s = singular_values(np.diag([3.0, 1.0, 2.0]))
    assert list(s) == [1.0, 2.0, 3.0]
