"""Best rank-one direction for H at A = diag(1, a, b).

A rank-one perturbation B = u (x) v is parametrised by two spherical
angles and two radii,

    u = (sqrt(1-r^2), r cos th1, r sin th1),  v = (sqrt(1-s^2), s cos th2, s sin th2),

and H(A + tB) = b + L t + Q t^2 + O(t^3). Directions with L = 0 are
*stationary*; the most concave stationary direction minimises Q. Writing
delta = r^2, eta = s^2 and eliminating the stationarity constraint turns Q
into (alpha*delta + beta*eta + gamma) / (xi*mu), which is then minimised
by Lagrange multipliers for fixed angles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BranchError, ConstraintViolated, DegenerateSpectrum, DomainError
from .linalg3 import DiagonalMap

SPECTRUM_EPS = 1e-9


def require_distinct(A: DiagonalMap, eps: float = SPECTRUM_EPS) -> None:
    if A.a - 1.0 <= eps or A.b - A.a <= eps:
        raise DegenerateSpectrum(
            f"singular values 1, {A.a}, {A.b} are not separated by more than {eps}"
        )


@dataclass(frozen=True)
class SphericalRankOne:
    r: float
    s: float
    theta1: float
    theta2: float

    @property
    def u(self) -> np.ndarray:
        r, t = self.r, self.theta1
        return np.array([math.sqrt(1.0 - r * r), r * math.cos(t), r * math.sin(t)])

    @property
    def v(self) -> np.ndarray:
        s, t = self.s, self.theta2
        return np.array([math.sqrt(1.0 - s * s), s * math.cos(t), s * math.sin(t)])

    @property
    def B(self) -> np.ndarray:
        return np.outer(self.u, self.v)


def rank_one_from_spherical(r, s, theta1, theta2) -> SphericalRankOne:
    for name, val, hi in (("r", r, 1.0), ("s", s, 1.0), ("theta1", theta1, math.pi), ("theta2", theta2, math.pi)):
        if not (0.0 <= val <= hi):
            raise DomainError(f"{name}={val!r} outside [0, {hi:g}]")
    return SphericalRankOne(float(r), float(s), float(theta1), float(theta2))


def stationarity_residual(A: DiagonalMap, p: SphericalRankOne) -> float:
    """b sqrt(1-r^2) sqrt(1-s^2) - r s sin th1 sin th2; zero iff dH/dt(0) = 0."""
    return A.b * math.sqrt(1 - p.r**2) * math.sqrt(1 - p.s**2) - p.r * p.s * math.sin(p.theta1) * math.sin(p.theta2)


def project_to_stationary(A: DiagonalMap, r, theta1, theta2) -> SphericalRankOne:
    """Keep r and the angles, solve the stationarity constraint for s."""
    S = math.sin(theta1) * math.sin(theta2)
    if r >= 1.0:
        s = 1.0 if S == 0.0 else 0.0
    else:
        k = r * S / (A.b * math.sqrt(1.0 - r * r))
        s = 1.0 / math.sqrt(1.0 + k * k)
    return rank_one_from_spherical(r, s, theta1, theta2)


class TaylorCoefficients(NamedTuple):
    h0: float
    linear: float
    quadratic: float


def _taylor_LQ(a, b, r, s, t1, t2):
    # vectorised; second-order eigenvalue expansions of (A+tB)^T (A+tB)
    R = np.sqrt(1 - r * r)
    S = np.sqrt(1 - s * s)
    s1, c1, s2, c2 = np.sin(t1), np.cos(t1), np.sin(t2), np.cos(t2)
    L = -b * R * S + r * s * s1 * s2
    mix_b = (b * r * S * s1 + s * R * s2) ** 2 / (b * b - 1)
    mix_a = (a * r * S * c1 + s * R * c2) ** 2 / (a * a - 1)
    Q = (
        s * s / 2
        - 0.5 * s * s * np.cos(2 * t2)
        - 4 * b * r * s * R * S * s1 * s2
        + mix_b
        + s * s * (r * b * c2 * s1 + r * a * c1 * s2) ** 2 / (b * b - a * a)
        - L * L
        + b * b * (-1 + s * s + 4 * (r * r - 1) * (s * s - 1) + mix_a + mix_b)
    ) / (2 * b)
    return L, Q


def taylor_coefficients(A: DiagonalMap, p: SphericalRankOne) -> TaylorCoefficients:
    L, Q = _taylor_LQ(A.a, A.b, p.r, p.s, p.theta1, p.theta2)
    return TaylorCoefficients(A.b, float(L), float(Q))


# ---------------------------------------------------------------------------
# reduced quadratic form


class AngleFeatures(NamedTuple):
    sin: np.ndarray  # sin th, >= 0 on [0, pi]
    sin_sq: np.ndarray
    cos2: np.ndarray
    sin2: np.ndarray
    cos4: np.ndarray


def angle_features(theta) -> AngleFeatures:
    th = np.asarray(theta, dtype=float)
    # Q is pi-periodic; fold angles outside [0, pi]
    th = np.where((th < 0) | (th > np.pi), np.mod(th, np.pi), th)
    sn = np.sin(th)
    return AngleFeatures(sn, sn * sn, np.cos(2 * th), np.sin(2 * th), np.cos(4 * th))


def grid_features(n: int) -> tuple[np.ndarray, AngleFeatures]:
    """Features on linspace(0, pi, n), built so th -> pi - th is bitwise exact."""
    k = np.arange(n)
    step = np.pi / (n - 1)
    folded = np.minimum(k, n - 1 - k) * step
    sign = np.where(k <= (n - 1) / 2, 1.0, -1.0)
    sn = np.sin(folded)
    s2 = sign * np.sin(2 * folded)
    s2[k == n - 1 - k] = 0.0  # th = pi/2 must stay fixed under th -> pi - th
    feats = AngleFeatures(sn, sn * sn, np.cos(2 * folded), s2, np.cos(4 * folded))
    return k * step, feats


@dataclass(frozen=True)
class QuadraticFormData:
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    mu: np.ndarray
    xi: float
    sin_product: np.ndarray


def _alpha(a, b, f1: AngleFeatures, f2: AngleFeatures):
    a2, b2 = a * a, b * b
    base = a2 - 2 * a2 * a2 + (7 - 21 * a2 + 8 * a2 * a2) * b2 + (7 + 8 * a2) * b2 * b2 - 8 * b2**3
    return b * (
        base
        - 8 * (a2 - 1) * b2 * f1.cos2 * (-a2 + b2 + (a2 - 1) * f2.cos2)
        - (a2 - b2) * ((1 + b2 - 8 * b2 * b2 + a2 * (-2 + 8 * b2)) * f2.cos2 + 2 * (1 - 2 * a2 + b2) * f1.cos4 * f2.sin_sq)
        + 8 * a * b * (b2 - 1) ** 2 * (f1.sin2 * f2.sin2)
    )


def _gamma(a, b, f1: AngleFeatures, f2: AngleFeatures):
    a2, b2 = a * a, b * b
    k = 8 * (b2 - 1) * (a2 - b2) * (1 - a2 + b2)
    return -b * (
        32 * b2 * b2
        - 16 * b2**3
        + 8 * a2 * (1 - 5 * b2)
        + 8 * a2 * a2 * (3 * b2 - 1)
        + k * (f1.cos2 + f2.cos2)
        - 8 * (a2 - 1) * (a2 + (a2 - 2) * b2) * (f1.cos2 * f2.cos2)
        + 8 * a * b * (b2 - 1) ** 2 * (f1.sin2 * f2.sin2)
    )


def _form(A: DiagonalMap, f1: AngleFeatures, f2: AngleFeatures) -> QuadraticFormData:
    a, b = A.a, A.b
    return QuadraticFormData(
        alpha=_alpha(a, b, f1, f2),
        beta=_alpha(a, b, f2, f1),
        gamma=_gamma(a, b, f1, f2),
        mu=b * b - f1.sin_sq * f2.sin_sq,
        xi=32 * (a * a - 1) * (b * b - 1) * (b * b - a * a),
        sin_product=f1.sin * f2.sin,
    )


def alpha_beta_gamma_mu(A: DiagonalMap, theta1, theta2) -> QuadraticFormData:
    """Coefficients of Q = (alpha delta + beta eta + gamma) / (xi mu).

    beta(th1, th2) = alpha(th2, th1) and gamma is symmetric, reflecting
    H(A + tB) = H(A + tB^T) for diagonal A.
    """
    return _form(A, angle_features(theta1), angle_features(theta2))


@dataclass(frozen=True)
class LagrangePoint:
    delta: np.ndarray
    eta: np.ndarray
    multiplier: np.ndarray

    @property
    def admissible(self):
        return (self.delta >= 0) & (self.delta <= 1) & (self.eta >= 0) & (self.eta <= 1)


def _lagrange(A: DiagonalMap, form: QuadraticFormData):
    b = A.b
    al, be, mu, S = form.alpha, form.beta, form.mu, form.sin_product
    valid = al * be > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sqrt(np.where(valid, be / al, np.nan))
        d1 = b * (b - ratio * S) / mu
        e1 = b * (b - S / ratio) / mu
        d2 = b * (b + ratio * S) / mu
        e2 = b * (b + S / ratio) / mu
        lam = -np.sign(al) * np.sqrt(np.where(valid, al * be, np.nan)) / (b * form.xi * mu * S)
    return valid, LagrangePoint(d1, e1, lam), LagrangePoint(d2, e2, -lam)


def lagrange_solutions(A: DiagonalMap, theta1, theta2) -> tuple[LagrangePoint, LagrangePoint]:
    """Both critical points (delta, eta, lambda) of the constrained Q."""
    form = alpha_beta_gamma_mu(A, theta1, theta2)
    valid, first, second = _lagrange(A, form)
    if not np.all(valid):
        raise BranchError("alpha*beta <= 0: sqrt(beta/alpha) has no real branch")
    return first, second


def _q_from_form(A: DiagonalMap, form: QuadraticFormData):
    b = A.b
    al, be, ga, mu, S = form.alpha, form.beta, form.gamma, form.mu, form.sin_product
    valid = al * be > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        num = al * (b * b - b * np.sqrt(be / al) * S) + be * (b * b - b * np.sqrt(al / be) * S)
        q = (num + ga * mu) / (form.xi * mu * mu)
    return np.where(valid, q, np.nan), valid


def q_reduced(A: DiagonalMap, theta1, theta2, strict: bool = True):
    """Q at the first Lagrange point, as a function of the two angles.

    With ``strict=False`` points where alpha*beta <= 0 come back as NaN
    instead of raising.
    """
    q, valid = _q_from_form(A, alpha_beta_gamma_mu(A, theta1, theta2))
    if strict and not np.all(valid):
        raise BranchError("alpha*beta <= 0: sqrt(beta/alpha) has no real branch")
    return float(q) if np.ndim(q) == 0 else q


def q_grid(A: DiagonalMap, n: int):
    """q_reduced and the first Lagrange point on an n x n grid over [0, pi]^2."""
    theta, f = grid_features(n)
    f1 = AngleFeatures(*(x[:, None] for x in f))
    f2 = AngleFeatures(*(x[None, :] for x in f))
    form = _form(A, f1, f2)
    q, valid = _q_from_form(A, form)
    _, first, _ = _lagrange(A, form)
    return theta, q, valid, first


@dataclass(frozen=True)
class OptimalDirection:
    u: np.ndarray
    v: np.ndarray
    B0: np.ndarray
    q_min: float

    @property
    def params(self) -> SphericalRankOne:
        u1, u2, u3 = self.u
        r = math.hypot(u2, u3)
        th = math.atan2(u3, u2)
        return rank_one_from_spherical(r, r, th, math.pi - th)


def min_q(A: DiagonalMap) -> float:
    """Closed-form minimum of Q over stationary rank-one directions."""
    a, b = A.a, A.b
    return -b * (b - 1) ** 3 / (4 * (a + 1) * (b + 1) * (a + b) * (1 + a + a * a + a * b - b + b * b))


def optimal_direction(A: DiagonalMap) -> OptimalDirection:
    require_distinct(A)
    a, b = A.a, A.b
    K = 1 + a + a * a + b * (a - 1) + b * b
    u1 = (b - 1) / math.sqrt(2 * (b + 1) * K)
    u2 = math.sqrt((1 + 2 * a * a + b * b + 2 * a * (1 + b)) / (2 * K))
    u3 = (b - 1) * math.sqrt(b) / math.sqrt(2 * (b + 1) * K)
    u = np.array([u1, u2, u3])
    v = np.array([u1, -u2, u3])
    return OptimalDirection(u, v, np.outer(u, v), min_q(A))


@dataclass(frozen=True)
class GridMinimum:
    theta1: float
    theta2: float
    q_min: float
    dist_diagonal: float  # to the line th1 = th2
    dist_antidiagonal: float  # to the line th1 + th2 = pi
    spacing: float


def brute_force_min_Q(A: DiagonalMap, grid_n: int = 512, admissible_only: bool = True) -> GridMinimum:
    if grid_n < 64:
        raise DomainError("grid_n must be >= 64")
    theta, q, valid, first = q_grid(A, grid_n)
    mask = valid & first.admissible if admissible_only else valid
    qq = np.where(mask, q, np.inf)
    i, j = np.unravel_index(np.argmin(qq), qq.shape)
    t1, t2 = theta[i], theta[j]
    return GridMinimum(
        float(t1),
        float(t2),
        float(qq[i, j]),
        abs(t1 - t2) / math.sqrt(2),
        abs(t1 + t2 - math.pi) / math.sqrt(2),
        float(theta[1] - theta[0]),
    )


# ---------------------------------------------------------------------------
# the two symmetry lines


def case1_q(A: DiagonalMap, theta):
    """Q restricted to th1 = th2 (there alpha = beta)."""
    return q_reduced(A, theta, theta)


def case1_critical_points(A: DiagonalMap) -> list[tuple[float, float]]:
    require_distinct(A)
    a, b = A.a, A.b
    # interior critical angle: tan th = x1 / y1
    tc = math.atan((b - 1) * math.sqrt(b) / (math.sqrt(b + 1) * math.sqrt((b - a) ** 2 + (a - 1) ** 2)))
    q_hat = b * (b - 1) ** 3 / (4 * (a - 1) * (b - a) * (b + 1) * (1 + a * a + b * (b - 1) - a * (b + 1)))
    return [
        (0.0, 0.0),
        (math.pi / 2, b / (b * b - 1)),
        (math.pi, 0.0),
        (tc, q_hat),
        (math.pi - tc, q_hat),
    ]


def case2_quadratic(A: DiagonalMap, r, theta1, enforce_constraint: bool = True):
    """Q along r = s, th2 = pi - th1 after substituting b(r^2-1) = -r^2 sin^2 th1."""
    a, b = A.a, A.b
    r = np.asarray(r, dtype=float)
    theta1 = np.asarray(theta1, dtype=float)
    if enforce_constraint:
        resid = np.max(np.abs(b * (r * r - 1) + r * r * np.sin(theta1) ** 2))
        if resid > 1e-9:
            raise ConstraintViolated(f"|b(r^2-1) + r^2 sin^2 th1| = {resid:.3e}")
    P = (a + 1) * (a + b)
    K = 1 + a + a * a + (a - 1) * b + b * b
    r2 = r * r
    q = r2 * (4 * P - K * r2 - 4 * P * np.cos(2 * theta1) + K * r2 * np.cos(4 * theta1)) / (8 * P * (b - 1))
    return float(q) if q.ndim == 0 else q


def case2_critical_point(A: DiagonalMap) -> tuple[float, float]:
    """Interior critical angle and value of the r = 1 slice of case2_quadratic.

    Note this slice is off the stationarity constraint; the constrained
    minimum is ``min_q``.
    """
    a, b = A.a, A.b
    P = (a + 1) * (a + b)
    K = 1 + a + a * a + (a - 1) * b + b * b
    theta = 0.5 * math.acos(P / K)
    return theta, -((b - 1) ** 3) / (4 * (a + 1) * (b + a) * K)


def boundary_q(A: DiagonalMap, s, theta):
    """Q(r=1, s, th) on the edge th1 = 0, th2 = th."""
    a, b = A.a, A.b
    s = np.asarray(s, dtype=float)
    return b * (2 * s * s * (a * a - 1) * np.sin(theta) ** 2 + 2 * (b * b - a * a) * (1 - s * s)) / (
        4 * (a * a - 1) * (b * b - a * a)
    )


def boundary_positivity_check(A: DiagonalMap, grid_n: int = 512) -> bool:
    """Q >= 0 on every stationary boundary direction (th_i in {0, pi}, r or s = 1)."""
    if grid_n < 64:
        raise DomainError("grid_n must be >= 64")
    th = np.linspace(0.0, np.pi, grid_n)[:, None]
    w = np.linspace(0.0, 1.0, grid_n)[None, :]
    one = np.ones_like(w)
    worst = np.inf
    for edge in (0.0, np.pi):
        for r, s, t1, t2 in (
            (one, w, edge, th),
            (w, one, edge, th),
            (one, w, th, edge),
            (w, one, th, edge),
        ):
            _, Q = _taylor_LQ(A.a, A.b, r, s, t1, t2)
            worst = min(worst, float(np.min(Q)))
    return worst >= -1e-12
