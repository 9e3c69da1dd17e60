"""Invariant groups run by ``distortion-lab verify``."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError
from .lamination import laminate_jacobian, laminate_map, laminate_sequence, phase_distortions
from .linalg3 import DiagonalMap, eigenvalues_sym3, gram, linear_distortion
from .oracles import discriminant_double_roots, jacobi_singular_values, perturbation_taylor, richardson_derivatives
from .rank_one import (
    _lagrange,
    alpha_beta_gamma_mu,
    boundary_positivity_check,
    brute_force_min_Q,
    min_q,
    optimal_direction,
    project_to_stationary,
    q_grid,
    stationarity_residual,
    taylor_coefficients,
)
from .window import delta, quartic_remainder_positivity, window_endpoints


@dataclass(frozen=True)
class RunConfig:
    grid_n: int = 512
    sym_tol: float = 1e-12
    sing_tol: float = 1e-13
    fd_tol: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        for name in ("sym_tol", "sing_tol", "fd_tol"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ConfigError(f"{name} must be a positive number, got {val!r}")
        if self.grid_n < 64:
            raise ConfigError(f"grid_n must be >= 64, got {self.grid_n}")

    @property
    def grid_tol(self) -> float:
        # the grid error of a smooth minimum shrinks with the squared spacing
        return 2e-4 * max(1.0, (512 / self.grid_n) ** 2)


@dataclass
class GroupResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def expect(self, ok: bool, what: str):
        self.checked += 1
        if not ok:
            self.failures.append(what)


def _random_ab(rng, n, hi=50.0):
    out = []
    while len(out) < n:
        a, b = np.sort(rng.uniform(1.0, hi, 2))
        if a > 1 + 1e-3 and b > a + 1e-3:
            out.append(DiagonalMap(a, b))
    return out


def _orthogonal(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    return q * np.sign(np.diag(r))


def orthogonal_invariance(cfg: RunConfig, rng) -> GroupResult:
    g = GroupResult("orthogonal invariance of H")
    for _ in range(200):
        M = _orthogonal(rng) @ np.diag(rng.uniform(0.2, 20, 3)) @ _orthogonal(rng)
        h = linear_distortion(M)
        h2 = linear_distortion(_orthogonal(rng) @ M @ _orthogonal(rng))
        g.expect(abs(h - h2) <= 1e-10 * h, f"H changed by {abs(h - h2):.2e}")
    return g


def eigen_vs_svd(cfg: RunConfig, rng) -> GroupResult:
    g = GroupResult("trigonometric eigen-solver vs Jacobi SVD")
    for _ in range(200):
        M = rng.standard_normal((3, 3)) * rng.uniform(0.1, 10)
        lam = eigenvalues_sym3(gram(M), sym_tol=cfg.sym_tol).values
        sv = jacobi_singular_values(M)
        err = np.max(np.abs(lam - sv**2)) / sv[-1] ** 2
        g.expect(err <= 1e-9, f"eigen/SVD mismatch {err:.2e}")
    return g


SHAPES = [(2.0, 4.0), (2.0, 10.0), (3.0, 7.0), (1.5, 20.0), (99.0, 154.0)]


def q_symmetry(cfg: RunConfig, rng) -> GroupResult:
    g = GroupResult("Q symmetry identities on a 128x128 grid")
    for ab in SHAPES:
        _, q, _, _ = q_grid(DiagonalMap(*ab), 128)
        g.expect(np.array_equal(q, q.T, equal_nan=True), f"{ab}: Q(t1,t2) != Q(t2,t1)")
        g.expect(np.array_equal(q, q[::-1, ::-1], equal_nan=True), f"{ab}: Q(t1,t2) != Q(pi-t1,pi-t2)")
        g.expect(np.array_equal(q, q.T[::-1, ::-1], equal_nan=True), f"{ab}: Q(t1,t2) != Q(pi-t2,pi-t1)")
    return g


def taylor_vs_fd(cfg: RunConfig, rng) -> GroupResult:
    g = GroupResult("Taylor coefficients vs finite differences on stationary directions")
    for ab in [(2.0, 4.0), (3.0, 7.0), (1.5, 3.0)]:
        A = DiagonalMap(*ab)
        M = A.matrix
        for _ in range(20):
            # keep away from the poles, where s rounds to 1 and sqrt(1 - s^2) loses digits
            p = project_to_stationary(A, rng.uniform(0.05, 0.999), *rng.uniform(0.05, math.pi - 0.05, 2))
            tc = taylor_coefficients(A, p)
            d1, d2 = richardson_derivatives(lambda t: linear_distortion(M + t * p.B))
            L_pt, Q_pt = perturbation_taylor(A, p.B)
            g.expect(abs(stationarity_residual(A, p)) <= 1e-10, "projection left a residual")
            g.expect(abs(tc.linear) <= 1e-10, f"L = {tc.linear:.2e}")
            g.expect(abs(d1) <= 1e-6, f"dH/dt = {d1:.2e}")
            g.expect(abs(tc.quadratic - d2 / 2) <= cfg.fd_tol, f"Q off by {abs(tc.quadratic - d2 / 2):.2e}")
            g.expect(abs(tc.quadratic - Q_pt) <= 1e-9, f"Q vs perturbation {abs(tc.quadratic - Q_pt):.2e}")
    return g


def lagrange_equations(cfg: RunConfig, rng) -> GroupResult:
    g = GroupResult("Lagrange system residuals")
    for ab in [(2.0, 4.0), (3.0, 7.0), (2.0, 10.0)]:
        A = DiagonalMap(*ab)
        b = A.b
        th = rng.uniform(0.05, math.pi - 0.05, (200, 2))
        form = alpha_beta_gamma_mu(A, th[:, 0], th[:, 1])
        valid, first, _ = _lagrange(A, form)
        al, be, mu, xi = form.alpha[valid], form.beta[valid], form.mu[valid], form.xi
        d, e, lam = first.delta[valid], first.eta[valid], first.multiplier[valid]
        fd = b * b * lam - e * lam * mu + al / (xi * mu)
        fe = b * b * lam - d * lam * mu + be / (xi * mu)
        fl = b * b * (1 - d - e) + d * e * mu
        worst = float(np.max(np.abs(np.concatenate([fd, fe, fl]))))
        g.expect(worst <= 1e-9, f"{ab}: residual {worst:.2e}")
        g.expect(valid.sum() > 0, f"{ab}: no angle pair with alpha*beta > 0")
    return g


def grid_minimum(cfg: RunConfig, rng) -> GroupResult:
    g = GroupResult(f"closed-form minimum of Q vs {cfg.grid_n}^2 grid")
    for ab in [(2.0, 4.0), (2.0, 10.0), (2.0, 105.0), (99.0, 154.0)]:
        A = DiagonalMap(*ab)
        gm = brute_force_min_Q(A, cfg.grid_n)
        q = min_q(A)
        g.expect(abs(gm.q_min - q) <= cfg.grid_tol, f"{ab}: grid {gm.q_min:.6g} vs {q:.6g}")
        g.expect(q <= gm.q_min + 1e-9, f"{ab}: grid beats the closed form")
        g.expect(gm.dist_antidiagonal <= gm.spacing, f"{ab}: minimiser off th1 + th2 = pi")
        o = optimal_direction(A)
        g.expect(abs(stationarity_residual(A, o.params)) <= 1e-12, f"{ab}: B0 not stationary")
        g.expect(np.linalg.svd(o.B0, compute_uv=False)[1] <= 1e-12, f"{ab}: B0 not rank one")
    return g


def boundary_positivity(cfg: RunConfig, rng) -> GroupResult:
    g = GroupResult("Q >= 0 on the boundary of the parameter box")
    for ab in SHAPES:
        g.expect(boundary_positivity_check(DiagonalMap(*ab), min(cfg.grid_n, 256)), f"{ab}: negative boundary value")
    return g


def window_discriminant(cfg: RunConfig, rng) -> GroupResult:
    g = GroupResult("Delta > 0 and t+- at double roots of the discriminant")
    for A in _random_ab(rng, 200):
        g.expect(delta(A) > 0, f"Delta <= 0 at ({A.a}, {A.b})")
    for A in _random_ab(rng, 20):
        tm, tp = window_endpoints(A)
        pad = 0.5 * (tp - tm)
        roots = discriminant_double_roots(A, optimal_direction(A).B0, tm - pad, tp + pad)
        for t in (tm, tp):
            err = min((abs(r - t) / abs(t) for r in roots), default=math.inf)
            g.expect(err <= 1e-6, f"({A.a:.3f}, {A.b:.3f}): t={t:.6g} off by {err:.2e}")
    return g


def quartic_remainder(cfg: RunConfig, rng) -> GroupResult:
    g = GroupResult("quartic cofactor R(t) > 0")
    for ab in [(2.0, 4.0), (2.0, 105.0), (3.0, 7.0)] + [(A.a, A.b) for A in _random_ab(rng, 5)]:
        g.expect(quartic_remainder_positivity(DiagonalMap(*ab), 1000), f"{ab}: R(t) <= 0 somewhere")
    return g


def laminates(cfg: RunConfig, rng) -> GroupResult:
    g = GroupResult("two-valued laminate derivative and uniform convergence")
    for ab in [(2.0, 4.0), (3.0, 7.0)]:
        A = DiagonalMap(*ab)
        for nu in (1, 10, 100):
            seq = laminate_sequence(A, nu)
            x = rng.uniform(-1, 1, (500, 3))
            dev = np.max(np.linalg.norm(laminate_map(seq, x) - x @ A.matrix.T, axis=1))
            g.expect(dev <= 1 / nu, f"{ab} nu={nu}: deviation {dev:.3e}")
            for xi in x[:50]:
                J = laminate_jacobian(seq, xi)
                g.expect(J is seq.up_matrix or J is seq.down_matrix, "jacobian outside the two-matrix set")
        hm, hp = phase_distortions(laminate_sequence(A, 1))
        g.expect(max(hm, hp) < A.b, f"{ab}: no distortion drop")
    return g


GROUPS: list[Callable[[RunConfig, np.random.Generator], GroupResult]] = [
    orthogonal_invariance,
    eigen_vs_svd,
    q_symmetry,
    taylor_vs_fd,
    lagrange_equations,
    grid_minimum,
    boundary_positivity,
    window_discriminant,
    quartic_remainder,
    laminates,
]


def run_verify(cfg: RunConfig) -> list[GroupResult]:
    rng = np.random.default_rng(cfg.seed)
    out = []
    for group in GROUPS:
        t0 = time.perf_counter()
        res = group(cfg, rng)
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out
