"""Concavity window of t -> H(A + t B0) for the optimal rank-one direction B0.

The Gram matrix (A + tB0)^T (A + tB0) has a characteristic cubic whose
coefficients are quadratic in t. Its discriminant has a repeated quadratic
factor P(t); the roots t- < 0 < t+ of P are where two eigenvalues of the
Gram matrix collide, and H is smooth and below b strictly between them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import ComplexLeakage, DomainError
from .linalg3 import DiagonalMap, linear_distortion
from .rank_one import optimal_direction, require_distinct

LEAK_TOL = 1e-7
MARGIN = 0.1


def _k(a, b):
    return 1 + a + a * a + (a - 1) * b + b * b


class CharCubic(NamedTuple):
    """D1 l^3 + C1 l^2 + B1 l + A1 = 0."""

    A1: object
    B1: object
    C1: object
    D1: object

    def __call__(self, lam):
        return ((self.D1 * lam + self.C1) * lam + self.B1) * lam + self.A1


def _cubic(a, b, t) -> CharCubic:
    # plain arithmetic only, so floats, arrays and Fractions all work
    K = _k(a, b)
    D1 = -4 * (b + 1) ** 2 * K**2
    C1 = 4 * (b + 1) * K * (
        1 + b**2 + b**3 + b**5
        + a**4 * (b + 1)
        + a**3 * (b + 1) * (1 + b - 2 * t)
        + (b - 1) ** 2 * (b * b + 1) * t
        + (b**3 + 1) * t * t
        + a * a * (b + 1) * (2 - b + 2 * b * b - 2 * (b + 1) * t + t * t)
        + a * (b + 1) * (1 + b + b * b + b**3 - (b * b + 1) * t + (b + 1) * t * t)
    )
    B1 = (
        -4 * a**6 * (b + 1) ** 2 * (b * b + 1)
        - 4 * (b**4 + b) ** 2
        - 8 * a**5 * (1 + b) ** 2 * (b * b + 1) * (1 + b - t)
        - 8 * b * b * (b - 1) ** 2 * (b**3 + 1) * t
        - (1 + b * (4 + b * (8 + b * (-12 + b * (30 + b * (-12 + b * (8 + b * (4 + b)))))))) * t * t
        + 4 * a**4 * (b + 1) * (-(b + 1) * (3 + 7 * b * b + 3 * b**4) + (b + 3) * (3 * b + 1) * (b * b + 1) * t - (b + 1) * (b * b + 1) * t * t)
        + 4 * a**3 * (b + 1) * (
            -2 * (1 + b + b * b * (b + 1) * (2 + 2 * b + b**3))
            + 4 * (b + 1) * (b * b + 1) * (1 + b + b * b) * t
            - (b * b + 1) * (1 + b * (6 + b)) * t * t
        )
        + a * a * (b + 1) * (
            -4 * (b + 1) * (b * b + 1) * (1 + b * (-2 + b * (6 + (-2 + b) * b)))
            + 4 * (2 + b * (7 + b * (-2 + b * (18 + b * (-2 + b * (7 + 2 * b)))))) * t
            - (1 + b) * (5 + b * (16 + b * (6 + b * (16 + 5 * b)))) * t * t
        )
        + 2 * a * (b + 1) * (
            -4 * (b * b + b**3 + b**5 + b**6)
            + 2 * t * (1 + b**3 * (3 + 3 * b + b**4))
            - (1 + b * (8 + b * (3 + b * (8 + b * (3 + b * (8 + b)))))) * t * t
        )
    )
    A1 = b * b * (2 * a**3 * (b + 1) + 2 * a * a * (b + 1) * (1 + b - t) - (b + 1) * (b * b + 1) * t + 2 * a * (1 + b**3 - 4 * b * t)) ** 2
    return CharCubic(A1, B1, C1, D1)


def char_cubic(A: DiagonalMap, t) -> CharCubic:
    """Characteristic cubic of gram(A + t B0), scaled by 4(b+1)^2 K^2."""
    require_distinct(A)
    return _cubic(A.a, A.b, t)


def _p(a, b):
    c2 = -1 - a - 2 * a * a - 4 * b - 7 * a * b - 4 * a * a * b + 2 * b * b - 7 * a * b * b - 2 * a * a * b * b - 4 * b**3 - a * b**3 - b**4
    c1 = (
        -1 + 2 * a + a * a + 4 * a**3 - 6 * b - 4 * a * b + 7 * a * a * b + 8 * a**3 * b - b * b - 12 * a * b * b
        + 7 * a * a * b * b + 4 * a**3 * b * b - b**3 - 4 * a * b**3 + a * a * b**3 - 6 * b**4 + 2 * a * b**4 - b**5
    )
    c0 = -2 * (
        -a + a**4 + b - a * b - 2 * a * a * b + 2 * a**4 * b + b * b + 2 * a * b * b - 4 * a * a * b * b + a**4 * b * b
        + 2 * a * b**3 - 2 * a * a * b**3 + b**4 - a * b**4 + b**5 - a * b**5
    )
    return c2, c1, c0


def p_factor(A: DiagonalMap) -> tuple[float, float, float]:
    """(c2, c1, c0) of the repeated quadratic factor P(t) = c2 t^2 + c1 t + c0."""
    require_distinct(A)
    return _p(A.a, A.b)


def g1_j1(A: DiagonalMap) -> tuple[float, float]:
    a, b = A.a, A.b
    g1 = (
        1 - 2 * a - a * a - 4 * a**3 + 6 * b + 4 * a * b - 7 * a * a * b - 8 * a**3 * b + b * b + 12 * a * b * b
        - 7 * a * a * b * b - 4 * a**3 * b * b + b**3 + 4 * a * b**3 - a * a * b**3 + 6 * b**4 - 2 * a * b**4 + b**5
    )
    j1 = (
        1 + 4 * a + 10 * a * a + 12 * a**3 + 9 * a**4 + 4 * b + 16 * a * b + 22 * a * a * b + 20 * a**3 * b
        - 2 * a**4 * b + 12 * a * b * b + 32 * a * a * b * b + 20 * a**3 * b * b + 9 * a**4 * b * b + 6 * b**3
        + 12 * a * b**3 + 22 * a * a * b**3 + 12 * a**3 * b**3 + 16 * a * b**4 + 10 * a * a * b**4 + 4 * b**5
        + 4 * a * b**5 + b**6
    )
    return g1, j1


def delta(A: DiagonalMap) -> float:
    """(b^2-1)^2 J1 in factored form; the discriminant of P."""
    a, b = A.a, A.b
    return (b * b - 1) ** 2 * (
        1 + 4 * b + 6 * b**3 + 4 * b**5 + b**6
        + 4 * a * (b + 1) * (b**4 + 3 * b**3 + 3 * b + 1)
        + 4 * a**3 * (b + 1) * (3 + b * (2 + 3 * b))
        + 2 * a * a * (1 + b + b * b) * (5 + b * (6 + 5 * b))
        + a**4 * (9 + b * (9 * b - 2))
    )


@dataclass(frozen=True)
class ConcavityWindow:
    t_minus: float
    t_plus: float
    h_minus: float
    h_plus: float
    p_coeffs: tuple[float, float, float]
    g1: float
    j1: float
    delta: float

    @property
    def width(self) -> float:
        return self.t_plus - self.t_minus


def window_endpoints(A: DiagonalMap) -> tuple[float, float]:
    require_distinct(A)
    c2 = _p(A.a, A.b)[0]
    g1, j1 = g1_j1(A)
    root = (A.b * A.b - 1) * math.sqrt(j1)
    return (g1 + root) / (2 * c2), (g1 - root) / (2 * c2)


def window(A: DiagonalMap) -> ConcavityWindow:
    require_distinct(A)
    tm, tp = window_endpoints(A)
    g1, j1 = g1_j1(A)
    B0 = optimal_direction(A).B0
    M = A.matrix
    # the endpoints are double roots of the cubic, where the SVD is far
    # better conditioned than Cardano
    return ConcavityWindow(
        t_minus=tm,
        t_plus=tp,
        h_minus=linear_distortion(M + tm * B0),
        h_plus=linear_distortion(M + tp * B0),
        p_coeffs=p_factor(A),
        g1=g1,
        j1=j1,
        delta=delta(A),
    )


class EigenBranches(NamedTuple):
    X: complex
    Y: complex
    Z: complex
    lam1: float
    lam2: float
    lam3: float


def _cardano(cub: CharCubic):
    A1, B1, C1, D1 = (np.asarray(c, dtype=complex) for c in cub)
    inner = -4 * (C1**2 - 3 * B1 * D1) ** 3 + (2 * C1**3 - 9 * B1 * C1 * D1 + 27 * A1 * D1**2) ** 2
    X = (-2 * C1**3 + 9 * B1 * C1 * D1 - 27 * A1 * D1**2 + np.sqrt(inner)) ** (1 / 3)
    Y = (-(C1**2) + 3 * B1 * D1) / D1
    Z = -C1 / (3 * D1)
    c = 2 ** (1 / 3)
    w = (1 - 1j * math.sqrt(3)) / 2
    wb = (1 + 1j * math.sqrt(3)) / 2
    l1 = Z - c * Y / (3 * X) + X / (3 * c * D1)
    l2 = Z + w * c * Y / (3 * X) - wb * X / (3 * c * D1)
    l3 = Z + wb * c * Y / (3 * X) - w * X / (3 * c * D1)
    return X, Y, Z, (l1, l2, l3)


def _polish(cub: CharCubic, lam, steps: int = 2):
    A1, B1, C1, D1 = (np.asarray(c, dtype=float) for c in cub)
    for _ in range(steps):
        f = ((D1 * lam + C1) * lam + B1) * lam + A1
        df = (3 * D1 * lam + 2 * C1) * lam + B1
        ok = np.abs(df) > 1e-8 * np.abs(D1) * np.maximum(np.abs(lam), 1.0) ** 2
        lam = np.where(ok, lam - f / np.where(ok, df, 1.0), lam)
    return lam


def _deflate_close_pair(cub: CharCubic, lams):
    # near a collision Newton stalls; re-solve the closest pair from the
    # quadratic left after dividing out the well separated root
    A1, B1, C1, D1 = (np.asarray(c, dtype=float) for c in cub)
    L = np.stack(np.broadcast_arrays(*lams))
    gaps = np.stack([np.abs(L[1] - L[2]), np.abs(L[0] - L[2]), np.abs(L[0] - L[1])])
    k = np.argmin(gaps, axis=0)  # index of the isolated root
    lk = np.take_along_axis(L, k[None], axis=0)[0]
    total = -C1 / D1 - lk
    prod = -A1 / (D1 * lk)
    half = total / 2
    disc = np.sqrt(np.maximum(half * half - prod, 0.0))
    lo, hi = half - disc, half + disc
    lo = np.where(np.abs(lo) < np.abs(hi), prod / np.where(hi == 0, 1, hi), lo)
    out = L.copy()
    for idx in range(3):
        others = [j for j in range(3) if j != idx]
        sel = k == idx
        i, j = others
        first_smaller = L[i] <= L[j]
        out[i] = np.where(sel, np.where(first_smaller, lo, hi), out[i])
        out[j] = np.where(sel, np.where(first_smaller, hi, lo), out[j])
    return [out[0], out[1], out[2]]


def _check_range(A: DiagonalMap, t, margin: float):
    tm, tp = window_endpoints(A)
    pad = margin * (tp - tm)
    tt = np.asarray(t, dtype=float)
    if np.any(tt < tm - pad) or np.any(tt > tp + pad):
        raise DomainError(f"t outside [{tm - pad:.6g}, {tp + pad:.6g}]")


def eigen_branches(A: DiagonalMap, t, margin: float = MARGIN, polish: bool = True) -> EigenBranches:
    """Closed-form Cardano roots of the characteristic cubic of gram(A + tB0).

    Complex intermediates use principal cube roots; the imaginary parts of
    the three results are checked and discarded. With ``polish`` each root
    gets two Newton steps on the same cubic.
    """
    require_distinct(A)
    _check_range(A, t, margin)
    cub = _cubic(A.a, A.b, np.asarray(t, dtype=float))
    X, Y, Z, lams = _cardano(cub)
    scale = max(float(np.max(np.abs(l))) for l in lams)
    leak = max(float(np.max(np.abs(l.imag))) for l in lams)
    if leak > LEAK_TOL * scale:
        raise ComplexLeakage(f"imaginary residue {leak:.3e} exceeds {LEAK_TOL:g} * {scale:.3e}")
    real = [l.real for l in lams]
    if polish:
        real = _deflate_close_pair(cub, [_polish(cub, l) for l in real])
    real = [float(l) if np.ndim(l) == 0 else l for l in real]
    unwrap = lambda z: complex(z) if np.ndim(z) == 0 else z  # noqa: E731
    return EigenBranches(unwrap(X), unwrap(Y), unwrap(Z), *real)


def h_along(A: DiagonalMap, t, margin: float = MARGIN):
    """H(A + tB0) = sqrt(lam_max / lam_min) from the closed-form branches."""
    br = eigen_branches(A, t, margin)
    lam = np.stack(np.broadcast_arrays(br.lam1, br.lam2, br.lam3))
    h = np.sqrt(lam.max(axis=0) / lam.min(axis=0))
    return float(h) if h.ndim == 0 else h


def track_branches(A: DiagonalMap, ts, margin: float = MARGIN) -> np.ndarray:
    """Eigenvalue branches along increasing ts, continued by nearest neighbour.

    Unlike sorting, this lets branches cross, which is what happens at t+-.
    Returns an array of shape (len(ts), 3).
    """
    ts = np.asarray(ts, dtype=float)
    br = eigen_branches(A, ts, margin)
    raw = np.stack(np.broadcast_arrays(br.lam1, br.lam2, br.lam3), axis=-1).reshape(len(ts), 3)
    out = np.empty_like(raw)
    out[0] = np.sort(raw[0])
    for k in range(1, len(ts)):
        prev = out[k - 1]
        # linear extrapolation makes crossings resolvable
        guess = 2 * prev - out[k - 2] if k >= 2 else prev
        best, cost = None, np.inf
        for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
            c = float(np.sum((raw[k, list(perm)] - guess) ** 2))
            if c < cost:
                best, cost = perm, c
        out[k] = raw[k, list(best)]
    return out


# ---------------------------------------------------------------------------
# discriminant and its quartic cofactor, in exact rational arithmetic


def _pmul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(q):
            out[i + j] += x * y
    return out


def _padd(*ps):
    n = max(len(p) for p in ps)
    out = [Fraction(0)] * n
    for p in ps:
        for i, x in enumerate(p):
            out[i] += x
    return out


def _pscale(c, p):
    return [c * x for x in p]


def _pdivmod(num, den):
    num = list(num)
    q = [Fraction(0)] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        q[i] = num[i + len(den) - 1] / den[-1]
        for j, d in enumerate(den):
            num[i + j] -= q[i] * d
    return q, num[: len(den) - 1]


def _quadratic_in_t(a, b):
    # coefficient lists (ascending powers of t) of A1, B1, C1, D1
    vals = [_cubic(a, b, Fraction(k)) for k in (0, 1, 2)]
    out = []
    for idx in range(4):
        f0, f1, f2 = (v[idx] for v in vals)
        c2 = (f2 - 2 * f1 + f0) / 2
        c1 = f1 - f0 - c2
        out.append([f0, c1, c2])
    return out


def discriminant_poly(A: DiagonalMap) -> list[Fraction]:
    """Discriminant of the cubic as an exact polynomial in t (ascending)."""
    a, b = Fraction(A.a), Fraction(A.b)
    d, c, bb, aa = _quadratic_in_t(a, b)  # d=A1, c=B1, bb=C1, aa=D1 in cubic order
    m = _pmul
    # 18 abcd - 4 b^3 d + b^2 c^2 - 4 a c^3 - 27 a^2 d^2 for a x^3 + b x^2 + c x + d
    return _padd(
        _pscale(18, m(m(aa, bb), m(c, d))),
        _pscale(-4, m(m(bb, bb), m(bb, d))),
        m(m(bb, bb), m(c, c)),
        _pscale(-4, m(m(aa, c), m(c, c))),
        _pscale(-27, m(m(aa, aa), m(d, d))),
    )


def quartic_remainder(A: DiagonalMap) -> list[Fraction]:
    """R(t) with Disc(t) = P(t)^2 R(t), as exact ascending coefficients.

    Raises ArithmeticError if P^2 does not divide the discriminant exactly.
    """
    require_distinct(A)
    a, b = Fraction(A.a), Fraction(A.b)
    c2, c1, c0 = _p(a, b)
    p = [c0, c1, c2]
    q, rem = _pdivmod(discriminant_poly(A), _pmul(p, p))
    if any(r != 0 for r in rem):
        raise ArithmeticError("P(t)^2 does not divide the discriminant")
    return q


def quartic_remainder_positivity(A: DiagonalMap, samples: int = 1000) -> bool:
    """True iff R(t) > 0 at every sample of [2t-, 2t+] away from t+-."""
    if samples < 100:
        raise DomainError("samples must be >= 100")
    coeffs = quartic_remainder(A)
    tm, tp = window_endpoints(A)
    ts = np.linspace(2 * tm, 2 * tp, samples)
    ts = ts[(np.abs(ts - tm) >= 1e-3) & (np.abs(ts - tp) >= 1e-3)]
    vals = np.polynomial.polynomial.polyval(ts, [float(c) for c in coeffs])
    return bool(np.all(vals > 0))
