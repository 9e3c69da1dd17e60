"""Independent numerical references used to cross-check the closed forms.

Nothing here calls the closed-form machinery it is meant to check: roots
come from bisection, singular values from Jacobi rotations, derivatives
from finite differences, Taylor coefficients from eigenvalue perturbation
theory and characteristic polynomials from assembling the Gram matrix.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P

from .linalg3 import DiagonalMap


def bisect(f: Callable[[float], float], lo: float, hi: float, iters: int = 200) -> float:
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cubic_roots_bisection(d: float, c: float, b: float, a: float) -> np.ndarray:
    """Real roots of d x^3 + c x^2 + b x + a, assumed all real, ascending.

    The turning points split the line into three monotone pieces; each is
    searched by bisection. A double root shows up as a piece with no sign
    change, in which case the turning point itself is returned.
    """
    f = lambda x: ((d * x + c) * x + b) * x + a  # noqa: E731
    disc = c * c - 3 * d * b
    bound = 1 + max(abs(c), abs(b), abs(a)) / abs(d)
    if disc <= 0:
        return np.array([bisect(f, -bound, bound)] * 3)
    q = math.sqrt(disc)
    k1, k2 = sorted(((-c - q) / (3 * d), (-c + q) / (3 * d)))
    out = []
    for lo, hi in ((-bound, k1), (k1, k2), (k2, bound)):
        if (f(lo) < 0) == (f(hi) < 0):
            out.append(lo if abs(f(lo)) < abs(f(hi)) else hi)
        else:
            out.append(bisect(f, lo, hi))
    return np.array(out)


def jacobi_singular_values(M: np.ndarray, sweeps: int = 60) -> np.ndarray:
    """One-sided Jacobi SVD; singular values ascending."""
    U = np.array(M, dtype=float, copy=True)
    n = U.shape[1]
    for _ in range(sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = float(U[:, i] @ U[:, i])
                beta = float(U[:, j] @ U[:, j])
                gamma = float(U[:, i] @ U[:, j])
                if abs(gamma) <= 1e-17 * math.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2 * gamma)
                # for huge zeta sqrt(1 + zeta^2) overflows; t ~ 1 / (2 zeta)
                t = 0.5 / zeta if abs(zeta) > 1e150 else math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1 + zeta * zeta))
                cs = 1 / math.sqrt(1 + t * t)
                sn = cs * t
                ui, uj = U[:, i].copy(), U[:, j].copy()
                U[:, i] = cs * ui - sn * uj
                U[:, j] = sn * ui + cs * uj
        if not rotated:
            break
    return np.sort(np.linalg.norm(U, axis=0))


def richardson_derivatives(f: Callable[[float], float], t0: float = 0.0, steps=(1e-4, 5e-5)) -> tuple[float, float]:
    """First and second central differences, Richardson-extrapolated."""
    h1, h2 = steps
    ratio2 = (h1 / h2) ** 2

    def d1(h):
        return (f(t0 + h) - f(t0 - h)) / (2 * h)

    def d2(h):
        return (f(t0 + h) - 2 * f(t0) + f(t0 - h)) / (h * h)

    first = (ratio2 * d1(h2) - d1(h1)) / (ratio2 - 1)
    second = (ratio2 * d2(h2) - d2(h1)) / (ratio2 - 1)
    return first, second


def perturbation_taylor(A: DiagonalMap, B: np.ndarray) -> tuple[float, float]:
    """(L, Q) in H(A + tB) = b + L t + Q t^2 from Rayleigh-Schroedinger expansion.

    The Gram matrix is diag(d) + t X1 + t^2 X2, and each simple eigenvalue
    expands as d_i + t X1_ii + t^2 (X2_ii + sum_j X1_ij^2 / (d_i - d_j)).
    """
    d = np.array([1.0, A.a**2, A.b**2])
    Am = A.matrix
    X1 = Am.T @ B + B.T @ Am
    X2 = B.T @ B
    x = np.diag(X1)
    y = np.empty(3)
    for i in range(3):
        y[i] = X2[i, i] + sum(X1[i, j] ** 2 / (d[i] - d[j]) for j in range(3) if j != i)
    b = A.b
    # H = sqrt(l3 / l1), expanded to second order
    L = (x[2] - b * b * x[0]) / (2 * b)
    Q = (y[2] - x[0] * x[2] - b * b * y[0] + b * b * x[0] ** 2 - L * L) / (2 * b)
    return float(L), float(Q)


def gram_char_poly(M: np.ndarray) -> np.ndarray:
    """(l^3, l^2, l, 1) coefficients of det(gram(M) - l I)."""
    G = M.T @ M
    tr = np.trace(G)
    c2 = 0.5 * (tr * tr - np.trace(G @ G))
    return np.array([-1.0, tr, -c2, np.linalg.det(G)])


def gram_char_cubic(A: DiagonalMap, B: np.ndarray, t: float) -> np.ndarray:
    """(D1, C1, B1, A1) from assembling gram(A + tB), scaled by 4(b+1)^2 K^2."""
    a, b = A.a, A.b
    K = 1 + a + a * a + (a - 1) * b + b * b
    return gram_char_poly(A.matrix + t * B) * 4 * (b + 1) ** 2 * K**2


def discriminant_in_t(A: DiagonalMap, B: np.ndarray) -> np.ndarray:
    """Ascending coefficients of Disc(t) of the Gram cubic, from assembly only."""
    samples = [gram_char_poly(A.matrix + t * B) for t in (-1.0, 0.0, 1.0)]
    # every coefficient is quadratic in t; recover it from three samples
    polys = []
    for k in range(4):
        fm, f0, fp = (s[k] for s in samples)
        polys.append(np.array([f0, (fp - fm) / 2, (fp + fm) / 2 - f0]))
    d, c, b, a = polys  # d x^3 + c x^2 + b x + a
    m = P.polymul
    terms = [
        18 * m(m(d, c), m(b, a)),
        -4 * m(m(c, c), m(c, a)),
        m(m(c, c), m(b, b)),
        -4 * m(m(d, b), m(b, b)),
        -27 * m(m(d, d), m(a, a)),
    ]
    out = np.zeros(9)
    for tpoly in terms:
        out[: len(tpoly)] += tpoly
    return out


def discriminant_double_roots(A: DiagonalMap, B: np.ndarray, t_lo: float, t_hi: float, grid: int = 4001) -> list[float]:
    """Zeros of Disc(t) on [t_lo, t_hi] found as sign changes of Disc'(t).

    Disc >= 0 for a symmetric matrix pencil, so its zeros are double and
    only visible as touching points; we bisect on the derivative and keep
    the critical points where Disc is negligible.
    """
    disc = discriminant_in_t(A, B)
    ddisc = P.polyder(disc)
    ts = np.linspace(t_lo, t_hi, grid)
    dv = P.polyval(ts, ddisc)
    scale = np.max(np.abs(P.polyval(ts, disc)))
    roots = []
    for i in np.nonzero(np.sign(dv[:-1]) != np.sign(dv[1:]))[0]:
        r = bisect(lambda t: P.polyval(t, ddisc), ts[i], ts[i + 1])
        if P.polyval(r, disc) <= 1e-9 * scale:
            roots.append(r)
    return roots
