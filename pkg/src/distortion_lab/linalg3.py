"""Fixed-size 3x3 linear algebra and the distortion functionals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonPositiveJacobian, NotSymmetric, SingularMatrix

# relative gap below which two eigenvalues are flagged as (near) degenerate
DEGENERACY_GAP = 1e-9
# sigma_min / sigma_max at or below this counts as singular
SINGULAR_RATIO = 1e-13


@dataclass(frozen=True)
class DiagonalMap:
    """The diagonal matrix diag(1, a, b) with 1 < a < b."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)) or not (1.0 < a < b):
            raise DomainError(f"requires 1 < a < b, got a={self.a!r}, b={self.b!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag([1.0, self.a, self.b])


@dataclass(frozen=True)
class SortedEigenTriple:
    values: np.ndarray
    degenerate: bool

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class DistortionReport:
    H: float
    K_O: float
    K_I: float
    K_frob: float


def as_matrix3(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise DomainError(f"expected a 3x3 matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError("matrix has non-finite entries")
    return M


def gram(M) -> np.ndarray:
    M = as_matrix3(M)
    return M.T @ M


def eigenvalues_sym3(S, sym_tol: float | None = None) -> SortedEigenTriple:
    """Ascending eigenvalues of a real symmetric 3x3 matrix.

    Uses the trigonometric form of the real-root cubic, so no complex
    intermediates appear. Diagonal input is returned exactly.
    """
    S = as_matrix3(S)
    scale = max(1.0, float(np.max(np.abs(S))))
    tol = 1e-12 * scale if sym_tol is None else sym_tol
    if np.max(np.abs(S - S.T)) > tol:
        raise NotSymmetric(f"asymmetry {np.max(np.abs(S - S.T)):.3e} exceeds {tol:.3e}")
    S = 0.5 * (S + S.T)

    off = S[0, 1] ** 2 + S[0, 2] ** 2 + S[1, 2] ** 2
    if off == 0.0:
        vals = np.sort(np.diag(S))
    else:
        q = np.trace(S) / 3.0
        D = S - q * np.eye(3)
        p = math.sqrt((D[0, 0] ** 2 + D[1, 1] ** 2 + D[2, 2] ** 2 + 2.0 * off) / 6.0)
        Bn = D / p
        r = np.linalg.det(Bn) / 2.0
        # roundoff can push r just outside [-1, 1]
        phi = math.acos(min(1.0, max(-1.0, r))) / 3.0
        # only the isolated root is accurate near a double root; the
        # other pair comes from the 2x2 block orthogonal to its eigenvector
        k = 0 if r >= 0 else 1
        iso = q + 2.0 * p * math.cos(phi + 2.0 * math.pi * k / 3.0)
        vals = np.sort(np.array([iso, *_deflated_pair(S, iso)]))
    span = max(abs(vals[0]), abs(vals[2]))
    gaps = np.diff(vals)
    degenerate = bool(span > 0 and np.min(gaps) < DEGENERACY_GAP * span)
    return SortedEigenTriple(vals, degenerate)


def _deflated_pair(S: np.ndarray, lam: float) -> tuple[float, float]:
    R = S - lam * np.eye(3)
    crosses = [np.cross(R[0], R[1]), np.cross(R[0], R[2]), np.cross(R[1], R[2])]
    x = max(crosses, key=lambda c: c @ c)
    nx = math.sqrt(x @ x)
    if nx == 0.0:
        return lam, lam
    x = x / nx
    # orthonormal complement of x
    e = np.eye(3)[int(np.argmin(np.abs(x)))]
    y = np.cross(x, e)
    y /= np.linalg.norm(y)
    z = np.cross(x, y)
    p, q, r = y @ S @ y, z @ S @ z, y @ S @ z
    m, h = 0.5 * (p + q), math.hypot(0.5 * (p - q), r)
    return m - h, m + h


def singular_values(M) -> np.ndarray:
    """Singular values in ascending order."""
    return np.linalg.svd(as_matrix3(M), compute_uv=False)[::-1]


def _checked_singular_values(M) -> np.ndarray:
    s = singular_values(M)
    if s[2] == 0.0 or s[0] <= SINGULAR_RATIO * s[2]:
        raise SingularMatrix(f"matrix is singular to working precision (sigma={s})")
    return s


def linear_distortion(M) -> float:
    """H(M) = sigma_max / sigma_min."""
    s = _checked_singular_values(M)
    return float(s[2] / s[0])


def distortion_report(M) -> DistortionReport:
    M = as_matrix3(M)
    det = float(np.linalg.det(M))
    if det <= 0.0:
        raise NonPositiveJacobian(f"det = {det:.6g} <= 0")
    s = _checked_singular_values(M)
    # |Df| normalised by sqrt(n) so that the identity has K_frob = 1
    frob = float(np.linalg.norm(M)) / math.sqrt(3.0)
    return DistortionReport(
        H=float(s[2] / s[0]),
        K_O=float(s[2] ** 3 / det),
        K_I=float(det / s[0] ** 3),
        K_frob=frob**3 / det,
    )
