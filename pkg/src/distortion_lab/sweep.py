"""Sweeps over families diag(1, c, f(c)) and the laminate distortion drop."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .linalg3 import DiagonalMap
from .rank_one import _taylor_LQ, optimal_direction
from .window import window

THREADS_ENV = "DISTORTION_LAB_THREADS"


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


@dataclass(frozen=True)
class FamilySpec:
    name: str
    f: Callable[[float], float]
    cs: tuple[float, ...] = ()

    def with_grid(self, cs: Sequence[float]) -> "FamilySpec":
        return FamilySpec(self.name, self.f, tuple(float(c) for c in cs))


def family(name: str) -> FamilySpec:
    """csq -> c^2, cpow:P -> c^P, cplus:D -> c + D."""
    kind, _, arg = name.partition(":")
    if kind == "csq" and not arg:
        return FamilySpec(name, lambda c: c * c)
    try:
        val = float(arg)
    except ValueError:
        raise DomainError(f"unknown family {name!r}") from None
    if kind == "cpow" and val > 1:
        return FamilySpec(name, lambda c: c**val)
    if kind == "cplus" and val > 0:
        return FamilySpec(name, lambda c: c + val)
    raise DomainError(f"unknown family {name!r}")


def c_grid(c_from: float, c_to: float, points: int, log: bool = False) -> list[float]:
    if points < 1:
        raise DomainError("points must be >= 1")
    if points == 1:
        return [float(c_from)]
    if log:
        if c_from <= 0 or c_to <= 0:
            raise DomainError("log grid needs positive endpoints")
        return [float(c) for c in np.geomspace(c_from, c_to, points)]
    return [float(c) for c in np.linspace(c_from, c_to, points)]


def gehring_iwaniec_bound(M: float, n: int = 3) -> float:
    """1/2 (M + M^(n-1))^(2/n): upper bound on the limit distortion."""
    if not M >= 1:
        raise DomainError(f"M must be >= 1, got {M!r}")
    if n < 2:
        raise DomainError("n must be >= 2")
    return 0.5 * (M + M ** (n - 1)) ** (2.0 / n)


@dataclass(frozen=True)
class SweepRecord:
    c: float
    a: float
    b: float
    t_minus: float = math.nan
    t_plus: float = math.nan
    h_minus: float = math.nan
    h_plus: float = math.nan
    h_lam: float = math.nan
    jump_ratio: float = math.nan
    gi_bound: float = math.nan
    error: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def analyze_point(c: float, a: float, b: float) -> SweepRecord:
    try:
        w = window(DiagonalMap(a, b))
    except DomainError as exc:
        return SweepRecord(c, a, b, error=f"{type(exc).__name__}: {exc}")
    h_lam = max(w.h_minus, w.h_plus)
    return SweepRecord(
        c, a, b, w.t_minus, w.t_plus, w.h_minus, w.h_plus, h_lam, b / h_lam, gehring_iwaniec_bound(h_lam, 3)
    )


def sweep(fam: FamilySpec, threads: int | None = None) -> list[SweepRecord]:
    """One record per grid value; invalid points carry an error string."""
    if not fam.cs:
        raise DomainError("family has an empty c grid")
    pts = []
    for c in fam.cs:
        try:
            b = float(fam.f(c))
        except (OverflowError, ValueError):
            b = math.nan
        pts.append((c, c, b))
    n = threads or worker_count()
    if n == 1:
        return [analyze_point(*p) for p in pts]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda p: analyze_point(*p), pts))


# ---------------------------------------------------------------------------
# the c^2 family in closed form


def _check_c(c: float):
    if not c > 1:
        raise DomainError(f"requires c > 1, got {c!r}")


def optimal_direction_c(c: float) -> np.ndarray:
    """B0 for diag(1, c, c^2), sign fixed so the (3,3) entry is positive."""
    _check_c(c)
    q = (c - 1) * c + 1
    r = math.sqrt(c / q + 1)
    side = math.sqrt((c + 1) ** 2 * q * (c * c + 1))
    e12 = (c * c - 1) * r / (2 * side)
    e13 = (c - 1) ** 2 * c / (2 * q * (c * c + 1))
    e23 = c * (c * c - 1) * r / (2 * math.sqrt((c * c + 1) * (c**4 + c**3 + c + 1)))
    return np.array(
        [
            [1 / (c * c + 1) - 1 / (2 * q), -e12, e13],
            [e12, -(c * c + 1) / (2 * q), e23],
            [e13, -c * (c * c - 1) * r / (2 * side), (c - 1) ** 2 * c * c / (2 * q * (c * c + 1))],
        ]
    )


def canonical_sign(B: np.ndarray) -> np.ndarray:
    return -B if B[2, 2] < 0 else B


def t_pm_c(c: float) -> tuple[float, float]:
    """(t+, t-) for diag(1, c, c^2)."""
    _check_c(c)
    s = math.sqrt((c * c + 1) * ((c * (c**3 + 7 * c - 8) + 7) * c * c + 1))
    den = 2 * ((c**5 + 6 * c**3 + c * c + c + 6) * c * c + 1)
    pre = (c - 1) * (c * c + 1)
    tp = pre * (-(c**6) + 2 * c**5 - 5 * c**4 + 5 * c * c + (c + 1) ** 2 * s - 2 * c + 1) / den
    tm = -pre * (c**6 - 2 * c**5 + 5 * c**4 - 5 * c * c + (c + 1) ** 2 * s + 2 * c - 1) / den
    return tp, tm


def asymptotic_ratio(cs: Sequence[float]) -> list[tuple[float, float]]:
    """(c, H_lam / c^2) along b = c^2; tends to 1/sqrt(2)."""
    cs = [float(c) for c in cs]
    if any(c <= 1 for c in cs) or any(y <= x for x, y in zip(cs, cs[1:])):
        raise DomainError("c values must be increasing and > 1")
    out = []
    for c in cs:
        w = window(DiagonalMap(c, c * c))
        out.append((c, max(w.h_minus, w.h_plus) / (c * c)))
    return out


# ---------------------------------------------------------------------------
# probing the conjecture that no stationary concave direction beats B0


def _h_batch(M: np.ndarray) -> np.ndarray:
    s = np.linalg.svd(M, compute_uv=False)
    return s[..., 0] / s[..., -1]


def _rank_one(r, s, t1, t2) -> np.ndarray:
    u = np.stack([np.sqrt(1 - r * r), r * np.cos(t1), r * np.sin(t1)], axis=-1)
    v = np.stack([np.sqrt(1 - s * s), s * np.cos(t2), s * np.sin(t2)], axis=-1)
    return u[:, :, None] * v[:, None, :]


def laminate_distortion(A: DiagonalMap, Bs: np.ndarray, grid: int = 241, iters: int = 60) -> np.ndarray:
    """Best two-phase laminate along each B: max(min_{t<0} H, min_{t>0} H).

    Log-spaced grid on 1e-3 <= |t| <= 30b, then golden-section refinement
    inside the bracketing grid cells.
    """
    Bs = np.asarray(Bs, dtype=float).reshape(-1, 3, 3)
    M = A.matrix
    gr = (math.sqrt(5) - 1) / 2
    sides = []
    for sign in (-1.0, 1.0):
        ts = sign * np.geomspace(1e-3, 30.0 * A.b, grid)
        H = _h_batch(M + ts[None, :, None, None] * Bs[:, None])
        k = np.argmin(H, axis=1)
        lo = ts[np.maximum(k - 1, 0)]
        hi = ts[np.minimum(k + 1, len(ts) - 1)]
        lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)

        def h_at(t):
            return _h_batch(M + t[:, None, None] * Bs)

        x1 = hi - gr * (hi - lo)
        x2 = lo + gr * (hi - lo)
        f1, f2 = h_at(x1), h_at(x2)
        for _ in range(iters):
            left = f1 < f2
            hi = np.where(left, x2, hi)
            lo = np.where(left, lo, x1)
            nx1 = np.where(left, hi - gr * (hi - lo), x2)
            nx2 = np.where(left, x1, lo + gr * (hi - lo))
            fn = h_at(np.where(left, nx1, nx2))
            f1, f2 = np.where(left, fn, f2), np.where(left, f1, fn)
            x1, x2 = nx1, nx2
        sides.append(np.minimum(np.minimum(f1, f2), H.min(axis=1)))
    return np.maximum(sides[0], sides[1])


def stationary_concave_directions(A: DiagonalMap, count: int, rng: np.random.Generator, resid_tol: float = 1e-8):
    """Random (r, s, th1, th2) with dH/dt(0) = 0 and d2H/dt2(0) < 0.

    Half the candidates use r = s (which solves the constraint in closed
    form), half draw r uniformly and solve for s.
    """
    a, b = A.a, A.b
    out = []
    drawn = 0
    while sum(len(o[0]) for o in out) < count:
        n = max(4 * count, 1000)
        drawn += n
        t1 = rng.uniform(0, math.pi, n)
        t2 = rng.uniform(0, math.pi, n)
        S = np.sin(t1) * np.sin(t2)
        half = n // 2
        r = np.empty(n)
        s = np.empty(n)
        r[:half] = np.sqrt(b / (b + S[:half]))
        s[:half] = r[:half]
        r[half:] = rng.uniform(0, 1, n - half)
        k = r[half:] * S[half:] / (b * np.sqrt(1 - r[half:] ** 2))
        s[half:] = 1 / np.sqrt(1 + k * k)
        resid = b * np.sqrt(1 - r * r) * np.sqrt(1 - s * s) - r * s * S
        _, Q = _taylor_LQ(a, b, r, s, t1, t2)
        keep = (np.abs(resid) <= resid_tol) & (Q < 0)
        out.append((r[keep], s[keep], t1[keep], t2[keep]))
    r, s, t1, t2 = (np.concatenate(x)[:count] for x in zip(*out))
    return r, s, t1, t2, drawn


@dataclass(frozen=True)
class ConjectureProbe:
    trials: int
    candidates_drawn: int
    h_lam: float  # from the closed-form window
    h_lam_b0: float  # B0 pushed through the same search as the random directions
    best: float
    best_params: tuple[float, float, float, float]
    counterexamples: int
    tolerance: float = 1e-6
    notes: list[str] = field(default_factory=list)

    @property
    def falsified(self) -> bool:
        return self.counterexamples > 0


def random_direction_sampling(A: DiagonalMap, trials: int = 10_000, seed: int = 0, chunk: int = 500) -> ConjectureProbe:
    if trials < 1000:
        raise DomainError("trials must be >= 1000")
    rng = np.random.default_rng(seed)
    w = window(A)
    h_lam = max(w.h_minus, w.h_plus)
    r, s, t1, t2, drawn = stationary_concave_directions(A, trials, rng)
    Bs = _rank_one(r, s, t1, t2)
    vals = np.concatenate([laminate_distortion(A, Bs[i : i + chunk]) for i in range(0, trials, chunk)])
    h_b0 = float(laminate_distortion(A, optimal_direction(A).B0[None])[0])
    tol = 1e-6
    i = int(np.argmin(vals))
    bad = int(np.sum(vals < h_lam - tol))
    notes = [f"{bad} direction(s) beat the closed-form window; investigate"] if bad else []
    return ConjectureProbe(
        trials, drawn, h_lam, h_b0, float(vals[i]), (float(r[i]), float(s[i]), float(t1[i]), float(t2[i])), bad, tol, notes
    )
