"""Sawtooth laminates T_nu(x) = Ax + h(nu <u, x>) v / nu.

The profile h rises with slope t+ and falls with slope t-, so DT_nu only
takes the two values A + t+ B0 and A + t- B0. Both have distortion below
H(A), while T_nu -> A uniformly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import Breakpoint, DomainError, TooCoarse
from .linalg3 import DiagonalMap, linear_distortion
from .rank_one import OptimalDirection, optimal_direction
from .window import window

KINK_TOL = 1e-12


@dataclass(frozen=True)
class SawtoothProfile:
    t_minus: float
    t_plus: float

    def __post_init__(self):
        if not (self.t_minus < 0 < self.t_plus):
            raise DomainError("need t_minus < 0 < t_plus")

    @property
    def period(self) -> float:
        return 1.0 / self.t_plus - 1.0 / self.t_minus

    @property
    def peak(self) -> float:
        return 1.0 / self.t_plus

    @property
    def amplitude(self) -> float:
        return 1.0


def _phase(profile: SawtoothProfile, r):
    return np.mod(np.asarray(r, dtype=float), profile.period)


def sawtooth_eval(profile: SawtoothProfile, r):
    """Unit-height zigzag: 0 at multiples of the period, 1 at r = 1/t+ (mod period)."""
    rho = _phase(profile, r)
    up = rho <= profile.peak
    h = np.where(up, profile.t_plus * rho, 1.0 + profile.t_minus * (rho - profile.peak))
    h = np.clip(h, 0.0, 1.0)
    return float(h) if h.ndim == 0 else h


def kink_distance(profile: SawtoothProfile, r):
    """Distance in r to the nearest kink."""
    rho = _phase(profile, r)
    d = np.minimum(rho, profile.period - rho)
    d = np.minimum(d, np.abs(rho - profile.peak))
    return float(d) if d.ndim == 0 else d


def sawtooth_slope(profile: SawtoothProfile, r):
    if np.any(np.asarray(kink_distance(profile, r)) <= KINK_TOL):
        raise Breakpoint(f"r={r!r} is within {KINK_TOL:g} of a kink")
    up = _phase(profile, r) < profile.peak
    s = np.where(up, profile.t_plus, profile.t_minus)
    return float(s) if s.ndim == 0 else s


@dataclass(frozen=True)
class LaminateSequence:
    A: DiagonalMap
    B0: OptimalDirection
    nu: float
    profile: SawtoothProfile
    # the two possible derivatives, fixed once so membership is exact
    up_matrix: np.ndarray = field(repr=False)
    down_matrix: np.ndarray = field(repr=False)

    def phase(self, x):
        # B0 = u v^T, so the slabs are normal to v and the map moves along u
        return self.nu * (np.asarray(x, dtype=float) @ self.B0.v)

    def __call__(self, x):
        return laminate_map(self, x)

    def breakpoint_distance(self, x):
        """Euclidean distance from x to the nearest plane where DT_nu jumps."""
        return kink_distance(self.profile, self.phase(x)) / (self.nu * np.linalg.norm(self.B0.v))


def laminate_sequence(A: DiagonalMap, nu: float) -> LaminateSequence:
    if not nu >= 1:
        raise DomainError(f"nu must be >= 1, got {nu!r}")
    opt = optimal_direction(A)
    w = window(A)
    M = A.matrix
    return LaminateSequence(
        A=A,
        B0=opt,
        nu=float(nu),
        profile=SawtoothProfile(w.t_minus, w.t_plus),
        up_matrix=M + w.t_plus * opt.B0,
        down_matrix=M + w.t_minus * opt.B0,
    )


def laminate_map(seq: LaminateSequence, x):
    """Ax + h(nu <v, x>) u / nu for a point or an (N, 3) batch; DT = A + h' B0."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(sawtooth_eval(seq.profile, seq.phase(x)))
    return x @ seq.A.matrix.T + (h[..., None] / seq.nu) * seq.B0.u


def laminate_jacobian(seq: LaminateSequence, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise DomainError("laminate_jacobian takes a single 3-vector")
    slope = sawtooth_slope(seq.profile, seq.phase(x))
    return seq.up_matrix if slope == seq.profile.t_plus else seq.down_matrix


def embed_higher_dim(A: DiagonalMap, B0, n: int) -> tuple[np.ndarray, np.ndarray]:
    """diag(1, a, b, a, ..., a) and B0 padded with zeros to n x n."""
    if n < 3:
        raise DomainError("n must be >= 3")
    B = B0.B0 if isinstance(B0, OptimalDirection) else np.asarray(B0, dtype=float)
    Ah = np.diag([1.0, A.a, A.b] + [A.a] * (n - 3))
    Bh = np.zeros((n, n))
    Bh[:3, :3] = B
    return Ah, Bh


def fibonacci_sphere(samples: int) -> np.ndarray:
    """Nearly uniform unit vectors, the two poles included."""
    if samples < 2:
        raise DomainError("need at least 2 samples")
    k = np.arange(samples)
    z = 1.0 - 2.0 * k / (samples - 1)
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = k * math.pi * (3.0 - math.sqrt(5.0))
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def _cap(center: np.ndarray, width: float, rng: np.random.Generator, n: int) -> np.ndarray:
    d = center + width * rng.standard_normal((n, 3))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def local_distortion_probe(
    f: Callable, x, radius: float, samples: int = 10_000, refine_rounds: int = 12
) -> float:
    """max/min of |f(y) - f(x)| over the sphere |y - x| = radius.

    Starts from a Fibonacci sphere, then zooms in around the current
    extreme directions so the estimate is not limited by the base
    sample spacing.
    """
    x = np.asarray(x, dtype=float)
    if radius <= 0:
        raise DomainError("radius must be positive")
    if isinstance(f, LaminateSequence):
        gap = float(f.breakpoint_distance(x))
        if radius >= gap:
            raise TooCoarse(f"radius {radius:g} reaches a breakpoint plane at distance {gap:.3e}")
    fx = np.asarray(f(x), dtype=float)

    def stretch(dirs):
        ys = np.asarray(f(x + radius * dirs), dtype=float)
        return np.linalg.norm(ys - fx, axis=1)

    dirs = fibonacci_sphere(samples)
    vals = stretch(dirs)
    rng = np.random.default_rng(0)
    hi_dir, hi = dirs[np.argmax(vals)], vals.max()
    lo_dir, lo = dirs[np.argmin(vals)], vals.min()
    width = math.sqrt(4 * math.pi / samples)
    for _ in range(refine_rounds):
        for which in ("hi", "lo"):
            cand = _cap(hi_dir if which == "hi" else lo_dir, width, rng, 64)
            v = stretch(cand)
            if which == "hi" and v.max() > hi:
                hi, hi_dir = v.max(), cand[np.argmax(v)]
            if which == "lo" and v.min() < lo:
                lo, lo_dir = v.min(), cand[np.argmin(v)]
        width *= 0.5
    return float(hi / lo)


def phase_distortions(seq: LaminateSequence) -> tuple[float, float]:
    """Linear distortion of the two derivative values (down, up)."""
    return linear_distortion(seq.down_matrix), linear_distortion(seq.up_matrix)
