"""Sphere geometry in R^d: ball, lens, corona and k-fold intersection volumes.

Closed forms are used wherever they exist (ball volumes in any dimension,
two-ball lenses in d <= 3). Intersections of three or more balls are
estimated by Monte Carlo; a grid quadrature is provided as an independent
check for d = 3.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .estimates import MCEstimate, exact, rng_for


class Boundary(str, Enum):
    PERIODIC = "periodic"
    FREE = "free"


@dataclass(frozen=True)
class BallSpec:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def d(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class BoxSpec:
    """Cube [0, L]^d with free or periodic boundary."""

    L: float
    boundary: Boundary = Boundary.PERIODIC
    d: int = 3

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if not self.L > 0:
            raise ValueError(f"box side must be positive, got {self.L}")
        if self.d < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def volume(self) -> float:
        return self.L ** self.d

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC


def unit_ball_volume(d: int) -> float:
    if d < 1:
        raise ValueError(f"unsupported dimension d={d}")
    if d == 1:
        return 2.0
    if d == 2:
        return math.pi
    if d == 3:
        return 4.0 * math.pi / 3.0
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def ball_volume(radius: float, d: int = 3) -> float:
    """Volume of a d-dimensional ball of the given radius."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    return unit_ball_volume(d) * radius ** d


def lens_volume(radius: float, dist: float, d: int = 3) -> float:
    """Volume of the intersection of two balls of equal radius at center distance `dist`."""
    if radius <= 0 or dist < 0:
        raise ValueError("need radius > 0 and dist >= 0")
    rho, s = float(radius), float(dist)
    if s >= 2 * rho:
        return 0.0
    if d == 3:
        return math.pi / 12.0 * (4 * rho + s) * (2 * rho - s) ** 2
    if d == 2:
        return 2 * rho ** 2 * math.acos(s / (2 * rho)) - 0.5 * s * math.sqrt(4 * rho ** 2 - s ** 2)
    if d == 1:
        return 2 * rho - s
    raise NotImplementedError("closed-form lens volume only for d <= 3")


def lens_volume_array(radius: float, dist) -> np.ndarray:
    """Vectorized three-dimensional lens volume."""
    s = np.asarray(dist, dtype=float)
    rho = float(radius)
    out = np.pi / 12.0 * (4 * rho + s) * (2 * rho - s) ** 2
    return np.where(s < 2 * rho, out, 0.0)


def two_ball_intersection_volume(r1: float, r2: float, dist: float) -> float:
    """Intersection volume of two balls in R^3 with arbitrary radii."""
    if dist >= r1 + r2:
        return 0.0
    if dist <= abs(r1 - r2):
        return ball_volume(min(r1, r2), 3)
    if r1 == r2:
        return lens_volume(r1, dist)
    d = dist
    big, small = max(r1, r2), min(r1, r2)
    rrd = r1 + r2 - d
    return (math.pi * rrd ** 2
            * (d ** 2 + 2 * d * small - 3 * small ** 2 + 2 * d * big + 6 * small * big - 3 * big ** 2)
            / (12 * d))


def corona_volume(R: float, r: float, d: int = 3) -> float:
    """Volume of the shell B(0, R+r) minus B(0, R-r)."""
    if not R > r > 0:
        raise ValueError(f"need R > r > 0, got R={R}, r={r}")
    return ball_volume(R + r, d) - ball_volume(R - r, d)


def shell_fraction(h: float) -> float:
    """Corona volume over |B(0, 2R)| at r/R = h in d = 3: ((1+h)^3 - (1-h)^3) / 8."""
    return 0.25 * (3 * h + h ** 3)


def periodic_displacement(x, y, L: float) -> np.ndarray:
    """Minimum-image displacement x - y on the torus of side L (broadcasts)."""
    delta = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return delta - L * np.round(delta / L)


def periodic_distance(x, y, L: float):
    if not L > 0:
        raise ValueError("box side must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError("dimension mismatch")
    dist = np.linalg.norm(periodic_displacement(x, y, L), axis=-1)
    return float(dist) if dist.ndim == 0 else dist


def distance(x, y, box: BoxSpec | None = None):
    """Euclidean distance, or minimum-image distance in a periodic box."""
    if box is not None and box.periodic:
        return periodic_distance(x, y, box.L)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError("dimension mismatch")
    dist = np.linalg.norm(x - y, axis=-1)
    return float(dist) if dist.ndim == 0 else dist


def _circumcenter(points: np.ndarray) -> np.ndarray | None:
    p0 = points[0]
    if len(points) == 1:
        return p0.copy()
    D = points[1:] - p0
    A = 2.0 * D @ D.T
    b = np.einsum("ij,ij->i", D, D)
    if abs(np.linalg.det(A)) < 1e-12 * max(1.0, np.abs(A).max()) ** len(A):
        return None
    lam = np.linalg.solve(A, b)
    return p0 + lam @ D


def min_enclosing_radius(points) -> float:
    """Radius of the smallest ball containing all points (brute force, small point sets)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = pts.shape
    best = math.inf
    for size in range(1, min(n, d + 1) + 1):
        for idx in itertools.combinations(range(n), size):
            c = _circumcenter(pts[list(idx)])
            if c is None:
                continue
            rad = float(np.linalg.norm(pts[idx[0]] - c))
            if rad >= best:
                continue
            if np.all(np.linalg.norm(pts - c, axis=1) <= rad * (1 + 1e-12) + 1e-15):
                best = rad
    return best


def balls_intersect(centers, radius: float) -> bool:
    """Exact test whether equal-radius open balls have a common point."""
    return min_enclosing_radius(centers) < radius


def _as_balls(balls) -> list[BallSpec]:
    out = [b if isinstance(b, BallSpec) else BallSpec(*b) for b in balls]
    if not out:
        raise ValueError("empty ball list")
    d = out[0].d
    if any(b.d != d for b in out):
        raise ValueError("dimension mismatch among balls")
    return out


def k_intersection_volume(balls: Sequence[BallSpec], samples: int = 100_000,
                          seed: int | None = None) -> MCEstimate:
    """Volume of the intersection of k balls.

    Exact for k <= 2 and for degenerate cases (disjoint pair, smallest ball
    inside all others, equal-radius balls without a common point); otherwise
    uniform sampling inside the smallest ball with binomial standard error.
    """
    balls = _as_balls(balls)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    d = balls[0].d
    centers = np.array([b.center for b in balls])
    radii = np.array([b.radius for b in balls])
    i0 = int(np.argmin(radii))
    c0, r0 = centers[i0], radii[i0]

    for i, j in itertools.combinations(range(len(balls)), 2):
        if np.linalg.norm(centers[i] - centers[j]) >= radii[i] + radii[j]:
            return exact(0.0)
    if np.all(np.linalg.norm(centers - c0, axis=1) + r0 <= radii):
        return exact(ball_volume(r0, d))
    if len(balls) == 2 and d == 3:
        dist = float(np.linalg.norm(centers[0] - centers[1]))
        return exact(two_ball_intersection_volume(radii[0], radii[1], dist))
    if np.allclose(radii, r0) and not balls_intersect(centers, r0):
        return exact(0.0)

    rng = rng_for(seed, 11)
    pts = c0 + r0 * uniform_in_unit_ball(rng, samples, d)
    inside = np.ones(samples, dtype=bool)
    for c, rad in zip(centers, radii):
        inside &= np.einsum("ij,ij->i", pts - c, pts - c) < rad * rad
    p = inside.mean()
    vol = ball_volume(r0, d)
    se = vol * math.sqrt(p * (1 - p) / samples)
    return MCEstimate(vol * p, se, samples, seed)


def uniform_in_unit_ball(rng: np.random.Generator, n: int, d: int = 3) -> np.ndarray:
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    u = rng.random(n) ** (1.0 / d)
    return g * u[:, None]


def grid_intersection_volume(balls: Sequence[BallSpec], h: float = 0.005) -> float:
    """Midpoint-grid quadrature of a k-ball intersection volume in R^3.

    The (x, y) plane is gridded at spacing h; along z each ball contributes a
    chord, and the chord intersection is integrated exactly.
    """
    balls = _as_balls(balls)
    if balls[0].d != 3:
        raise ValueError("grid quadrature implemented for d = 3")
    centers = np.array([b.center for b in balls])
    radii = np.array([b.radius for b in balls])
    lo = np.max(centers[:, :2] - radii[:, None], axis=0)
    hi = np.min(centers[:, :2] + radii[:, None], axis=0)
    if np.any(hi <= lo):
        return 0.0
    nx = max(1, int(math.ceil((hi[0] - lo[0]) / h)))
    ny = max(1, int(math.ceil((hi[1] - lo[1]) / h)))
    xs = lo[0] + (np.arange(nx) + 0.5) * h
    total = 0.0
    ys = lo[1] + (np.arange(ny) + 0.5) * h
    for x in xs:
        zlo = np.full(ny, -np.inf)
        zhi = np.full(ny, np.inf)
        for c, rad in zip(centers, radii):
            q = rad * rad - (x - c[0]) ** 2 - (ys - c[1]) ** 2
            half = np.sqrt(np.clip(q, 0.0, None))
            half = np.where(q > 0, half, -np.inf)
            zlo = np.maximum(zlo, c[2] - half)
            zhi = np.minimum(zhi, c[2] + half)
        total += np.clip(zhi - zlo, 0.0, None).sum()
    return float(total * h * h)


def ball_box_overlap_volume(center, radius: float, L: float, samples: int = 200_000,
                            seed: int | None = 0) -> MCEstimate:
    """|B(center, radius) intersected with [0, L]^3|; exact when the ball is inside the box."""
    c = np.asarray(center, dtype=float)
    if np.all(c - radius >= 0) and np.all(c + radius <= L):
        return exact(ball_volume(radius, len(c)))
    rng = rng_for(seed, 13)
    pts = c + radius * uniform_in_unit_ball(rng, samples, len(c))
    inside = np.all((pts >= 0) & (pts <= L), axis=1)
    p = inside.mean()
    vol = ball_volume(radius, len(c))
    return MCEstimate(vol * p, vol * math.sqrt(p * (1 - p) / samples), samples, seed)
