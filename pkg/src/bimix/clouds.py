"""Sampling of small-sphere clouds and cloud-expansion integrals.

The cloud measure puts weight z_r^k / k! * phi_T(y_1..y_k) dy on a cloud of k
small spheres (penetrable model: k = 1 only). Integrals against it are
estimated by importance sampling:

* the cloud size k is drawn uniformly from 1..k_max;
* the first point is drawn from a uniform mixture of balls ("region")
  that must cover every pivot position where the integrand is non-zero;
* the remaining k - 1 points are uniform in a ball of radius 2r(k - 1)
  around the first, which contains every overlap-connected cloud.

Each sample carries the weight making ``mean(weight * h)`` unbiased for
the integral of h.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .estimates import MCEstimate, exact, mean_estimate, rng_for
from .geometry import ball_volume, uniform_in_unit_ball
from .interactions import Model, MixtureParams, _star_f_matrix, star_graph_sum, ursell_batch, ursell_from_f


class TruncationWarning(UserWarning):
    """The last retained term of a truncated series is not small."""


Region = Callable[[int], tuple[np.ndarray, np.ndarray]]


@dataclass
class CloudBatch:
    points: np.ndarray  # (N, k_max, d), NaN beyond each cloud's size
    sizes: np.ndarray
    weight: np.ndarray

    def __len__(self):
        return len(self.sizes)


def default_k_max(params: MixtureParams) -> int:
    return 1 if params.model is Model.PENETRABLE else 3


def spread(params: MixtureParams, k: int) -> float:
    """Radius around the first point containing any overlap-connected cloud of size k."""
    return 2.0 * params.r * (k - 1)


def ball_region(x, params: MixtureParams) -> Region:
    """Pivot region for clouds touching the sphere at x."""
    x = np.asarray(x, dtype=float)

    def region(k):
        return x[None, :], np.array([params.excl + spread(params, k)])
    return region


def pair_region(xs, pairs, params: MixtureParams) -> Region:
    """Pivot region for clouds touching both spheres of at least one listed pair.

    Two equal balls at distance s intersect inside the ball centered at their
    midpoint with radius sqrt(rho^2 - s^2/4), so each pair contributes that ball.
    """
    xs = np.asarray(xs, dtype=float)

    def region(k):
        rho = params.excl + spread(params, k)
        cs, rs = [], []
        for i, j in pairs:
            s = float(np.linalg.norm(xs[i] - xs[j]))
            if s < 2 * rho:
                cs.append(0.5 * (xs[i] + xs[j]))
                rs.append(math.sqrt(rho * rho - 0.25 * s * s))
        if not cs:
            return np.zeros((0, xs.shape[1])), np.zeros(0)
        return np.array(cs), np.array(rs)
    return region


def unwrap(xs, params: MixtureParams) -> np.ndarray:
    """Shift centers by minimum images relative to the first (no-op without a periodic box)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if params.periodic_L is None:
        return xs.copy()
    return xs[0] + params.displacement(xs, xs[0])


def _sample_mixture(rng, centers, radii, n, d):
    which = rng.integers(len(centers), size=n)
    pts = centers[which] + radii[which, None] * uniform_in_unit_ball(rng, n, d)
    vols = np.array([ball_volume(r, d) for r in radii])
    dens = np.zeros(n)
    for c, rad, v in zip(centers, radii, vols):
        dens += (np.einsum("ij,ij->i", pts - c, pts - c) < rad * rad) / v
    return pts, dens / len(centers)


def sample_clouds(params: MixtureParams, region: Region, n: int, rng: np.random.Generator,
                  k_max: int | None = None, k_only: int | None = None) -> CloudBatch:
    """Weighted cloud sample; ``k_only`` restricts to clouds of exactly that size."""
    k_max = default_k_max(params) if k_max is None else int(k_max)
    if params.model is Model.PENETRABLE:
        k_max = 1
    if k_only is not None:
        k_max = int(k_only)
    if not 1 <= k_max <= 5:
        raise ValueError("cloud size must be in 1..5")
    d = params.d
    if k_only is not None:
        sizes = np.full(n, k_max)
    else:
        sizes = rng.integers(1, k_max + 1, size=n)
    n_sizes = 1 if k_only is not None else k_max
    points = np.full((n, k_max, d), np.nan)
    weight = np.zeros(n)
    for k in range(1, k_max + 1):
        idx = np.nonzero(sizes == k)[0]
        if len(idx) == 0:
            continue
        centers, radii = region(k)
        if len(centers) == 0:
            continue
        pivot, dens = _sample_mixture(rng, centers, radii, len(idx), d)
        pts = np.empty((len(idx), k, d))
        pts[:, 0] = pivot
        rad = spread(params, k)
        for j in range(1, k):
            pts[:, j] = pivot + rad * uniform_in_unit_ball(rng, len(idx), d)
        w = n_sizes * params.z_r ** k / math.factorial(k) / dens
        if k > 1:
            w = w * ball_volume(rad, d) ** (k - 1) * cloud_ursell(pts, params)
        points[idx, :k] = pts
        weight[idx] = w
    return CloudBatch(points, sizes, weight)


def cloud_ursell(pts: np.ndarray, params: MixtureParams) -> np.ndarray:
    """Ursell function of each cloud in a (N, k, d) batch."""
    N, k, _ = pts.shape
    if k == 1:
        return np.ones(N)
    if params.model is Model.PENETRABLE:
        return np.zeros(N)
    diff = pts[:, :, None, :] - pts[:, None, :, :]
    if params.periodic_L is not None:
        L = params.periodic_L
        diff = diff - L * np.round(diff / L)
    dist = np.linalg.norm(diff, axis=-1)
    F = -(dist < 2 * params.r).astype(float)
    return ursell_batch(F)


def zeta_batch(x, batch: CloudBatch, params: MixtureParams) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        dist = params.dist(batch.points, x)
        return -np.any(dist < params.excl, axis=1).astype(float)


def zeta_tilde_batch(x, batch: CloudBatch, params: MixtureParams) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        dist = params.dist(batch.points, x)
        hit = (dist > params.R - params.r) & (dist < params.excl)
        return -np.any(hit, axis=1).astype(float)


def cloud_integral(h, params: MixtureParams, region: Region, samples: int = 50_000,
                   seed: int | None = 0, k_max: int | None = None, tag: int = 0,
                   k_only: int | None = None) -> MCEstimate:
    """Estimate the cloud-measure integral of h, where h maps a CloudBatch to an (N,) array."""
    if params.z_r == 0 or (k_only is not None and k_only > 1 and params.model is Model.PENETRABLE):
        return exact(0.0)
    batch = sample_clouds(params, region, samples, rng_for(seed, 21, tag, k_only or 0), k_max, k_only)
    return mean_estimate(batch.weight * h(batch), 1.0, seed)


def zeta_integral(params: MixtureParams, samples: int = 50_000, seed: int | None = 0,
                  k_max: int | None = None, k_only: int | None = None) -> MCEstimate:
    """Integral of zeta(x, Y) over clouds Y; ln(zhat / z_R) equals this value."""
    if k_only == 1 or (params.model is Model.PENETRABLE and k_only is None):
        return exact(-params.z_r * params.excluded_volume)
    x = np.zeros(params.d)
    return cloud_integral(lambda b: zeta_batch(x, b, params), params, ball_region(x, params),
                          samples, seed, k_max, tag=1, k_only=k_only)


def w_J_cloud_series(xs, params: MixtureParams, samples: int = 50_000, seed: int | None = 0,
                     k_max: int | None = None) -> MCEstimate:
    """Effective k-body potential W_J = - integral of prod_j zeta(x_j, Y) over clouds."""
    xs = unwrap(xs, params)
    k = len(xs)
    if k < 2:
        raise ValueError("W_J needs at least two spheres")
    # any pair works as pivot region, the farthest pair gives the smallest one
    far = max(((i, j) for i in range(k) for j in range(i + 1, k)),
              key=lambda p: np.linalg.norm(xs[p[0]] - xs[p[1]]))

    def h(b):
        out = np.ones(len(b))
        for x in xs:
            out = out * zeta_batch(x, b, params)
        return out
    return -cloud_integral(h, params, pair_region(xs, [far], params), samples, seed, k_max, tag=2)


def psi_T_cloud_series(xs, params: MixtureParams, r_max: int = 3, samples: int = 20_000,
                       seed: int | None = 0, k_max: int | None = None) -> MCEstimate:
    """Truncated weight as sum over r <= r_max of (1/r!) times the r-cloud integral of phi*_T."""
    xs = unwrap(xs, params)
    m = len(xs)
    F = _star_f_matrix(xs, params)
    total = exact(ursell_from_f(F))
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    region = pair_region(xs, pairs, params)
    last = 0.0
    for r in range(1, r_max + 1):
        if params.z_r == 0:
            break
        rng = rng_for(seed, 31, r)
        batches = [sample_clouds(params, region, samples, rng, k_max) for _ in range(r)]
        Z = np.stack([np.stack([zeta_batch(x, b, params) for b in batches], axis=1) for x in xs], axis=1)
        w = np.prod(np.stack([b.weight for b in batches]), axis=0)
        term = mean_estimate(w * star_graph_sum(F, Z, r), 1.0 / math.factorial(r), seed)
        total = total + term
        last = term.value
    if r_max >= 1 and total.value != 0 and abs(last) > 0.1 * abs(total.value - ursell_from_f(F)) and abs(last) > 1e-12:
        warnings.warn(f"cloud series truncated at r={r_max} with last term {last:.3g}", TruncationWarning)
    return MCEstimate(total.value, total.stderr, samples * r_max, seed)
