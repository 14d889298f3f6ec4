"""Model parameters, Mayer functions, cloud interactions and Ursell-type sums.

Two hard-core models are supported:

* ``penetrable``: large spheres exclude each other and the small spheres,
  small spheres are ideal among themselves;
* ``colloid``: all three pairings are hard cores.

Effective multi-body potentials enter through a *W provider*: any callable
mapping an array of large-sphere centers (k, d) to W_k. Providers live in
:mod:`bimix.effective`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import graphs
from .geometry import BoxSpec, ball_volume, corona_volume, periodic_displacement

LARGE = "large"
SMALL = "small"


class Model(str, Enum):
    PENETRABLE = "penetrable"
    COLLOID = "colloid"


@dataclass(frozen=True)
class MixtureParams:
    R: float
    r: float
    z_R: float = 0.0
    z_r: float = 0.0
    model: Model = Model.PENETRABLE
    box: BoxSpec | None = None
    d: int = 3

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if not self.R > self.r > 0:
            raise ValueError(f"need R > r > 0, got R={self.R}, r={self.r}")
        if not (math.isfinite(self.z_R) and math.isfinite(self.z_r)):
            raise ValueError("activities must be finite")
        if self.box is not None:
            if self.box.d != self.d:
                raise ValueError("box dimension differs from model dimension")
            if self.box.periodic and not self.box.L > 2 * (self.R + self.r):
                raise ValueError("periodic box needs L > 2(R + r)")

    def with_(self, **kw) -> "MixtureParams":
        return replace(self, **kw)

    @property
    def excl(self) -> float:
        """Large/small exclusion radius R + r."""
        return self.R + self.r

    @property
    def excluded_volume(self) -> float:
        return ball_volume(self.R + self.r, self.d)

    @property
    def corona(self) -> float:
        return corona_volume(self.R, self.r, self.d)

    @property
    def periodic_L(self) -> float | None:
        return self.box.L if self.box is not None and self.box.periodic else None

    def displacement(self, x, y) -> np.ndarray:
        if self.periodic_L is not None:
            return periodic_displacement(x, y, self.periodic_L)
        return np.asarray(x, dtype=float) - np.asarray(y, dtype=float)

    def dist(self, x, y):
        return np.linalg.norm(self.displacement(x, y), axis=-1)


@dataclass(frozen=True)
class Cloud:
    """An ordered tuple of small-sphere centers."""

    points: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        pts = tuple(tuple(float(c) for c in p) for p in self.points)
        if len(pts) < 1:
            raise ValueError("a cloud has at least one point")
        object.__setattr__(self, "points", pts)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def __len__(self):
        return len(self.points)

    def is_overlap_connected(self, r: float) -> bool:
        pts = self.array
        k = len(pts)
        es = [(i + 1, j + 1) for i, j in itertools.combinations(range(k), 2)
              if np.linalg.norm(pts[i] - pts[j]) < 2 * r]
        return graphs._connected(k, es)


@dataclass(frozen=True)
class Configuration:
    large: tuple[tuple[float, ...], ...]
    clouds: tuple[Cloud, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "large", tuple(tuple(float(c) for c in x) for x in self.large))
        object.__setattr__(self, "clouds", tuple(c if isinstance(c, Cloud) else Cloud(c) for c in self.clouds))

    @property
    def m(self) -> int:
        return len(self.large)

    @property
    def r(self) -> int:
        return len(self.clouds)


def _cloud_array(Y) -> np.ndarray:
    if isinstance(Y, Cloud):
        return Y.array
    return np.atleast_2d(np.asarray(Y, dtype=float))


def mayer_f(p1, p2, params: MixtureParams) -> float:
    """Mayer function of two particles given as (point, species); -1 on hard-core overlap, else 0."""
    (x, a), (y, b) = p1, p2
    dist = float(params.dist(x, y))
    species = {a, b}
    if species == {LARGE}:
        return -1.0 if dist < 2 * params.R else 0.0
    if species == {LARGE, SMALL}:
        return -1.0 if dist < params.R + params.r else 0.0
    if species == {SMALL}:
        if params.model is Model.PENETRABLE:
            return 0.0
        return -1.0 if dist < 2 * params.r else 0.0
    raise ValueError(f"unknown species pair {a!r}, {b!r}")


def f_large(x, y, params: MixtureParams):
    return -(params.dist(x, y) < 2 * params.R).astype(float)


def f_small(y1, y2, params: MixtureParams):
    if params.model is Model.PENETRABLE:
        return np.zeros(np.broadcast_shapes(np.shape(y1)[:-1], np.shape(y2)[:-1]))
    return -(params.dist(y1, y2) < 2 * params.r).astype(float)


def zeta(x, Y, params: MixtureParams) -> float:
    """prod_j (1 + f(x, y_j)) - 1, i.e. minus the indicator that the cloud touches B(x, R+r)."""
    pts = _cloud_array(Y)
    return -1.0 if np.any(params.dist(pts, x) < params.excl) else 0.0


def zeta_tilde(x, Y, params: MixtureParams) -> float:
    """Minus the indicator that some cloud point lies in the corona R-r < dist < R+r."""
    dist = params.dist(_cloud_array(Y), x)
    return -1.0 if np.any((dist > params.R - params.r) & (dist < params.excl)) else 0.0


@lru_cache(maxsize=None)
def _connected_edge_lists(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    return tuple(tuple((i - 1, j - 1) for i, j in sorted(es)) for es in graphs._connected_edge_sets(n))


def ursell_from_f(F: np.ndarray) -> float:
    """Sum over connected graphs of the product of edge weights F[i, j]."""
    n = len(F)
    total = 0.0
    for es in _connected_edge_lists(n):
        w = 1.0
        for i, j in es:
            w *= F[i, j]
            if w == 0.0:
                break
        total += w
    return total


def ursell_batch(F: np.ndarray) -> np.ndarray:
    """Vectorized Ursell sum; F has shape (N, n, n)."""
    N, n, _ = F.shape
    total = np.zeros(N)
    for es in _connected_edge_lists(n):
        w = np.ones(N)
        for i, j in es:
            w = w * F[:, i, j]
        total += w
    return total


def ursell_recursive(F: np.ndarray) -> float:
    """Ursell function via log of the subset-sum generating function.

    Independent of graph enumeration: with Z(S) = prod_{pairs in S} (1 + F),
    the connected part follows from the recursion over the block containing 0.
    """
    n = len(F)
    full = (1 << n) - 1
    Z = {}
    for mask in range(1, full + 1):
        idx = [i for i in range(n) if mask >> i & 1]
        w = 1.0
        for i, j in itertools.combinations(idx, 2):
            w *= 1.0 + F[i, j]
        Z[mask] = w
    T = {}
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask ^ low
        val = Z[mask]
        sub = rest
        while sub:
            block = low | (rest ^ sub)
            val -= T[block] * Z[sub]
            sub = (sub - 1) & rest
        T[mask] = val
    return T[full]


def ursell_phi_T(points, params: MixtureParams, n_max: int = graphs.N_MAX) -> float:
    """Ursell function of small spheres (connected-graph sum of small-small Mayer functions)."""
    pts = _cloud_array(points)
    n = len(pts)
    if n > n_max:
        raise graphs.EnumerationBoundError(f"n={n} exceeds bound {n_max}")
    if n == 1:
        return 1.0
    F = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        F[i, j] = F[j, i] = mayer_f((pts[i], SMALL), (pts[j], SMALL), params)
    return ursell_from_f(F)


def _star_f_matrix(xs: np.ndarray, params: MixtureParams) -> np.ndarray:
    m = len(xs)
    F = np.zeros((m, m))
    for i, j in itertools.combinations(range(m), 2):
        F[i, j] = F[j, i] = -1.0 if params.dist(xs[i], xs[j]) < 2 * params.R else 0.0
    return F


@lru_cache(maxsize=None)
def _star_graph_edges(m: int, r: int, trees_only: bool):
    """Edge lists of the connected star/cloud class, split into star-star and star-cloud (0-based).

    For trees, clouds may be leaves: the bound sums over all spanning trees
    without cloud-cloud edges.
    """
    out = []
    for g in graphs.enumerate_bipartite_star(m, r, connected_only=True, trees_only=trees_only,
                                             leaf_clouds=trees_only):
        ss = tuple((i - 1, j - 1) for i, j in g.star_edges())
        sc = tuple((i - 1, j - m - 1) for i, j in g.cloud_edges())
        out.append((ss, sc))
    return tuple(out)


def star_graph_sum(F: np.ndarray, Z: np.ndarray, r: int, trees_only: bool = False) -> np.ndarray:
    """Sum over the connected star/cloud class of prod F[s,t] * prod Z[..., s, k].

    F is the (m, m) star-star weight matrix, Z has shape (N, m, r).
    """
    m = len(F)
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 3:
        Z = Z.reshape(1, m, r)
    total = np.zeros(len(Z))
    for ss, sc in _star_graph_edges(m, r, trees_only):
        w = 1.0
        for s, t in ss:
            w *= F[s, t]
        if w == 0.0:
            continue
        prod = np.full(len(Z), w)
        for s, k in sc:
            prod = prod * Z[:, s, k]
        total += prod
    return total


def phi_star_T(config: Configuration, params: MixtureParams, n_max: int = graphs.N_MAX) -> float:
    """Modified Ursell function: sum over connected star/cloud graphs of f- and zeta-weights."""
    m, r = config.m, config.r
    if m < 1:
        raise ValueError("need at least one large sphere")
    if m + r > n_max:
        raise graphs.EnumerationBoundError(f"m + r = {m + r} exceeds bound {n_max}")
    xs = np.asarray(config.large, dtype=float)
    F = _star_f_matrix(xs, params)
    Z = np.array([[zeta(x, Y, params) for Y in config.clouds] for x in xs]).reshape(1, m, r)
    if r > 0 and m < 2:
        return 0.0
    return float(star_graph_sum(F, Z, r)[0])


def tree_majorant(config: Configuration, params: MixtureParams) -> float:
    """Sum over star/cloud trees of prod |f| * prod |zeta_tilde|."""
    m, r = config.m, config.r
    xs = np.asarray(config.large, dtype=float)
    F = np.abs(_star_f_matrix(xs, params))
    Z = np.abs(np.array([[zeta_tilde(x, Y, params) for Y in config.clouds] for x in xs])).reshape(1, m, r)
    if r > 0 and m < 2:
        return 0.0
    return float(star_graph_sum(F, Z, r, trees_only=True)[0])


def tildezeta_sides(xs, Y, params: MixtureParams) -> tuple[float, float, float, float]:
    """Both sides of the two corona-replacement inequalities for one configuration.

    Returns (lhs1, rhs1, lhs2, rhs2) with x_1 = xs[0] playing the distinguished role.
    """
    xs = np.asarray(xs, dtype=float)
    k = len(xs)
    pair = 1.0
    for i, j in itertools.combinations(range(k), 2):
        pair *= 1.0 + (-1.0 if params.dist(xs[i], xs[j]) < 2 * params.R else 0.0)
    z = [zeta(x, Y, params) for x in xs]
    zt = [zeta_tilde(x, Y, params) for x in xs]
    lhs1 = pair * float(np.prod(np.abs(z)))
    rhs1 = pair * float(np.prod(np.abs(zt)))
    rest = float(np.prod([1.0 + v for v in z[1:]])) - 1.0
    lhs2 = abs(z[0]) * pair * abs(rest)
    rhs2 = abs(zt[0]) * pair
    return lhs1, rhs1, lhs2, rhs2


WProvider = Callable[[np.ndarray], float]


def psi(points, params: MixtureParams, W_provider: WProvider) -> float:
    """Effective Boltzmann weight prod (1 + f) * exp(-sum_J W_J) of m large spheres."""
    xs = np.atleast_2d(np.asarray(points, dtype=float))
    m = len(xs)
    if m == 1:
        return 1.0
    F = _star_f_matrix(xs, params)
    if np.any(F[np.triu_indices(m, 1)] != 0):
        return 0.0
    total_w = 0.0
    for size in range(2, m + 1):
        for J in itertools.combinations(range(m), size):
            total_w += W_provider(xs[list(J)])
    return math.exp(-total_w)


def _partition_coefficients(m: int):
    out = []
    for part in graphs.set_partitions(range(m)):
        q = len(part)
        out.append(((-1) ** (q - 1) * math.factorial(q - 1), [tuple(b) for b in part]))
    return out


def psi_T_partition(points, params: MixtureParams, W_provider: WProvider) -> float:
    """Truncated weight by Moebius inversion over set partitions."""
    xs = np.atleast_2d(np.asarray(points, dtype=float))
    m = len(xs)
    cache = {}

    def psi_block(b):
        if b not in cache:
            cache[b] = psi(xs[list(b)], params, W_provider)
        return cache[b]

    return float(sum(c * math.prod(psi_block(b) for b in blocks)
                     for c, blocks in _partition_coefficients(m)))


def hyperedge_weights(xs: np.ndarray, params: MixtureParams, W_provider: WProvider) -> dict:
    """Weight e^{-v - W_2} - 1 for pairs and e^{-W_J} - 1 for larger hyperedges (1-based keys)."""
    m = len(xs)
    weights = {}
    for J in graphs.hyperedges_of(m):
        idx = sorted(v - 1 for v in J)
        if len(J) == 2 and params.dist(xs[idx[0]], xs[idx[1]]) < 2 * params.R:
            weights[J] = -1.0
        else:
            weights[J] = math.expm1(-W_provider(xs[idx]))
    return weights


def psi_T_hypergraph(points, params: MixtureParams, W_provider: WProvider,
                     m_max: int = graphs.M_MAX) -> float:
    """Truncated weight as a sum over connected hypergraphs."""
    xs = np.atleast_2d(np.asarray(points, dtype=float))
    m = len(xs)
    if m == 1:
        return 1.0
    weights = hyperedge_weights(xs, params, W_provider)
    total = 0.0
    for h in graphs.enumerate_connected_hypergraphs(m, m_max=m_max):
        total += math.prod(weights[J] for J in h.hyperedges)
    return total


def dpsi_T_rooted(points, params: MixtureParams, W_provider: WProvider,
                  dW_provider: WProvider, m_max: int = graphs.M_MAX) -> float:
    """z_r-derivative of the truncated weight as a sum over hyperedge-rooted connected hypergraphs.

    The root hyperedge J carries d/dz_r of its weight, e^{-v - W_J} * (-dW_J/dz_r);
    all other hyperedges keep their usual weight.
    """
    xs = np.atleast_2d(np.asarray(points, dtype=float))
    m = len(xs)
    if m == 1:
        return 0.0
    weights = hyperedge_weights(xs, params, W_provider)
    roots = {}
    for J in weights:
        idx = sorted(v - 1 for v in J)
        if len(J) == 2 and params.dist(xs[idx[0]], xs[idx[1]]) < 2 * params.R:
            roots[J] = 0.0
        else:
            roots[J] = math.exp(-W_provider(xs[idx])) * (-dW_provider(xs[idx]))
    total = 0.0
    for h in graphs.enumerate_connected_hypergraphs(m, m_max=m_max):
        hs = h.hyperedges
        for a, J in enumerate(hs):
            total += roots[J] * math.prod(weights[K] for b, K in enumerate(hs) if b != a)
    return total


def dpsi_T_partition(points, params: MixtureParams, W_provider: WProvider,
                     dW_provider: WProvider) -> float:
    """z_r-derivative of the truncated weight through the partition formula."""
    xs = np.atleast_2d(np.asarray(points, dtype=float))
    m = len(xs)
    psi_c, dpsi_c = {}, {}

    def blocks_val(b):
        if b not in psi_c:
            val = psi(xs[list(b)], params, W_provider)
            deriv = 0.0
            if val != 0.0 and len(b) > 1:
                for size in range(2, len(b) + 1):
                    for J in itertools.combinations(b, size):
                        deriv -= dW_provider(xs[list(J)])
                deriv *= val
            psi_c[b], dpsi_c[b] = val, deriv
        return psi_c[b], dpsi_c[b]

    total = 0.0
    for c, blocks in _partition_coefficients(m):
        vals = [blocks_val(b) for b in blocks]
        for a in range(len(vals)):
            total += c * vals[a][1] * math.prod(v[0] for i, v in enumerate(vals) if i != a)
    return total


def set_partition_identity(points, params: MixtureParams, W_provider: WProvider,
                           mode: str = "hypergraph") -> tuple[float, float]:
    """Return (sum over partitions of prod psi_T(blocks), psi(points))."""
    xs = np.atleast_2d(np.asarray(points, dtype=float))
    m = len(xs)
    f = psi_T_hypergraph if mode == "hypergraph" else psi_T_partition
    total = 0.0
    for part in graphs.set_partitions(range(m)):
        total += math.prod(f(xs[list(b)], params, W_provider) if len(b) > 1 else 1.0 for b in part)
    return total, psi(xs, params, W_provider)


def psi_T(points, params: MixtureParams, W_provider: WProvider | None = None,
          mode: str = "hypergraph", truncation=None, samples: int = 20_000, seed: int | None = 0):
    """Truncated effective Boltzmann weight of m >= 2 large spheres.

    ``hypergraph`` and ``partition`` modes return a float; ``cloud_series``
    returns an :class:`~bimix.estimates.MCEstimate` from the cloud expansion
    truncated at ``truncation`` clouds (default 3).
    """
    xs = np.atleast_2d(np.asarray(points, dtype=float))
    if len(xs) < 2:
        raise ValueError("psi_T needs m >= 2")
    if mode == "cloud_series":
        from .clouds import psi_T_cloud_series
        r_max = 3 if truncation is None else int(truncation)
        return psi_T_cloud_series(xs, params, r_max=r_max, samples=samples, seed=seed)
    if W_provider is None:
        from .effective import default_w_provider
        W_provider = default_w_provider(params)
    if mode == "hypergraph":
        return psi_T_hypergraph(xs, params, W_provider)
    if mode == "partition":
        return psi_T_partition(xs, params, W_provider)
    raise ValueError(f"unknown mode {mode!r}")


def random_large_configuration(rng: np.random.Generator, m: int, params: MixtureParams,
                               spread: float | None = None) -> np.ndarray:
    """Large-sphere centers scattered so that neighbors often interact."""
    spread = 1.5 * params.excl if spread is None else spread
    xs = [np.zeros(params.d)]
    for _ in range(1, m):
        base = xs[rng.integers(len(xs))]
        u = rng.standard_normal(params.d)
        u /= np.linalg.norm(u)
        xs.append(base + u * rng.uniform(1.6 * params.R, 2 * params.excl + 0.2 * spread))
    return np.array(xs)


def random_cloud_near(rng: np.random.Generator, xs: np.ndarray, params: MixtureParams,
                      k: int = 1, connected: bool = True) -> Cloud:
    """Cloud of k points seeded near the large spheres; grown overlap-connected for the colloid model."""
    anchor = xs[rng.integers(len(xs))]
    u = rng.standard_normal(params.d)
    u /= np.linalg.norm(u)
    pts = [anchor + u * rng.uniform(0.0, params.excl + params.r)]
    for _ in range(1, k):
        base = pts[rng.integers(len(pts))] if connected else anchor
        v = rng.standard_normal(params.d)
        v /= np.linalg.norm(v)
        step = rng.uniform(0, 2 * params.r) if connected else rng.uniform(0, 2 * params.excl)
        pts.append(base + v * step)
    return Cloud(tuple(map(tuple, pts)))
