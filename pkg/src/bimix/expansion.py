"""Cluster coefficients in the effective activity and the resulting pressure and density series.

Normalization: b_m = (1/m!) * integral of psi_T(0, x_2, ..., x_m) over x_2..x_m,
with b_1 = 1, so that the pressure is sum_m b_m zhat^m (plus z_r in the
penetrable model).

Monte Carlo integrands use the set-partition form of psi_T, evaluated for a
whole batch of samples at once; the hypergraph form is available as a
(slower) cross-check through ``method="hypergraph"``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import convergence, graphs
from .effective import CloudSeriesW, higher_body_threshold, intersection_volume, zhat
from .estimates import MCEstimate, mean_estimate, rng_for
from .geometry import ball_volume, lens_volume, lens_volume_array, uniform_in_unit_ball
from .interactions import Model, MixtureParams


class CriterionWarning(UserWarning):
    """Series evaluated outside the proven convergence region."""


@dataclass(frozen=True)
class ClusterCoefficient:
    m: int
    estimate: float
    stderr: float
    samples: int
    seed: int | None = None
    truncation: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"m": self.m, "estimate": self.estimate, "stderr": self.stderr,
                "samples": self.samples, "seed": self.seed, "truncation": self.truncation}


@dataclass
class SeriesResult:
    terms: list
    total: float
    total_stderr: float
    M: int
    offset: float = 0.0
    criterion_satisfied: bool = True
    majorant: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"terms": [{"m": m, "value": v, "stderr": s} for m, v, s in self.terms],
                "total": self.total, "total_stderr": self.total_stderr, "M": self.M,
                "offset": self.offset, "criterion_satisfied": self.criterion_satisfied,
                "majorant": self.majorant}


def reach(params: MixtureParams) -> float:
    """Largest center distance at which two large spheres still interact."""
    if params.model is Model.PENETRABLE:
        return 2 * params.excl
    # a cloud of up to k_max small spheres bridges a longer gap
    return 2 * params.excl + 2 * params.r * 2


# ---------------------------------------------------------------------------
# batch evaluation of psi over all subsets


def _subsets(m: int):
    return [S for size in range(2, m + 1) for S in itertools.combinations(range(m), size)]


def _pair_w_penetrable(params: MixtureParams):
    def w(dist):
        vol = lens_volume_array(params.excl, dist)
        return -params.z_r * vol, -vol
    return w


def _pair_w_table(params: MixtureParams, samples: int, seed, points: int = 41):
    """Tabulated colloid pair potential W_2(s) and its interpolant (value only)."""
    lo, hi = 2 * params.R, reach(params)
    grid = np.linspace(lo, hi, points)
    prov = CloudSeriesW(params, samples=samples, seed=seed)
    vals = np.array([prov(np.array([[0.0] * params.d, [s] + [0.0] * (params.d - 1)])) for s in grid])

    def w(dist):
        out = np.interp(dist, grid, vals, left=vals[0], right=0.0)
        return np.where(dist < hi, out, 0.0), np.full(np.shape(dist), np.nan)
    return w


def _psi_tables(X: np.ndarray, params: MixtureParams, pair_w, multi_w, need_deriv: bool):
    """psi(S) and d psi(S)/dz_r for every subset S with #S >= 2, as (N,) arrays."""
    N, m, _ = X.shape
    diff = X[:, :, None, :] - X[:, None, :, :]
    D = np.linalg.norm(diff, axis=-1)
    ok_pair, w_pair, dw_pair = {}, {}, {}
    for i, j in itertools.combinations(range(m), 2):
        ok_pair[i, j] = D[:, i, j] >= 2 * params.R
        w_pair[i, j], dw_pair[i, j] = pair_w(D[:, i, j])
    w_multi, dw_multi = {}, {}
    if multi_w is not None:
        for J in _subsets(m):
            if len(J) < 3:
                continue
            alive = np.ones(N, dtype=bool)
            for i, j in itertools.combinations(J, 2):
                alive &= ok_pair[i, j]
            w_multi[J], dw_multi[J] = multi_w(X[:, list(J)], alive)
    psi, dpsi = {}, {}
    for S in _subsets(m):
        alive = np.ones(N, dtype=bool)
        W = np.zeros(N)
        dW = np.zeros(N)
        for i, j in itertools.combinations(S, 2):
            alive &= ok_pair[i, j]
            W += w_pair[i, j]
            dW += dw_pair[i, j]
        for J in w_multi:
            if set(J) <= set(S):
                W += w_multi[J]
                dW += dw_multi[J]
        val = np.where(alive, np.exp(-np.where(alive, W, 0.0)), 0.0)
        psi[S] = val
        if need_deriv:
            dpsi[S] = -val * np.where(alive, dW, 0.0)
    return psi, dpsi


def _multi_w_penetrable(params: MixtureParams, samples: int, seed):
    if params.r / params.R < higher_body_threshold(params.d):
        return None

    def w(XJ, alive):
        W = np.zeros(len(XJ))
        dW = np.zeros(len(XJ))
        for n in np.nonzero(alive)[0]:
            v = intersection_volume(XJ[n], params, samples, seed).value
            if v:
                dW[n] = (-1) ** (XJ.shape[1] - 1) * v
                W[n] = params.z_r * dW[n]
        return W, dW
    return w


def _multi_w_colloid(params: MixtureParams, samples: int, seed):
    prov = CloudSeriesW(params, samples=samples, seed=seed)
    lim = reach(params)

    def w(XJ, alive):
        W = np.zeros(len(XJ))
        for n in np.nonzero(alive)[0]:
            pts = XJ[n]
            dmax = max(np.linalg.norm(pts[i] - pts[j]) for i, j in itertools.combinations(range(len(pts)), 2))
            if dmax < lim and params.z_r != 0:
                W[n] = prov(pts)
        return W, np.full(len(XJ), np.nan)
    return w


def _partition_terms(m: int):
    out = []
    for part in graphs.set_partitions(range(m)):
        q = len(part)
        coef = (-1) ** (q - 1) * math.factorial(q - 1)
        out.append((coef, [tuple(sorted(b)) for b in part]))
    return out


def psi_T_batch(X: np.ndarray, params: MixtureParams, derivative: bool = False,
                method: str = "partition", inner_samples: int = 20_000, seed: int | None = 0):
    """psi_T (or its z_r-derivative) at each of N configurations X of shape (N, m, d)."""
    N, m, _ = X.shape
    if params.model is Model.PENETRABLE:
        pair_w = _pair_w_penetrable(params)
        multi_w = _multi_w_penetrable(params, inner_samples, seed)
    else:
        if derivative:
            raise NotImplementedError("z_r-derivative implemented for the penetrable model")
        pair_w = _pair_w_table(params, inner_samples, seed)
        multi_w = _multi_w_colloid(params, inner_samples // 4, seed)
    if method == "hypergraph":
        return _hypergraph_batch(X, params, pair_w, multi_w, derivative)
    psi, dpsi = _psi_tables(X, params, pair_w, multi_w, derivative)
    one = np.ones(N)
    total = np.zeros(N)
    for coef, blocks in _partition_terms(m):
        vals = [psi[b] if len(b) > 1 else one for b in blocks]
        if not derivative:
            total += coef * np.prod(vals, axis=0)
            continue
        for a, b in enumerate(blocks):
            if len(b) < 2:
                continue
            prod = dpsi[b]
            for c, v in enumerate(vals):
                if c != a:
                    prod = prod * v
            total += coef * prod
    return total


def _hypergraph_batch(X, params, pair_w, multi_w, derivative):
    """Sum over connected hypergraphs (rooted at each hyperedge for the derivative)."""
    N, m, _ = X.shape
    D = np.linalg.norm(X[:, :, None, :] - X[:, None, :, :], axis=-1)
    weight, root = {}, {}
    for i, j in itertools.combinations(range(m), 2):
        ok = D[:, i, j] >= 2 * params.R
        W, dW = pair_w(D[:, i, j])
        e = np.where(ok, np.exp(-W), 0.0)
        weight[frozenset((i + 1, j + 1))] = e - 1.0
        root[frozenset((i + 1, j + 1))] = -e * dW
    for J in _subsets(m):
        if len(J) < 3:
            continue
        key = frozenset(v + 1 for v in J)
        if multi_w is None:
            weight[key] = np.zeros(N)
            root[key] = np.zeros(N)
            continue
        W, dW = multi_w(X[:, list(J)], np.ones(N, dtype=bool))
        weight[key] = np.expm1(-W)
        root[key] = -np.exp(-W) * dW
    total = np.zeros(N)
    for h in graphs.enumerate_connected_hypergraphs(m):
        hs = h.hyperedges
        if not derivative:
            total += np.prod([weight[J] for J in hs], axis=0)
            continue
        for a, J in enumerate(hs):
            prod = root[J]
            for b, K in enumerate(hs):
                if b != a:
                    prod = prod * weight[K]
            total += prod
    return total


# ---------------------------------------------------------------------------
# coefficients


def _sample_relative(params: MixtureParams, m: int, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Configurations with x_1 = 0 grown as random trees, with their sampling densities.

    Points 2..m are added in a random order, each uniform in the ball of
    radius ``reach`` around a uniformly chosen earlier point. Every
    configuration whose interaction graph is connected has positive density,
    so this covers the support of psi_T. The density is a mixture over
    orders and parents and is evaluated exactly. Returns (X, 1 / density).
    """
    rad = reach(params)
    d = params.d
    orders = list(itertools.permutations(range(1, m)))
    X = np.zeros((n, m, d))
    which = rng.integers(len(orders), size=n)
    order_arr = np.array(orders, dtype=int).reshape(len(orders), m - 1)[which]
    for k in range(m - 1):
        parent_slot = rng.integers(k + 1, size=n)
        placed = np.concatenate([np.zeros((n, 1), dtype=int), order_arr[:, :k]], axis=1)
        parent = placed[np.arange(n), parent_slot]
        step = rad * uniform_in_unit_ball(rng, n, d)
        X[np.arange(n), order_arr[:, k]] = X[np.arange(n), parent] + step
    D = np.linalg.norm(X[:, :, None, :] - X[:, None, :, :], axis=-1)
    near = D < rad
    vb = ball_volume(rad, d)
    dens = np.zeros(n)
    for order in orders:
        q = np.ones(n)
        placed = [0]
        for k, i in enumerate(order):
            q *= near[:, i, placed].sum(axis=1) / ((k + 1) * vb)
            placed.append(i)
        dens += q
    dens /= len(orders)
    return X, 1.0 / dens


def _check_order(m: int, m_max: int):
    if m < 1:
        raise ValueError("order must be >= 1")
    if m > m_max:
        raise graphs.EnumerationBoundError(f"m={m} exceeds bound {m_max}")


def _batched(fn, n: int, batch: int = 50_000):
    out = []
    for start in range(0, n, batch):
        out.append(fn(start, min(batch, n - start)))
    return np.concatenate(out)


def b_m(m: int, params: MixtureParams, samples: int = 200_000, seed: int | None = 0,
        method: str = "partition", m_max: int = graphs.M_MAX) -> ClusterCoefficient:
    """Monte Carlo estimate of the m-th cluster coefficient in the effective activity."""
    _check_order(m, m_max)
    if m == 1:
        return ClusterCoefficient(1, 1.0, 0.0, 0, seed)
    est = _mc_coefficient(m, params, samples, seed, derivative=False, method=method)
    return ClusterCoefficient(m, est.value, est.stderr, samples, seed, {"method": method})


def db_m_dzr(m: int, params: MixtureParams, samples: int = 200_000, seed: int | None = 0,
             method: str = "hypergraph", m_max: int = graphs.M_MAX) -> ClusterCoefficient:
    """z_r-derivative of b_m through rooted weights (penetrable model).

    ``method="hypergraph"`` sums over hyperedge-rooted connected hypergraphs,
    ``"partition"`` differentiates the set-partition form; both are exact
    rewritings of the same integrand.
    """
    if params.model is not Model.PENETRABLE:
        raise ValueError("db_m/dz_r implemented for the penetrable model")
    _check_order(m, m_max)
    if m == 1:
        return ClusterCoefficient(1, 0.0, 0.0, 0, seed)
    est = _mc_coefficient(m, params, samples, seed, derivative=True, method=method)
    return ClusterCoefficient(m, est.value, est.stderr, samples, seed, {"method": method})


def _mc_coefficient(m, params, samples, seed, derivative, method) -> MCEstimate:
    rng = rng_for(seed, 41, m)

    def chunk(start, n):
        X, w = _sample_relative(params, m, n, rng)
        return w * psi_T_batch(X, params, derivative=derivative, method=method, seed=seed)
    vals = _batched(chunk, samples)
    return mean_estimate(vals, 1.0 / math.factorial(m), seed)


def b_m_finite_difference(m: int, params: MixtureParams, h: float = 1e-3, samples: int = 200_000,
                          seed: int | None = 0) -> MCEstimate:
    """Central difference (b_m(z_r + h) - b_m(z_r - h)) / 2h with common random numbers."""
    if params.z_r - h < 0:
        raise ValueError("z_r - h must be non-negative")
    rng = rng_for(seed, 43, m)
    up, dn = params.with_(z_r=params.z_r + h), params.with_(z_r=params.z_r - h)

    def chunk(start, n):
        X, w = _sample_relative(params, m, n, rng)
        return w * (psi_T_batch(X, up, seed=seed) - psi_T_batch(X, dn, seed=seed))
    vals = _batched(chunk, samples)
    return mean_estimate(vals, 1.0 / math.factorial(m) / (2 * h), seed)


def b2_quadrature(params: MixtureParams) -> float:
    """b_2 of the penetrable model by 1-D radial quadrature."""
    rho = params.excl
    tail, _ = integrate.quad(lambda s: math.expm1(params.z_r * lens_volume(rho, s)) * 4 * math.pi * s * s,
                             2 * params.R, 2 * rho, epsabs=1e-14, epsrel=1e-12)
    return -0.5 * ball_volume(2 * params.R, 3) + 0.5 * tail


def db2_quadrature(params: MixtureParams) -> float:
    """z_r-derivative of the penetrable b_2 by 1-D radial quadrature."""
    rho = params.excl

    def f(s):
        v = lens_volume(rho, s)
        return v * math.exp(params.z_r * v) * 4 * math.pi * s * s
    val, _ = integrate.quad(f, 2 * params.R, 2 * rho, epsabs=1e-14, epsrel=1e-12)
    return 0.5 * val


# ---------------------------------------------------------------------------
# series


DEFAULT_SAMPLES = {2: 200_000, 3: 200_000, 4: 100_000}


def coefficients(params: MixtureParams, M: int, samples=None, seed: int | None = 0,
                 derivative: bool = False) -> list[ClusterCoefficient]:
    out = []
    for m in range(1, M + 1):
        n = DEFAULT_SAMPLES.get(m, 100_000) if samples is None else int(samples)
        if derivative:
            out.append(db_m_dzr(m, params, n, seed, method="partition"))
        elif m == 2 and params.model is Model.PENETRABLE and params.d == 3:
            # the radial quadrature is exact; no need to sample
            out.append(ClusterCoefficient(2, b2_quadrature(params), 0.0, 0, seed, {"method": "quadrature"}))
        else:
            out.append(b_m(m, params, n, seed))
    return out


def criterion_gate(params: MixtureParams, zh: float) -> tuple[bool, dict]:
    """Check the applicable convergence criterion; returns (satisfied, witness dict)."""
    if params.model is Model.PENETRABLE:
        w = convergence.check_easy(params, zh)
        return w.satisfied, w.to_dict()
    try:
        w = convergence.witness_search_hs(params, zh)
    except convergence.PreconditionError as exc:
        return False, {"criterion": "suff_hs", "error": str(exc)}
    return w.satisfied, w.to_dict()


def _series(params, M, weights, coeffs, offset, force) -> SeriesResult:
    zh = zhat(params).value
    ok, witness = criterion_gate(params, zh)
    if not ok:
        msg = "activities outside the proven convergence region"
        if not force:
            warnings.warn(msg, CriterionWarning)
    terms = []
    for c in coeffs:
        w = weights(c.m) * zh ** c.m
        terms.append((c.m, w * c.estimate, abs(w) * c.stderr))
    total = offset + sum(t[1] for t in terms)
    se = math.sqrt(sum(t[2] ** 2 for t in terms))
    maj = {"witness": witness}
    if params.model is Model.PENETRABLE:
        A = witness.get("constants", {}).get("A")
        if A is not None:
            lhs = sum(c.m * abs(c.estimate) * zh ** c.m for c in coeffs)
            maj.update({"lhs": lhs, "rhs": math.exp(A) * zh, "holds": lhs <= math.exp(A) * zh})
    if terms and len(terms) > 1 and abs(terms[-1][1]) > 0.1 * abs(total - offset) > 0:
        warnings.warn(f"series truncated at M={M} with last term {terms[-1][1]:.3g}", CriterionWarning)
    return SeriesResult(terms, total, se, M, offset, ok, maj)


def pressure_series(params: MixtureParams, M: int = 3, samples=None, seed: int | None = 0,
                    force: bool = False, coeffs=None) -> SeriesResult:
    """Pressure: z_r + sum_m b_m zhat^m (penetrable) or sum_m b_m zhat^m (colloid)."""
    coeffs = coefficients(params, M, samples, seed) if coeffs is None else coeffs
    offset = params.z_r if params.model is Model.PENETRABLE else 0.0
    return _series(params, M, lambda m: 1.0, coeffs, offset, force)


def rho_R(params: MixtureParams, M: int = 3, samples=None, seed: int | None = 0,
          force: bool = False, coeffs=None) -> SeriesResult:
    """Large-sphere density sum_m m b_m zhat^m."""
    coeffs = coefficients(params, M, samples, seed) if coeffs is None else coeffs
    return _series(params, M, lambda m: float(m), coeffs, 0.0, force)


def rho_r(params: MixtureParams, M: int = 3, samples=None, seed: int | None = 0,
          force: bool = False, coeffs=None, dcoeffs=None) -> SeriesResult:
    """Small-sphere density z_r (1 - |B(0,R+r)| rho_R + sum_{m>=2} db_m/dz_r zhat^m), penetrable model."""
    if params.model is not Model.PENETRABLE:
        raise ValueError("rho_r series implemented for the penetrable model")
    coeffs = coefficients(params, M, samples, seed) if coeffs is None else coeffs
    dcoeffs = coefficients(params, M, samples, seed, derivative=True) if dcoeffs is None else dcoeffs
    dens = rho_R(params, M, seed=seed, force=True, coeffs=coeffs)
    zh = zhat(params).value
    vex = params.excluded_volume
    zr = params.z_r
    terms = [(0, zr, 0.0)]
    for (m, v, s) in dens.terms:
        terms.append((m, -zr * vex * v, zr * vex * s))
    dsum = 0.0
    for c in dcoeffs:
        if c.m < 2:
            continue
        v = zr * c.estimate * zh ** c.m
        # labelled d<m> to tell them apart from the density-driven terms of the same order
        terms.append((f"d{c.m}", v, zr * c.stderr * zh ** c.m))
        dsum += abs(c.estimate) * zh ** c.m
    total = sum(t[1] for t in terms)
    se = math.sqrt(sum(t[2] ** 2 for t in terms))
    a, _ = convergence.easy_witness(params)
    ok, witness = criterion_gate(params, zh)
    if not ok and not force:
        warnings.warn("activities outside the proven convergence region", CriterionWarning)
    maj = {"derivative_sum": dsum, "bound": math.expm1(a), "holds": dsum <= math.expm1(a), "witness": witness}
    return SeriesResult(terms, total, se, M, 0.0, ok, maj)
