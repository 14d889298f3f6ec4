"""Brute-force grand-canonical reference values in a small box.

The partition function is a double sum over particle numbers (n_1 large,
n_2 small). Every (n_1, n_2) term is an integral of a product of hard-core
indicators over uniformly distributed positions, estimated by plain
sampling. Two estimators are run side by side:

* ``raw``: large and small positions are both sampled and tested; for a
  given large configuration one batch of N2_max small points serves every
  n_2 through prefix products;
* ``free-volume`` (penetrable model only): small positions are integrated
  out exactly, each small sphere contributing V_free / |box|, with V_free
  from inclusion-exclusion over the large spheres.

Random streams are keyed by (seed, n_1) so results do not depend on the
number of workers.
"""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .effective import higher_body_threshold, intersection_volume
from .estimates import MCEstimate, exact, rng_for
from .geometry import BoxSpec, ball_volume, lens_volume_array
from .interactions import Model, MixtureParams


class OracleWarning(UserWarning):
    """Truncation tail or variance of an oracle estimate is not negligible."""


@dataclass(frozen=True)
class OracleConfig:
    box: BoxSpec
    N1_max: int = 6
    N2_max: int = 40
    samples_per_term: int = 100_000
    seed: int | None = 42
    workers: int = 1
    tail_tolerance: float = 1e-3

    def __post_init__(self):
        if self.N1_max < 0 or self.N2_max < 0:
            raise ValueError("truncations must be non-negative")
        if self.samples_per_term < 2:
            raise ValueError("need at least two samples per term")


def _pdist(P: np.ndarray, Q: np.ndarray, L: float | None) -> np.ndarray:
    """Distances between batches P (K, a, d) and Q (K, b, d) -> (K, a, b)."""
    diff = P[:, :, None, :] - Q[:, None, :, :]
    if L is not None:
        diff -= L * np.round(diff / L)
    return np.linalg.norm(diff, axis=-1)


def _large_ok(X, params, L):
    n1 = X.shape[1]
    if n1 < 2:
        return np.ones(len(X), dtype=bool)
    D = _pdist(X, X, L)
    iu = np.triu_indices(n1, 1)
    return np.all(D[:, iu[0], iu[1]] >= 2 * params.R, axis=1), D[:, iu[0], iu[1]]


def excluded_volume_batch(X: np.ndarray, params: MixtureParams) -> np.ndarray:
    """|union of B(x_i, R+r)| per configuration, by inclusion-exclusion.

    Requires non-overlapping large spheres and r/R below the three-body
    threshold, where all triple intersections vanish.
    """
    K, n1, _ = X.shape
    if n1 == 0:
        return np.zeros(K)
    vol = n1 * params.excluded_volume * np.ones(K)
    if n1 >= 2:
        _, d = _large_ok(X, params, params.periodic_L)
        vol -= lens_volume_array(params.excl, d).sum(axis=1)
    return vol


def excluded_volume(xs, params: MixtureParams, samples: int = 100_000, seed: int | None = 0) -> MCEstimate:
    """|union of exclusion balls| by full inclusion-exclusion (MC for nonempty k >= 3 intersections)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    total = exact(0.0)
    for k in range(1, len(xs) + 1):
        for J in itertools.combinations(range(len(xs)), k):
            if k == 1:
                v = exact(params.excluded_volume)
            else:
                v = intersection_volume(xs[list(J)], params, samples, seed)
            total = total + (v if k % 2 else -v)
    return total


def free_volume_hit_test(xs, params: MixtureParams, samples: int = 200_000, seed: int | None = 0) -> MCEstimate:
    """|box minus union of exclusion balls| by uniform hit-testing."""
    L = params.box.L
    rng = rng_for(seed, 61)
    pts = rng.random((samples, params.d)) * L
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    free = np.ones(samples, dtype=bool)
    for x in xs:
        free &= params.dist(pts, x) >= params.excl
    p = free.mean()
    V = params.box.volume
    return MCEstimate(V * p, V * math.sqrt(p * (1 - p) / samples), samples, seed)


def _log_poisson_weights(lam: float, nmax: int) -> np.ndarray:
    n = np.arange(nmax + 1)
    with np.errstate(divide="ignore"):
        return n * math.log(lam) - special.gammaln(n + 1) if lam > 0 else np.where(n == 0, 0.0, -np.inf)


def _group(n1: int, params: MixtureParams, cfg: OracleConfig):
    """Per-sample quantities for one n_1; all later sums are linear in their means."""
    rng = rng_for(cfg.seed, 71, n1)
    K, d, L = cfg.samples_per_term, params.d, cfg.box.L
    Lp = L if cfg.box.periodic else None
    X = rng.random((K, n1, d)) * L
    ok = _large_ok(X, params, Lp)[0] if n1 >= 2 else np.ones(K, dtype=bool)
    out = {"ok": ok.astype(float)}
    # raw path: small points tested against large spheres (and each other in the colloid model)
    n2 = cfg.N2_max
    Y = rng.random((K, n2, d)) * L
    if n2:
        free = np.ones((K, n2), dtype=bool)
        if n1:
            free &= np.all(_pdist(Y, X, Lp) >= params.excl, axis=2)
        out["hit"] = free.mean(axis=1) * cfg.box.volume
        if params.model is Model.COLLOID and n2 > 1:
            Dyy = _pdist(Y, Y, Lp)
            close = np.tril(np.ones((n2, n2), dtype=bool), -1)
            free &= ~np.any((Dyy < 2 * params.r) & close[None], axis=2)
        prefix = np.cumprod(free, axis=1)
        out["prefix"] = np.concatenate([np.ones((K, 1)), prefix], axis=1) * ok[:, None]
    else:
        out["prefix"] = ok[:, None].astype(float)
        out["hit"] = np.full(K, cfg.box.volume)
    # free-volume path
    if params.model is Model.PENETRABLE:
        vex = excluded_volume_batch(X, params)
        out["vfree"] = cfg.box.volume - vex
    return out


def _run(params: MixtureParams, cfg: OracleConfig):
    if params.box is None:
        params = params.with_(box=cfg.box)
    if params.model is Model.PENETRABLE and cfg.N1_max >= 3 and params.r / params.R >= higher_body_threshold():
        raise NotImplementedError("free-volume path needs r/R below the three-body threshold")
    n1s = list(range(cfg.N1_max + 1))
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            groups = list(ex.map(_group, n1s, [params] * len(n1s), [cfg] * len(n1s)))
    else:
        groups = [_group(n1, params, cfg) for n1 in n1s]
    return params, groups


def _ratio(groups_num, groups_den):
    """Ratio of sums of independent group means, with delta-method standard error.

    Each group supplies per-sample arrays (num_i, den_i) already multiplied
    by the group's weight.
    """
    num = sum(g.mean() for g in groups_num)
    den = sum(g.mean() for g in groups_den)
    q = num / den
    var = 0.0
    for a, b in zip(groups_num, groups_den):
        var += np.var(a - q * b, ddof=1) / len(a)
    return q, math.sqrt(var) / abs(den)


@dataclass
class OracleResult:
    log_xi: MCEstimate
    log_xi_raw: MCEstimate
    rho_R: MCEstimate
    rho_r: MCEstimate
    V_free_mean: MCEstimate
    V_free_hit: MCEstimate
    tail: dict

    def to_dict(self) -> dict:
        return {k: (v.to_dict() if isinstance(v, MCEstimate) else v) for k, v in self.__dict__.items()}


def run_oracle(params: MixtureParams, cfg: OracleConfig) -> OracleResult:
    """One sampling pass yielding log Xi, the two densities and the mean free volume."""
    if params.z_R == 0 and params.z_r == 0:
        z = exact(0.0)
        return OracleResult(z, z, z, z, exact(cfg.box.volume), exact(cfg.box.volume), {})
    params, groups = _run(params, cfg)
    V = cfg.box.volume
    lw1 = _log_poisson_weights(params.z_R * V, cfg.N1_max)
    lw2 = _log_poisson_weights(params.z_r * V, cfg.N2_max)
    n2 = np.arange(cfg.N2_max + 1)
    # shift by z_r |box| so the penetrable numbers stay O(1)
    shift = params.z_r * V
    w1 = np.exp(lw1)
    w2 = np.exp(lw2 - shift)

    raw = [w1[n1] * (g["prefix"] @ w2) for n1, g in enumerate(groups)]
    raw_n2 = [w1[n1] * (g["prefix"] @ (n2 * w2)) for n1, g in enumerate(groups)]
    xi_raw = sum(a.mean() for a in raw)
    se_raw = math.sqrt(sum(np.var(a, ddof=1) / len(a) for a in raw))
    log_xi_raw = MCEstimate(math.log(xi_raw) + shift, se_raw / xi_raw, cfg.samples_per_term, cfg.seed)
    nr, nr_se = _ratio(raw_n2, raw)

    if params.model is Model.PENETRABLE:
        # truncated Poisson sum over n_2 given the free volume
        cdf = lambda lam: special.gammaincc(cfg.N2_max + 1, lam)
        fv = [w1[n1] * g["ok"] * np.exp(params.z_r * (g["vfree"] - V)) * cdf(params.z_r * g["vfree"])
              for n1, g in enumerate(groups)]
        xi = sum(a.mean() for a in fv)
        se = math.sqrt(sum(np.var(a, ddof=1) / len(a) for a in fv))
        log_xi = MCEstimate(math.log(xi) + shift, se / xi, cfg.samples_per_term, cfg.seed)
        weights_main = fv
        vf, vf_se = _ratio([a * g["vfree"] for a, g in zip(fv, groups)], fv)
        V_free = MCEstimate(vf, vf_se, cfg.samples_per_term, cfg.seed)
    else:
        log_xi = log_xi_raw
        weights_main = raw
        V_free = None
    hit, hit_se = _ratio([a * g["hit"] for a, g in zip(weights_main, groups)], weights_main)
    V_free_hit = MCEstimate(hit, hit_se, cfg.samples_per_term, cfg.seed)
    if V_free is None:
        V_free = V_free_hit
    nR, nR_se = _ratio([n1 * a for n1, a in enumerate(weights_main)], weights_main)

    tail_R = abs(weights_main[-1].mean()) / max(abs(sum(a.mean() for a in weights_main)), 1e-300)
    tail_r = float(w2[-1] / w2.sum()) if cfg.N2_max else 0.0
    tail = {"n1": tail_R, "n2": tail_r}
    if cfg.N1_max and tail_R > cfg.tail_tolerance or tail_r > cfg.tail_tolerance:
        warnings.warn(f"oracle truncation tail: n1 {tail_R:.2e}, n2 {tail_r:.2e}", OracleWarning)
    return OracleResult(log_xi, log_xi_raw,
                        MCEstimate(nR / V, nR_se / V, cfg.samples_per_term, cfg.seed),
                        MCEstimate(nr / V, nr_se / V, cfg.samples_per_term, cfg.seed),
                        V_free, V_free_hit, tail)


def log_xi(params: MixtureParams, cfg: OracleConfig) -> MCEstimate:
    if params.model is Model.PENETRABLE and params.z_R == 0:
        return exact(params.z_r * cfg.box.volume)
    return run_oracle(params, cfg).log_xi


def observables(params: MixtureParams, cfg: OracleConfig) -> dict:
    """Grand-canonical densities and mean free volume."""
    res = run_oracle(params, cfg)
    return {"rho_R": res.rho_R, "rho_r": res.rho_r, "V_free_mean": res.V_free, "V_free_hit": res.V_free_hit}


def mixed_ratio_check(params: MixtureParams, cfg: OracleConfig, positions) -> tuple[MCEstimate, MCEstimate]:
    """Solvent partition function with pinned large spheres over the free one, two ways.

    (i) direct: sample small-sphere configurations and test them against the
    pinned spheres; (ii) effective: exp(m * integral of zeta - sum of W).
    Penetrable model, at most two pinned spheres.
    """
    if params.model is not Model.PENETRABLE:
        raise ValueError("mixed_ratio_check needs the penetrable model")
    xs = np.asarray(positions, dtype=float).reshape(-1, params.d)
    m = len(xs)
    if m > 2:
        raise ValueError("at most two pinned spheres")
    if m == 0:
        return exact(1.0), exact(1.0)
    params = params.with_(box=cfg.box) if params.box is None else params
    logr = -m * params.z_r * params.excluded_volume
    if m == 2:
        s = float(params.dist(xs[0], xs[1]))
        logr -= -params.z_r * float(lens_volume_array(params.excl, s))
    effective = exact(math.exp(logr))
    if m == 1 and cfg.box.periodic:
        return effective, effective
    rng = rng_for(cfg.seed, 81, m)
    K, n2 = cfg.samples_per_term, cfg.N2_max
    V = cfg.box.volume
    Y = rng.random((K, n2, params.d)) * cfg.box.L
    free = np.ones((K, n2), dtype=bool)
    for x in xs:
        free &= params.dist(Y, x) >= params.excl
    prefix = np.concatenate([np.ones((K, 1)), np.cumprod(free, axis=1)], axis=1)
    w = np.exp(_log_poisson_weights(params.z_r * V, n2) - params.z_r * V)
    vals = prefix @ w
    direct = MCEstimate(float(vals.mean() / w.sum()), float(vals.std(ddof=1) / math.sqrt(K) / w.sum()), K, cfg.seed)
    return direct, effective


def solvent_log_ratio(params: MixtureParams, x, samples: int = 100_000, seed: int | None = 0,
                      N2_max: int | None = None) -> MCEstimate:
    """log of Xi_{box minus B(x, R+r)}(z_r) / Xi_box(z_r) for the pure small-sphere gas.

    The two partition functions share random numbers; the error follows from
    the delta method on the ratio.
    """
    box = params.box
    V = box.volume
    lam = params.z_r * V
    n2 = N2_max if N2_max is not None else int(lam + 8 * math.sqrt(lam) + 10)
    rng = rng_for(seed, 91)
    Lp = box.L if box.periodic else None
    Y = rng.random((samples, n2, params.d)) * box.L
    ok = np.ones((samples, n2), dtype=bool)
    if params.model is Model.COLLOID and n2 > 1:
        D = _pdist(Y, Y, Lp)
        close = np.tril(np.ones((n2, n2), dtype=bool), -1)
        ok &= ~np.any((D < 2 * params.r) & close[None], axis=2)
    outside = params.dist(Y, np.asarray(x, dtype=float)) >= params.excl
    pre_all = np.concatenate([np.ones((samples, 1)), np.cumprod(ok, axis=1)], axis=1)
    pre_hole = np.concatenate([np.ones((samples, 1)), np.cumprod(ok & outside, axis=1)], axis=1)
    w = np.exp(_log_poisson_weights(lam, n2) - lam)
    a, b = pre_hole @ w, pre_all @ w
    q, se = _ratio([a], [b])
    return MCEstimate(math.log(q), se / q, samples, seed)
