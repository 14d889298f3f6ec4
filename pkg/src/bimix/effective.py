"""Effective large-sphere activity and solvent-induced multi-body potentials."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate

from . import clouds
from .estimates import MCEstimate, exact
from .geometry import (BallSpec, ball_box_overlap_volume, balls_intersect, k_intersection_volume,
                       lens_volume, lens_volume_array)
from .interactions import Model, MixtureParams


class ActivityMode(str, Enum):
    PENETRABLE_EXACT = "penetrable_exact"
    COLLOID_SERIES = "colloid_series"
    FINITE_VOLUME_RATIO = "finite_volume_ratio"


@dataclass(frozen=True)
class EffectiveActivity:
    value: float
    exponent: float
    mode: ActivityMode
    error: float = 0.0
    terms: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {"value": self.value, "exponent": self.exponent, "mode": self.mode.value,
                "stderr": self.error, "terms": [list(t) for t in self.terms]}


@dataclass(frozen=True)
class EffectivePotentialValue:
    J_size: int
    value: float
    error: float = 0.0
    samples: int = 0

    def to_dict(self) -> dict:
        return {"k": self.J_size, "value": self.value, "stderr": self.error, "samples": self.samples}


def higher_body_threshold(d: int = 3) -> float:
    """Size ratio r/R below which W_k vanishes for k >= 3 when large spheres do not overlap.

    Three centers at mutual distance >= 2R have circumradius >= 2R/sqrt(3), so
    their exclusion balls of radius R + r share no point once R + r <= 2R/sqrt(3).
    """
    return 2.0 / math.sqrt(3.0) - 1.0


def intersection_volume(xs, params: MixtureParams, samples: int = 100_000,
                        seed: int | None = 0) -> MCEstimate:
    """|intersection of B(x_j, R+r)|, exact for pairs and for empty intersections."""
    xs = clouds.unwrap(xs, params)
    rho = params.excl
    if len(xs) == 2:
        return exact(lens_volume(rho, float(np.linalg.norm(xs[0] - xs[1])), params.d))
    if not balls_intersect(xs, rho):
        return exact(0.0)
    return k_intersection_volume([BallSpec(x, rho) for x in xs], samples, seed)


def w_J_penetrable(xs, params: MixtureParams, samples: int = 100_000,
                   seed: int | None = 0) -> EffectivePotentialValue:
    """W_k = z_r (-1)^(k-1) |intersection of the exclusion balls|."""
    if params.model is not Model.PENETRABLE:
        raise ValueError("w_J_penetrable needs the penetrable model")
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    k = len(xs)
    if k < 2:
        raise ValueError("W_J needs at least two spheres")
    vol = intersection_volume(xs, params, samples, seed)
    c = params.z_r * (-1) ** (k - 1)
    return EffectivePotentialValue(k, c * vol.value, abs(c) * vol.stderr, vol.n)


def w_J_cloud_series(xs, params: MixtureParams, truncation: int | None = None,
                     samples: int = 50_000, seed: int | None = 0) -> EffectivePotentialValue:
    """W_k as minus the cloud integral of prod zeta(x_j, Y), clouds up to ``truncation`` points."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    est = clouds.w_J_cloud_series(xs, params, samples, seed, truncation)
    return EffectivePotentialValue(len(xs), est.value, est.stderr, est.n)


class PenetrableW:
    """W provider for the penetrable model; ``dW`` gives the z_r-derivative."""

    def __init__(self, params: MixtureParams, samples: int = 100_000, seed: int | None = 0):
        self.params = params
        self.samples = samples
        self.seed = seed

    def volume(self, xs) -> float:
        return intersection_volume(xs, self.params, self.samples, self.seed).value

    def dW(self, xs) -> float:
        return (-1) ** (len(xs) - 1) * self.volume(xs)

    def __call__(self, xs) -> float:
        return self.params.z_r * self.dW(xs)


class CloudSeriesW:
    """W provider estimating each W_J by the cloud series (fixed seed, so repeatable)."""

    def __init__(self, params: MixtureParams, truncation: int | None = None,
                 samples: int = 50_000, seed: int | None = 0):
        self.params, self.truncation, self.samples, self.seed = params, truncation, samples, seed

    def __call__(self, xs) -> float:
        return w_J_cloud_series(xs, self.params, self.truncation, self.samples, self.seed).value


def default_w_provider(params: MixtureParams):
    if params.model is Model.PENETRABLE:
        return PenetrableW(params)
    return CloudSeriesW(params)


def colloid_pair_term_quadrature(params: MixtureParams) -> float:
    """Two-point cloud contribution to ln(zhat / z_R) in the colloid model, by 1-D quadrature.

    A pair of overlapping small spheres at separation s < 2r touches B(0, R+r)
    on the union of two shifted balls, of volume 2|B| - lens(R+r, s).
    """
    if params.d != 3:
        raise ValueError("quadrature oracle implemented for d = 3")
    vb = params.excluded_volume
    val, _ = integrate.quad(lambda s: (2 * vb - lens_volume(params.excl, s)) * 4 * math.pi * s * s,
                            0.0, 2 * params.r, epsabs=1e-13, epsrel=1e-12)
    return 0.5 * params.z_r ** 2 * val


def zhat(params: MixtureParams, mode: ActivityMode | str | None = None, truncation: int | None = None,
         samples: int = 100_000, seed: int | None = 0, x=None) -> EffectiveActivity:
    """Effective large-sphere activity z_R * exp(A).

    ``truncation`` is the largest cloud size kept in the colloid series
    (default 2). ``finite_volume_ratio`` needs a box and a position x.
    """
    if mode is None:
        mode = ActivityMode.PENETRABLE_EXACT if params.model is Model.PENETRABLE else ActivityMode.COLLOID_SERIES
    mode = ActivityMode(mode)
    if mode is ActivityMode.PENETRABLE_EXACT:
        if params.model is not Model.PENETRABLE:
            raise ValueError("penetrable_exact needs the penetrable model")
        A = -params.z_r * params.excluded_volume
        return EffectiveActivity(params.z_R * math.exp(A), A, mode)
    if mode is ActivityMode.COLLOID_SERIES:
        n_max = 2 if truncation is None else int(truncation)
        if n_max < 1:
            raise ValueError("truncation must be >= 1")
        terms = []
        total = exact(0.0)
        for k in range(1, n_max + 1):
            if params.model is Model.PENETRABLE and k > 1:
                t = exact(0.0)
            else:
                t = clouds.zeta_integral(params, samples, seed, k_only=k)
            terms.append((k, t.value, t.stderr))
            total = total + t
        if n_max > 1 and abs(terms[-1][1]) > 0.1 * abs(total.value) > 0:
            warnings.warn(f"cloud-size truncation at {n_max}: last term {terms[-1][1]:.3g}",
                          clouds.TruncationWarning)
        value = params.z_R * math.exp(total.value)
        return EffectiveActivity(value, total.value, mode, value * total.stderr, tuple(terms))
    # finite-volume ratio
    if params.box is None:
        raise ValueError("finite_volume_ratio needs a box")
    x = np.full(params.d, 0.5 * params.box.L) if x is None else np.asarray(x, dtype=float)
    if params.model is Model.PENETRABLE:
        if params.box.periodic:
            vol = exact(params.excluded_volume)
        else:
            vol = ball_box_overlap_volume(x, params.excl, params.box.L, samples, seed)
        A = -params.z_r * vol.value
        value = params.z_R * math.exp(A)
        return EffectiveActivity(value, A, mode, value * params.z_r * vol.stderr)
    from .oracle import solvent_log_ratio
    est = solvent_log_ratio(params, x, samples=samples, seed=seed)
    value = params.z_R * math.exp(est.value)
    return EffectiveActivity(value, est.value, mode, value * est.stderr)


def stability_b(params: MixtureParams, samples: int = 50_000, seed: int | None = 0) -> MCEstimate:
    """b(x) = -(cloud integral of zeta(x, .)), the one-body bound used in the stability check."""
    return -clouds.zeta_integral(params, samples, seed)


def dzhat_dzR_identity(params: MixtureParams) -> tuple[float, float]:
    """(z_R * d zhat / d z_R, zhat) for the penetrable closed form; equal by linearity."""
    h = 1e-6 * max(params.z_R, 1e-12)
    up = zhat(params.with_(z_R=params.z_R + h)).value
    dn = zhat(params.with_(z_R=params.z_R - h)).value
    return params.z_R * (up - dn) / (2 * h), zhat(params).value


def w2_penetrable_array(dist, params: MixtureParams) -> np.ndarray:
    return -params.z_r * lens_volume_array(params.excl, dist)
