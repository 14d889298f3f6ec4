"""Monte Carlo result carrier and seeded random streams."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class MCEstimate:
    """A Monte Carlo value with its standard error, sample count and seed."""

    value: float
    stderr: float
    n: int
    seed: int | None = None

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")

    def __add__(self, other):
        if isinstance(other, MCEstimate):
            return MCEstimate(self.value + other.value,
                              math.hypot(self.stderr, other.stderr),
                              self.n + other.n, self.seed)
        return MCEstimate(self.value + other, self.stderr, self.n, self.seed)

    __radd__ = __add__

    def __neg__(self):
        return MCEstimate(-self.value, self.stderr, self.n, self.seed)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: float) -> "MCEstimate":
        return MCEstimate(c * self.value, abs(c) * self.stderr, self.n, self.seed)

    def agrees_with(self, other, nsigma: float = 3.0, slack: float = 0.0) -> bool:
        """True if the two values lie within `nsigma` combined standard errors (plus `slack`)."""
        if isinstance(other, MCEstimate):
            sigma = math.hypot(self.stderr, other.stderr)
            diff = abs(self.value - other.value)
        else:
            sigma = self.stderr
            diff = abs(self.value - float(other))
        return diff <= nsigma * sigma + slack + 1e-12 * max(1.0, abs(self.value))

    def to_dict(self) -> dict:
        return asdict(self)


def exact(value: float) -> MCEstimate:
    return MCEstimate(float(value), 0.0, 0, None)


def mean_estimate(samples, scale: float = 1.0, seed: int | None = None) -> MCEstimate:
    """Sample-mean estimate of scale * E[samples] with the usual standard error."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n == 0:
        raise ValueError("no samples")
    mean = samples.mean()
    sd = samples.std(ddof=1) if n > 1 else 0.0
    return MCEstimate(float(scale * mean), float(abs(scale) * sd / math.sqrt(n)), int(n), seed)


def rng_for(seed: int | None, *tags: int) -> np.random.Generator:
    """Independent generator for a (seed, tag...) key.

    Streams are keyed rather than spawned in sequence, so a given term gets the
    same numbers regardless of how work is split across workers.
    """
    if seed is None:
        return np.random.default_rng()
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))
