"""Goodness-of-fit statistics for a fitted member against 1-D data."""

import math
from dataclasses import dataclass

import numpy as np

from . import distributions as dist

__all__ = [
    "Histogram",
    "KsResult",
    "histogram",
    "kl_divergence",
    "ks_two_sample",
    "ks_p_value",
    "qq_points",
    "fit_diagnostics",
]

_MASS_FLOOR = 1e-12
_SERIES_TOL = 1e-12
_SERIES_CAP = 10_000
_SMALL_T = 0.2


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        mass = np.asarray(self.mass, dtype=float)
        if edges.ndim != 1 or mass.ndim != 1 or edges.size != mass.size + 1:
            raise ValueError("need len(edges) == len(mass) + 1")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if np.any(mass < 0) or abs(mass.sum() - 1.0) > 1e-12:
            raise ValueError("mass must be non-negative and sum to 1")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "mass", mass)

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])


@dataclass(frozen=True)
class KsResult:
    score: float
    p_value: float
    n_effective: float


def histogram(data, bin_count=100):
    """Equal-width histogram over ``[min, max]`` of ``data`` as proportions."""
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("data must be non-empty")
    if int(bin_count) != bin_count or bin_count < 2:
        raise ValueError("bin_count must be an integer >= 2")
    lo, hi = float(x.min()), float(x.max())
    if not hi > lo:
        raise ValueError("data range has zero width")
    counts, edges = np.histogram(x, bins=int(bin_count), range=(lo, hi))
    mass = counts / counts.sum()
    return Histogram(edges, mass / mass.sum())


def kl_divergence(hist, spec):
    """Discrete KL divergence of the histogram from the model's bin masses.

    Model masses come from cdf differences, are floored at 1e-12 and
    renormalized over the histogram range; empty bins contribute nothing.
    """
    g = np.diff(dist.cdf(spec, hist.edges))
    g = np.maximum(g, _MASS_FLOOR)
    g /= g.sum()
    p = hist.mass
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / g[nz])))


def ks_p_value(d, n_effective):
    """Asymptotic two-sample KS p-value for score ``d``.

    Uses ``t = d (N_e + 0.12 + 0.11 / N_e)`` and the alternating series
    ``2 sum (-1)^(i-1) exp(-2 i^2 t^2)``; returns 1 for ``t < 0.2``.
    """
    if not (0.0 <= d <= 1.0):
        raise ValueError("d must lie in [0, 1]")
    if not n_effective > 0:
        raise ValueError("n_effective must be positive")
    t = d * (n_effective + 0.12 + 0.11 / n_effective)
    if t < _SMALL_T:
        return 1.0
    total = 0.0
    sign = 1.0
    for i in range(1, _SERIES_CAP + 1):
        term = math.exp(-2.0 * i * i * t * t)
        total += sign * term
        if term < _SERIES_TOL:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def _ks_statistic(a, b):
    a = np.sort(a)
    b = np.sort(b)
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_two_sample(data, spec, m=None, rng=None):
    """Two-sample KS of ``data`` against ``m`` draws from ``spec`` (m = n by default)."""
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("data must be non-empty")
    m = x.size if m is None else int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(rng)
    ref = dist.sample(spec, m, rng)
    return ks_from_samples(x, ref)


def ks_from_samples(x, y):
    d = _ks_statistic(x, y)
    n_e = math.sqrt(x.size * y.size / (x.size + y.size))
    return KsResult(d, ks_p_value(d, n_e), n_e)


def qq_points(data, spec, m=None, rng=None):
    """Sorted data against sorted reference draws, as an ``(n, 2)`` array.

    With ``m`` different from ``n`` the reference quantiles are interpolated
    at the data's plotting positions.
    """
    x = np.sort(np.asarray(data, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("data must be non-empty")
    m = x.size if m is None else int(m)
    rng = np.random.default_rng(rng)
    y = np.sort(dist.sample(spec, m, rng))
    if m != x.size:
        y = np.quantile(y, (np.arange(x.size) + 0.5) / x.size)
    return np.column_stack([x, y])


def fit_diagnostics(data, spec, rng, bins=100):
    """KL against a ``bins``-bin histogram and two-sample KS with m = n."""
    x = np.asarray(data, dtype=float).ravel()
    kl = kl_divergence(histogram(x, bins), spec)
    ks = ks_two_sample(x, spec, x.size, rng)
    return {"kl": kl, "ks_score": ks.score, "ks_p_value": ks.p_value,
            "ks_n_effective": ks.n_effective}
