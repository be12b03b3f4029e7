"""The three candidate families: symmetric alpha-stable, generalized
Gaussian and Student's t, all centred at the origin.

Parameterizations
-----------------
SaS
    characteristic function ``exp(-gamma |t|**alpha)``, ``0 < alpha <= 2``;
    ``gamma`` is the dispersion, so the spread scales as ``gamma**(1/alpha)``.
    ``alpha = 2`` is Normal(0, 2 gamma), ``alpha = 1`` is Cauchy(gamma).
GG
    ``alpha / (2 gamma Gamma(1/alpha)) exp(-(|x|/gamma)**alpha)``.
t
    ``gamma`` is a pure scale and ``alpha`` the degrees of freedom.

Everything is vectorized over ``x``; shape and scale are scalars.
"""

import functools
import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy import special as sc

from . import _stable
from .special import log_gamma, gamma_sign

__all__ = [
    "FamilyId",
    "DistSpec",
    "MomentUndefinedError",
    "log_pdf",
    "log_likelihood",
    "cdf",
    "sample",
    "flom_constant",
    "flom_value",
]

_LOG_PI = math.log(math.pi)
_LOG_SQRT_PI = 0.5 * _LOG_PI


class MomentUndefinedError(ValueError):
    """Absolute moment of the requested order does not exist."""


class FamilyId(IntEnum):
    SAS = 1
    GG = 2
    T = 3

    @property
    def label(self):
        return {1: "sas", 2: "gg", 3: "t"}[int(self)]

    @classmethod
    def parse(cls, value):
        """Accept 1/2/3, a FamilyId, or one of 'sas', 'gg', 't'."""
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            names = {"sas": cls.SAS, "stable": cls.SAS, "gg": cls.GG, "t": cls.T, "student": cls.T}
            if key in names:
                return names[key]
            if key.isdigit():
                value = int(key)
            else:
                raise ValueError(f"unknown family {value!r}")
        return cls(int(value))


@dataclass(frozen=True)
class DistSpec:
    """A fully specified member of one family (location fixed at 0)."""

    family: FamilyId
    alpha: float
    gamma: float
    delta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", FamilyId.parse(self.family))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "gamma", float(self.gamma))
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma}")
        if self.delta != 0.0:
            raise ValueError("only delta = 0 is supported")
        if self.family is FamilyId.SAS and self.alpha > 2.0:
            raise ValueError(f"SaS needs alpha <= 2, got {self.alpha}")

    def to_dict(self):
        return {"family": self.family.label, "alpha": self.alpha, "gamma": self.gamma}


def _as_finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("x must be finite")
    return arr


def _sas_log_pdf_std(alpha, log_abs_z, z):
    """Standardized SaS log-density; exact forms at alpha = 1 and 2."""
    if alpha == 2.0:
        return -0.25 * z * z - math.log(2.0) - _LOG_SQRT_PI
    if alpha == 1.0:
        return -_LOG_PI - np.log1p(z * z)
    return _stable.get_table(alpha).log_pdf_abs(log_abs_z)


def _log_pdf_array(spec, x, log_abs_x=None):
    a, g = spec.alpha, spec.gamma
    fam = spec.family
    if fam is FamilyId.GG:
        norm = math.log(a) - math.log(2.0 * g) - log_gamma(1.0 / a)
        return norm - (np.abs(x) / g) ** a
    if fam is FamilyId.T:
        norm = (log_gamma(0.5 * (a + 1.0)) - log_gamma(0.5 * a)
                - math.log(g) - 0.5 * (_LOG_PI + math.log(a)))
        return norm - 0.5 * (a + 1.0) * np.log1p((x / g) ** 2 / a)
    # SaS: f(x; alpha, gamma) = c^-1 f0(x / c), c = gamma**(1/alpha)
    log_c = math.log(g) / a
    z = x * math.exp(-log_c)
    if log_abs_x is None:
        with np.errstate(divide="ignore"):
            log_abs_x = np.log(np.abs(x))
    return _sas_log_pdf_std(a, log_abs_x - log_c, z) - log_c


def log_pdf(spec, x):
    """Natural log of the density at ``x`` (scalar or array)."""
    arr = _as_finite(x)
    out = _log_pdf_array(spec, np.atleast_1d(arr))
    return out.item() if arr.ndim == 0 else out.reshape(arr.shape)


def log_likelihood(spec, data):
    """Sum of :func:`log_pdf` over ``data``."""
    arr = _as_finite(data).ravel()
    if arr.size == 0:
        raise ValueError("data must be non-empty")
    return float(np.sum(_log_pdf_array(spec, arr)))


def cdf(spec, x):
    """Distribution function; symmetric, so ``cdf(spec, 0) == 0.5``."""
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise ValueError("x must not be NaN")
    flat = np.atleast_1d(arr)
    a, g = spec.alpha, spec.gamma
    fam = spec.family
    with np.errstate(invalid="ignore", divide="ignore"):
        if fam is FamilyId.GG:
            half = 0.5 * sc.gammainc(1.0 / a, (np.abs(flat) / g) ** a)
        elif fam is FamilyId.T:
            z2 = (flat / g) ** 2
            half = 0.5 - 0.5 * sc.betainc(0.5 * a, 0.5, a / (a + z2))
        else:
            z = flat * g ** (-1.0 / a)
            if a == 2.0:
                half = 0.5 * sc.erf(np.abs(z) / 2.0)
            elif a == 1.0:
                half = np.arctan(np.abs(z)) / math.pi
            else:
                half = _stable.get_table(a).cdf(np.abs(z)) - 0.5
    out = np.clip(0.5 + np.sign(flat) * half, 0.0, 1.0)
    return out.item() if arr.ndim == 0 else out.reshape(arr.shape)


def sample(spec, n, rng):
    """Draw ``n`` i.i.d. variates using the caller's ``numpy`` Generator.

    SaS uses the Chambers-Mallows-Stuck transformation, GG a signed
    power of a Gamma(1/alpha) variate, and t a normal over a scaled
    root chi-square.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    a, g = spec.alpha, spec.gamma
    fam = spec.family
    if fam is FamilyId.GG:
        mag = g * rng.standard_gamma(1.0 / a, size=n) ** (1.0 / a)
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return sign * mag
    if fam is FamilyId.T:
        z = rng.standard_normal(n)
        chi2 = rng.chisquare(a, size=n)
        return g * z / np.sqrt(chi2 / a)
    v = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, size=n)
    w = rng.standard_exponential(n)
    c = g ** (1.0 / a)
    if a == 1.0:
        return c * np.tan(v)
    if a == 2.0:
        return c * 2.0 * np.sin(v) * np.sqrt(w)
    return c * (np.sin(a * v) / np.cos(v) ** (1.0 / a)
                * (np.cos((1.0 - a) * v) / w) ** ((1.0 - a) / a))


def _signed_lg(x):
    return gamma_sign(x), log_gamma(x)


def log_flom_constant(family, p, alpha):
    """Log of the absolute FLOM constant; see :func:`flom_constant`."""
    return _log_flom_constant(FamilyId.parse(family), float(p), float(alpha))


@functools.lru_cache(maxsize=65536)
def _log_flom_constant(fam, p, a):
    # the sampler asks for the same few (p, alpha) pairs over and over
    if not (p > 0 and math.isfinite(p)):
        raise MomentUndefinedError(f"moment order must be positive, got {p}")
    if not (a > 0 and math.isfinite(a)):
        raise ValueError(f"alpha must be positive, got {a}")
    try:
        if fam is FamilyId.GG:
            return log_gamma((p + 1.0) / a) - log_gamma(1.0 / a)
        if p >= a:
            raise MomentUndefinedError(f"E|x|^{p} undefined for {fam.label} with alpha={a}")
        if fam is FamilyId.T:
            return (log_gamma(0.5 * (p + 1.0)) + log_gamma(0.5 * (a - p))
                    - _LOG_SQRT_PI - log_gamma(0.5 * a) + 0.5 * p * math.log(a))
        if a > 2.0:
            raise ValueError(f"SaS needs alpha <= 2, got {a}")
        # Gamma(-p/alpha) and Gamma(-p/2) live on the negative axis
        s1, l1 = _signed_lg(-p / a)
        s2, l2 = _signed_lg(-p / 2.0)
        if s1 * s2 <= 0:
            raise MomentUndefinedError("SaS FLOM constant is not positive here")
        return (log_gamma(0.5 * (p + 1.0)) + l1 - l2 - math.log(a) - _LOG_SQRT_PI
                + (p + 1.0) * math.log(2.0))
    except MomentUndefinedError:
        raise
    except ValueError as exc:
        raise MomentUndefinedError(str(exc)) from exc


def flom_constant(family, p, alpha):
    """Constant C with ``E|x|**p = C * gamma**(p/alpha)`` (SaS) or
    ``C * gamma**p`` (GG, t).

    Raises
    ------
    MomentUndefinedError
        If ``p >= alpha`` for SaS or t, or a gamma-function pole is hit.
    """
    return math.exp(log_flom_constant(family, p, alpha))


def _scale_exponent(family, p, alpha):
    return p / alpha if FamilyId.parse(family) is FamilyId.SAS else p


def log_flom_value(spec, p):
    return (log_flom_constant(spec.family, p, spec.alpha)
            + _scale_exponent(spec.family, p, spec.alpha) * math.log(spec.gamma))


def flom_value(spec, p):
    """Absolute fractional moment ``E|x|**p`` of ``spec``."""
    return math.exp(log_flom_value(spec, p))
