import math

import mpmath
import numpy as np
import pytest

from transdist import distributions as dist
from transdist.diagnostics import (
    Histogram,
    histogram,
    kl_divergence,
    ks_from_samples,
    ks_p_value,
    ks_two_sample,
    qq_points,
)
from transdist.distributions import DistSpec, FamilyId

SAS, GG, T = FamilyId.SAS, FamilyId.GG, FamilyId.T


def ks_series_oracle(t, terms=10 ** 6):
    mpmath.mp.dps = 40
    t = mpmath.mpf(t)
    total = mpmath.mpf(0)
    for i in range(1, terms + 1):
        term = mpmath.exp(-2 * i * i * t * t)
        total += term if i % 2 else -term
        if term < mpmath.mpf(10) ** -35:
            break
    return float(2 * total)


def d_for_t(t, n_e):
    return t / (n_e + 0.12 + 0.11 / n_e)


# -- histogram --------------------------------------------------------------

def test_histogram_examples():
    assert histogram([0, 1], 2).mass.tolist() == [0.5, 0.5]
    assert histogram([0, 0, 0, 1], 2).mass.tolist() == [0.75, 0.25]
    h = histogram(np.random.default_rng(0).standard_cauchy(999), 100)
    assert h.mass.sum() == pytest.approx(1.0, abs=1e-12)
    assert h.edges.size == 101 and np.all(np.diff(h.edges) > 0)


@pytest.mark.parametrize("args", [([], 10), ([1.0, 1.0], 10), ([0, 1], 1)])
def test_histogram_errors(args):
    with pytest.raises(ValueError):
        histogram(*args)


def test_histogram_type_invariants():
    with pytest.raises(ValueError):
        Histogram(np.array([0.0, 1.0, 1.0]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        Histogram(np.array([0.0, 1.0, 2.0]), np.array([0.6, 0.5]))


# -- KL ---------------------------------------------------------------------

@pytest.mark.parametrize("spec", [DistSpec(SAS, 1.5, 2.0), DistSpec(GG, 0.5, 0.5), DistSpec(T, 3.0, 1.0)])
def test_kl_self_similarity(spec):
    edges = np.linspace(-10, 10, 101)
    mass = np.diff(dist.cdf(spec, edges))
    h = Histogram(edges, mass / mass.sum())
    assert abs(kl_divergence(h, spec)) <= 1e-9


def test_kl_non_negative_and_orders_candidates():
    x = dist.sample(DistSpec(T, 3.0, 1.0), 2000, np.random.default_rng(1))
    h = histogram(x, 100)
    near = kl_divergence(h, DistSpec(T, 3.0, 1.0))
    mid = kl_divergence(h, DistSpec(GG, 2.0, 1.4))
    far = kl_divergence(h, DistSpec(GG, 2.0, 5.0))
    assert min(near, mid, far) >= -1e-10
    assert near < mid < far


def test_kl_floor_keeps_it_finite():
    h = histogram(np.r_[np.linspace(-1, 1, 50), 1e3], 10)
    assert math.isfinite(kl_divergence(h, DistSpec(GG, 2.0, 0.1)))


def test_kl_fitted_stable_example(sas15):
    x = dist.sample(sas15, 1000, np.random.default_rng(2))
    assert kl_divergence(histogram(x, 100), sas15) <= 0.08


# -- KS ---------------------------------------------------------------------

def test_ks_p_value_examples():
    assert ks_p_value(0.0, 10.0) == 1.0
    t = 1.0
    n_e = math.sqrt(500)
    expected = 2 * (math.exp(-2) - math.exp(-8) + math.exp(-18) - math.exp(-32))
    assert ks_p_value(d_for_t(t, n_e), n_e) == pytest.approx(expected, abs=1e-12)
    assert ks_p_value(d_for_t(t, n_e), n_e) == pytest.approx(0.2700, abs=5e-5)


def test_ks_p_value_matches_series_oracle():
    n_e = math.sqrt(1000 * 1000 / 2000)
    for t in np.linspace(0.3, 5.0, 48):
        assert abs(ks_p_value(d_for_t(t, n_e), n_e) - ks_series_oracle(t)) <= 1e-10


def test_ks_p_value_monotone_and_bounded():
    n_e = 22.36
    ds = np.linspace(0, 1, 2001)
    ps = [ks_p_value(d, n_e) for d in ds]
    assert all(0.0 <= p <= 1.0 for p in ps)
    assert all(b <= a for a, b in zip(ps, ps[1:]))


def test_ks_p_value_small_t_is_one():
    assert ks_p_value(d_for_t(0.19, 30.0), 30.0) == 1.0


def test_ks_identical_samples():
    x = np.random.default_rng(3).normal(size=500)
    r = ks_from_samples(x, x.copy())
    assert r.score == 0.0 and r.p_value == 1.0


def test_ks_score_matches_scipy():
    from scipy import stats
    rng = np.random.default_rng(4)
    a, b = rng.normal(size=300), rng.standard_t(2, size=450)
    assert ks_from_samples(a, b).score == pytest.approx(stats.ks_2samp(a, b).statistic, abs=1e-15)


@pytest.mark.slow
def test_ks_null_property():
    spec = DistSpec(SAS, 1.5, 2.0)
    passes = 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        x = dist.sample(spec, 1000, rng)
        r = ks_two_sample(x, spec, 1000, rng)
        assert 0 <= r.score <= 1 and 0 <= r.p_value <= 1
        passes += r.p_value > 0.05
    assert passes >= 180


def test_ks_defaults_to_m_equal_n():
    x = np.random.default_rng(5).normal(size=123)
    r = ks_two_sample(x, DistSpec(GG, 2.0, 1.0), rng=np.random.default_rng(0))
    assert r.n_effective == pytest.approx(math.sqrt(123 / 2))


# -- Q-Q --------------------------------------------------------------------

def test_qq_identity_for_own_draw():
    spec = DistSpec(T, 2.0, 1.0)
    x = dist.sample(spec, 400, np.random.default_rng(7))
    qq = qq_points(x, spec, 400, np.random.default_rng(7))
    assert np.array_equal(qq[:, 0], qq[:, 1])


def test_qq_sorted():
    qq = qq_points(np.random.default_rng(8).normal(size=300), DistSpec(SAS, 1.2, 1.0), 300,
                   np.random.default_rng(9))
    assert np.all(np.diff(qq[:, 0]) >= 0) and np.all(np.diff(qq[:, 1]) >= 0)


def test_qq_cauchy_within_envelope():
    spec = DistSpec(SAS, 1.0, 1.0)
    n = 1000
    x = dist.sample(spec, n, np.random.default_rng(10))
    qq = qq_points(x, spec, n, np.random.default_rng(11))
    ref = np.sort([dist.sample(spec, n, np.random.default_rng(100 + i)) for i in range(100)], axis=1)
    lo, hi = ref.min(axis=0), ref.max(axis=0)
    mid = slice(n // 20, n - n // 20)
    inside = (qq[mid, 0] >= lo[mid]) & (qq[mid, 0] <= hi[mid])
    assert inside.mean() >= 0.95
