import math

import numpy as np
import pytest
from scipy import special as sc

from transdist.special import gamma, gamma_sign, log_gamma, signed_log_gamma


@pytest.mark.parametrize("x", [0.5, 1.0, 1.5, 2.0, 3.7, 10.0, 57.3, 171.2])
def test_positive_axis_matches_reference(x):
    assert log_gamma(x) == pytest.approx(sc.gammaln(x), rel=1e-13, abs=1e-14)


def test_dense_grid_relative_accuracy():
    xs = np.concatenate([np.geomspace(1e-8, 500, 4000), -np.geomspace(1e-8, 30, 4000)])
    xs = xs[xs != np.round(xs)]
    ours = np.array([log_gamma(float(x)) for x in xs])
    ref = sc.gammaln(xs)
    rel = np.abs(ours - ref) / np.maximum(1.0, np.abs(ref))
    assert rel.max() < 1e-12


def test_vector_and_scalar_paths_agree():
    xs = np.linspace(-7.3, 12.1, 301)
    assert np.allclose(log_gamma(xs), [log_gamma(float(x)) for x in xs], rtol=1e-14, atol=0)


@pytest.mark.parametrize("x", [-0.1, -0.5, -1.5, -2.5, -3.3, -0.04])
def test_sign_on_negative_axis(x):
    assert gamma_sign(x) == sc.gammasgn(x)
    s, lg = signed_log_gamma(x)
    assert s * math.exp(lg) == pytest.approx(sc.gamma(x), rel=1e-12)


def test_half_integer_values():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, -2.0, float("inf"), float("nan")])
def test_poles_and_non_finite_raise(x):
    with pytest.raises(ValueError):
        log_gamma(x)
