import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from transdist import distributions as dist
from transdist.distributions import DistSpec, FamilyId
from transdist.estimator import TransDistributionalRJMCMC, aggregate_reports, chain_seed
from transdist.sampler import FitReport

SAS, GG, T = FamilyId.SAS, FamilyId.GG, FamilyId.T


@pytest.fixture(scope="module")
def x():
    return dist.sample(DistSpec(GG, 1.0, 1.0), 300, np.random.default_rng(0))


@pytest.fixture(scope="module")
def fitted(x):
    return TransDistributionalRJMCMC(n_chains=2, n_iter=400, random_state=3).fit(x)


def test_params_and_clone():
    est = TransDistributionalRJMCMC(n_chains=5, xi_scale=0.02)
    params = est.get_params()
    assert params["n_chains"] == 5 and params["xi_scale"] == 0.02 and params["burn_in"] is None
    other = clone(est).set_params(n_iter=100)
    assert other.n_iter == 100 and est.n_iter == 5000


def test_fitted_attributes(fitted, x):
    assert fitted.family_ in FamilyId
    assert fitted.spec_ == DistSpec(fitted.family_, fitted.alpha_, fitted.gamma_)
    assert len(fitted.chain_reports_) == 2 and len(fitted.traces_) == 2
    assert fitted.config_.burn_in == 200
    scores = fitted.score_samples(x)
    assert scores.shape == x.shape
    assert fitted.score(x) == pytest.approx(scores.sum())
    assert fitted.sample(7, random_state=1).shape == (7,)
    agg = fitted.report_
    assert sum(agg["votes"].values()) == 2
    assert set(agg["diagnostics"]) == {"kl", "ks_score", "ks_p_value", "ks_n_effective"}


def test_accepts_column_vector(x):
    est = TransDistributionalRJMCMC(n_chains=1, n_iter=50, random_state=0)
    a = est.fit(x.reshape(-1, 1)).report_
    b = clone(est).fit(x).report_
    assert a == b


def test_rejects_bad_input():
    est = TransDistributionalRJMCMC(n_chains=1, n_iter=50)
    with pytest.raises(ValueError):
        est.fit(np.ones((10, 2)))
    with pytest.raises(ValueError):
        est.fit(np.array([1.0, np.nan, 2.0]))


def test_not_fitted():
    with pytest.raises(NotFittedError):
        TransDistributionalRJMCMC().score_samples([1.0])


def test_invalid_config_raises(x):
    with pytest.raises(ValueError):
        TransDistributionalRJMCMC(n_chains=1, n_iter=10, p_life=0.9).fit(x)


def test_parallel_matches_serial(x):
    serial = TransDistributionalRJMCMC(n_chains=3, n_iter=150, random_state=9).fit(x)
    parallel = clone(serial).set_params(n_jobs=2).fit(x)
    assert serial.manifest() == parallel.manifest()


def test_chain_seeds_distinct():
    states = {tuple(chain_seed(7, i).generate_state(2)) for i in range(50)}
    assert len(states) == 50


def _report(fam, freqs, a, g):
    return FitReport(fam, freqs, a, g, (a, a), (g, g), 10)


def test_aggregate_plurality_and_conditional_means():
    reps = [_report(T, (0.2, 0.1, 0.7), 1.0, 0.8), _report(T, (0.1, 0.1, 0.8), 1.2, 0.7),
            _report(SAS, (0.6, 0.0, 0.4), 1.0, 0.75)]
    agg = aggregate_reports(reps)
    assert agg["family"] == "t" and agg["n_agreeing"] == 2
    assert agg["alpha_hat"] == pytest.approx(1.1) and agg["gamma_hat"] == pytest.approx(0.75)
    assert agg["votes"] == {"sas": 1, "gg": 0, "t": 2}


def test_aggregate_tie_breaks():
    reps = [_report(T, (0.4, 0.0, 0.6), 1.0, 1.0), _report(SAS, (0.9, 0.0, 0.1), 1.0, 1.0)]
    assert aggregate_reports(reps)["family"] == "sas"
    reps = [_report(T, (0.5, 0.0, 0.5), 1.0, 1.0), _report(SAS, (0.5, 0.0, 0.5), 1.0, 1.0)]
    assert aggregate_reports(reps)["family"] == "sas"
