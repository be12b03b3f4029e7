"""Scikit-learn style front end running several independent chains."""

import math
from collections import Counter

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, DensityMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import distributions as dist
from .diagnostics import fit_diagnostics
from .distributions import DistSpec, FamilyId
from .sampler import SamplerConfig, run_chain, summarize

__all__ = ["TransDistributionalRJMCMC", "chain_seed", "run_chains", "aggregate_reports"]

# spawn-key namespaces for the derived random streams
_CHAIN_STREAM = 0
_AGGREGATE_STREAM = 1
_CHAIN_DIAG_STREAM = 2


def chain_seed(seed, index, stream=_CHAIN_STREAM):
    """Seed sequence for chain ``index``; independent of worker scheduling."""
    return np.random.SeedSequence(seed, spawn_key=(stream, index))


def _one_chain(data, cfg, seed, index, bins):
    trace = run_chain(data, cfg, np.random.default_rng(chain_seed(seed, index)))
    diag_rng = np.random.default_rng(chain_seed(seed, index, _CHAIN_DIAG_STREAM))
    report = summarize(trace, cfg, data=data, rng=diag_rng, bins=bins)
    return trace, report


def run_chains(data, cfg, n_chains, seed, n_jobs=1, bins=100):
    """Run ``n_chains`` chains; results are ordered by chain index."""
    data = np.asarray(data, dtype=float).ravel()
    jobs = (delayed(_one_chain)(data, cfg, seed, i, bins) for i in range(n_chains))
    if n_jobs == 1:
        results = [job[0](*job[1], **job[2]) for job in jobs]
    else:
        results = Parallel(n_jobs=n_jobs)(jobs)
    traces = [r[0] for r in results]
    reports = [r[1] for r in results]
    return traces, reports


def aggregate_reports(reports):
    """Plurality vote on the modal family, then average over agreeing chains.

    Ties in the vote go to the family with the larger summed posterior
    frequency, then to the lower family code.
    """
    if not reports:
        raise ValueError("no chain reports to aggregate")
    votes = Counter(int(r.modal_family) for r in reports)
    freq_sum = np.sum([r.family_frequencies for r in reports], axis=0)
    winner = max(FamilyId, key=lambda f: (votes.get(int(f), 0), freq_sum[int(f) - 1], -int(f)))
    agree = [r for r in reports if r.modal_family is winner]
    alphas = np.array([r.alpha_hat for r in agree])
    gammas = np.array([r.gamma_hat for r in agree])
    return {
        "family": winner.label,
        "family_code": int(winner),
        "votes": {f.label: votes.get(int(f), 0) for f in FamilyId},
        "n_chains": len(reports),
        "n_agreeing": len(agree),
        "alpha_hat": float(alphas.mean()),
        "gamma_hat": float(gammas.mean()),
        "alpha_spread": float(alphas.std()),
        "gamma_spread": float(gammas.std()),
        "mean_family_frequencies": {f.label: float(freq_sum[int(f) - 1] / len(reports))
                                    for f in FamilyId},
        "reconciliation": "plurality vote over chain modal families; "
                          "alpha and gamma averaged over the chains in the winning family",
    }


def _as_vector(X):
    arr = check_array(X, ensure_2d=False, dtype=np.float64)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected a single feature, got shape {arr.shape}")
        arr = arr[:, 0]
    return arr


class TransDistributionalRJMCMC(DensityMixin, BaseEstimator):
    """Select among SaS, generalized Gaussian and Student's t by RJMCMC.

    Parameters
    ----------
    n_chains : int, default=40
        Independent chains; the reported family is their plurality vote.
    n_iter, burn_in : int
        Iterations per chain and how many to discard (``None`` means half).
    p_life, p_intra, p_inter : float
        Move-type probabilities.
    a, b : float
        Inverse-gamma prior on the scale.
    xi_scale : float
        Variance of the scale random walk.
    laplace_scale, grid_step : float
        Shape-proposal spread and grid spacing.
    alpha_max_sas, alpha_max_gg, alpha_max_t : float
        Upper ends of the shape grids.
    flom_divisor, flom_safety : float
        Moment order ``max(alpha, alpha') / flom_divisor``, capped at
        ``flom_safety * alpha`` where the moment needs it.
    hist_bins : int, default=100
        Bins of the histogram used for the KL score.
    n_jobs : int, default=1
        Chains run in parallel through joblib; output does not depend on it.
    random_state : int or None
        Base seed; chain ``i`` uses a seed derived from ``(random_state, i)``.

    Attributes
    ----------
    family_, alpha_, gamma_ : fitted family and parameters
    spec_ : DistSpec
    chain_reports_ : list of FitReport
    traces_ : list of ChainTrace
    report_ : dict
        Aggregate summary with diagnostics for ``spec_``.
    """

    def __init__(self, n_chains=40, n_iter=5000, burn_in=None, p_life=0.4, p_intra=0.3,
                 p_inter=0.3, a=1.0, b=1.0, xi_scale=0.01, laplace_scale=0.4, grid_step=0.05,
                 alpha_max_sas=2.0, alpha_max_gg=2.0, alpha_max_t=5.0, flom_divisor=10.0,
                 flom_safety=0.45, hist_bins=100, n_jobs=1, random_state=0):
        self.n_chains = n_chains
        self.n_iter = n_iter
        self.burn_in = burn_in
        self.p_life = p_life
        self.p_intra = p_intra
        self.p_inter = p_inter
        self.a = a
        self.b = b
        self.xi_scale = xi_scale
        self.laplace_scale = laplace_scale
        self.grid_step = grid_step
        self.alpha_max_sas = alpha_max_sas
        self.alpha_max_gg = alpha_max_gg
        self.alpha_max_t = alpha_max_t
        self.flom_divisor = flom_divisor
        self.flom_safety = flom_safety
        self.hist_bins = hist_bins
        self.n_jobs = n_jobs
        self.random_state = random_state

    def _config(self, seed):
        burn = self.n_iter // 2 if self.burn_in is None else self.burn_in
        return SamplerConfig(
            p_life=self.p_life, p_intra=self.p_intra, p_inter=self.p_inter,
            a=self.a, b=self.b, xi_scale=self.xi_scale,
            laplace_scale=self.laplace_scale, grid_step=self.grid_step,
            alpha_max_sas=self.alpha_max_sas, alpha_max_gg=self.alpha_max_gg,
            alpha_max_t=self.alpha_max_t, n_iter=self.n_iter, burn_in=burn,
            flom_divisor=self.flom_divisor, flom_safety=self.flom_safety, seed=seed,
        )

    def fit(self, X, y=None):
        x = _as_vector(X)
        if self.random_state is None:
            seed = int(np.random.SeedSequence().entropy % (2 ** 63))
        else:
            seed = int(self.random_state)
        if int(self.n_chains) < 1:
            raise ValueError("n_chains must be at least 1")
        cfg = self._config(seed)
        self.config_ = cfg
        self.seed_ = seed
        self.traces_, self.chain_reports_ = run_chains(
            x, cfg, int(self.n_chains), seed, n_jobs=self.n_jobs, bins=self.hist_bins)
        agg = aggregate_reports(self.chain_reports_)
        self.family_ = FamilyId(agg["family_code"])
        self.alpha_ = agg["alpha_hat"]
        self.gamma_ = agg["gamma_hat"]
        self.spec_ = DistSpec(self.family_, self.alpha_, self.gamma_)
        diag_rng = np.random.default_rng(chain_seed(seed, 0, _AGGREGATE_STREAM))
        agg["diagnostics"] = fit_diagnostics(x, self.spec_, diag_rng, bins=self.hist_bins)
        self.report_ = agg
        return self

    def score_samples(self, X):
        """Log-density of each sample under the fitted member."""
        check_is_fitted(self, "spec_")
        return dist.log_pdf(self.spec_, _as_vector(X))

    def score(self, X, y=None):
        """Total log-likelihood of ``X``."""
        return float(np.sum(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=None):
        check_is_fitted(self, "spec_")
        return dist.sample(self.spec_, n_samples, np.random.default_rng(random_state))

    def manifest(self, input_path=None):
        """Run record: config, seed, per-chain reports and the aggregate."""
        check_is_fitted(self, "report_")
        chains = []
        for i, r in enumerate(self.chain_reports_):
            d = r.to_dict()
            d["chain"] = i
            chains.append(d)
        return {
            "input": None if input_path is None else str(input_path),
            "config": self.config_.to_dict(),
            "n_chains": len(self.chain_reports_),
            "seed": self.seed_,
            "seed_derivation": "numpy SeedSequence(seed, spawn_key=(0, chain))",
            "chains": chains,
            "aggregate": self.report_,
        }
