"""Trans-distributional RJMCMC selection among SaS, generalized Gaussian
and Student's t models for 1-D impulsive data."""

from .distributions import (
    DistSpec,
    FamilyId,
    MomentUndefinedError,
    cdf,
    flom_constant,
    flom_value,
    log_likelihood,
    log_pdf,
    sample,
)
from .estimator import TransDistributionalRJMCMC
from .sampler import FitReport, SamplerConfig, run_chain, summarize

__all__ = [
    "DistSpec",
    "FamilyId",
    "MomentUndefinedError",
    "cdf",
    "flom_constant",
    "flom_value",
    "log_likelihood",
    "log_pdf",
    "sample",
    "TransDistributionalRJMCMC",
    "FitReport",
    "SamplerConfig",
    "run_chain",
    "summarize",
]

__version__ = "0.1.0"
