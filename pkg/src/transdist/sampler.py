"""Trans-distributional reversible-jump sampler over (family, shape, scale).

The chain state is ``(k, alpha, gamma)`` with ``alpha`` on a per-family grid
``{step, 2 step, ..., alpha_max(k)}``.  Three moves are mixed:

life
    random-walk update of ``gamma`` from a truncated normal on
    ``(0, gamma + 1]``;
intra
    new ``alpha`` from a discretized Laplace on the grid, ``gamma`` carried
    over by matching the absolute fractional moment ``E|x|**p``;
inter
    new family, ``alpha`` through a fixed invertible shape map anchored on
    the shared Gaussian/Cauchy members, ``gamma`` again by moment matching.

Switch moves are deterministic given ``alpha'`` and invertible, so their
acceptance ratio carries the Jacobian of the scale map.
"""

import functools
import math
from dataclasses import asdict, dataclass, field, fields
from typing import NamedTuple, Optional

import numpy as np
from scipy import special as sc

from .distributions import (
    DistSpec,
    FamilyId,
    MomentUndefinedError,
    _log_pdf_array,
    _scale_exponent,
    log_flom_constant,
)
from .special import log_gamma

__all__ = [
    "ConfigError",
    "DegenerateDataError",
    "InvalidMove",
    "SamplerConfig",
    "ModelState",
    "MoveRecord",
    "ChainTrace",
    "FitReport",
    "prior_log_density_gamma",
    "make_state",
    "life_log_ratio",
    "propose_life",
    "propose_alpha_discrete_laplace",
    "flom_order",
    "map_scale_intra",
    "shape_map",
    "shape_map_log_derivative",
    "map_shape_inter",
    "map_scale_inter",
    "accept",
    "step_life",
    "step_intra",
    "step_inter",
    "initial_state",
    "run_chain",
    "summarize",
]

LIFE, INTRA, INTER = 0, 1, 2
MOVE_NAMES = ("life", "intra", "inter")
_TRUNC_NORMAL_ATTEMPTS = 10_000
_GRID_DECIMALS = 12


class ConfigError(ValueError):
    pass


class DegenerateDataError(ValueError):
    pass


class InvalidMove(Exception):
    """Proposal left the support or hit an undefined moment; reject."""


@dataclass(frozen=True)
class SamplerConfig:
    p_life: float = 0.4
    p_intra: float = 0.3
    p_inter: float = 0.3
    a: float = 1.0
    b: float = 1.0
    xi_scale: float = 0.01          # variance of the life-move normal
    laplace_scale: float = 0.4
    grid_step: float = 0.05
    alpha_max_sas: float = 2.0
    alpha_max_gg: float = 2.0
    alpha_max_t: float = 5.0
    n_iter: int = 5000
    burn_in: int = 2500
    flom_divisor: float = 10.0
    flom_safety: float = 0.45
    seed: int = 0

    def __post_init__(self):
        probs = (self.p_life, self.p_intra, self.p_inter)
        if any(not math.isfinite(p) or p < 0 for p in probs):
            raise ConfigError("move probabilities must be non-negative")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ConfigError(f"move probabilities must sum to 1, got {sum(probs)}")
        for name in ("a", "b", "xi_scale", "laplace_scale", "grid_step", "flom_divisor"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ConfigError(f"{name} must be positive, got {val}")
        if not (0 < self.flom_safety < 1):
            raise ConfigError("flom_safety must lie in (0, 1)")
        if not (0 < self.alpha_max_sas <= 2):
            raise ConfigError("alpha_max_sas must lie in (0, 2]")
        for fam in FamilyId:
            if self.grid_size(fam) < 1:
                raise ConfigError(f"alpha grid for {fam.label} is empty")
        if int(self.n_iter) != self.n_iter or self.n_iter < 1:
            raise ConfigError("n_iter must be a positive integer")
        if int(self.burn_in) != self.burn_in or not (0 <= self.burn_in < self.n_iter):
            raise ConfigError("burn_in must be an integer in [0, n_iter)")

    @classmethod
    def from_dict(cls, values):
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self):
        return asdict(self)

    def alpha_max(self, family):
        fam = FamilyId.parse(family)
        return {FamilyId.SAS: self.alpha_max_sas, FamilyId.GG: self.alpha_max_gg,
                FamilyId.T: self.alpha_max_t}[fam]

    def grid_size(self, family):
        return int(math.floor(self.alpha_max(family) / self.grid_step + 1e-9))

    def grid_value(self, index):
        return round(index * self.grid_step, _GRID_DECIMALS)

    def grid_index(self, alpha):
        return int(round(alpha / self.grid_step))

    def grid(self, family):
        return np.array([self.grid_value(i) for i in range(1, self.grid_size(family) + 1)])

    def in_support(self, alpha, family):
        i = self.grid_index(alpha)
        return 1 <= i <= self.grid_size(family) and self.grid_value(i) == alpha


class ModelState(NamedTuple):
    spec: DistSpec
    cached_log_likelihood: float
    cached_log_prior_gamma: float

    @property
    def family(self):
        return self.spec.family

    @property
    def alpha(self):
        return self.spec.alpha

    @property
    def gamma(self):
        return self.spec.gamma


class MoveRecord(NamedTuple):
    kind: int
    accepted: bool
    log_ratio: float
    proposal: Optional[DistSpec] = None
    flom_order: float = math.nan


class _Data:
    """Data with ``log|x|`` precomputed for the stable-table lookup."""

    def __init__(self, x, prior_only=False):
        self.x = np.ascontiguousarray(np.asarray(x, dtype=float).ravel())
        with np.errstate(divide="ignore"):
            self.log_abs = np.log(np.abs(self.x))
        self.prior_only = prior_only

    def log_likelihood(self, spec):
        if self.prior_only:
            return 0.0
        return float(np.sum(_log_pdf_array(spec, self.x, self.log_abs)))


def _prepare(data):
    return data if isinstance(data, _Data) else _Data(data)


def prior_log_density_gamma(gamma, a, b):
    """Inverse-gamma log-density (shape ``a``, scale ``b``) at ``gamma``."""
    if not (gamma > 0 and a > 0 and b > 0):
        raise ValueError("inverse-gamma prior needs gamma, a, b > 0")
    return a * math.log(b) - log_gamma(a) - (a + 1.0) * math.log(gamma) - b / gamma


def _log_alpha_prior(family, cfg):
    # uniform over the family's grid
    return -math.log(cfg.grid_size(family))


def make_state(spec, data, cfg):
    data = _prepare(data)
    return ModelState(spec, data.log_likelihood(spec),
                      prior_log_density_gamma(spec.gamma, cfg.a, cfg.b))


def check_state(state, data, cfg, tol=1e-9):
    """Assert the cached terms match a fresh evaluation and alpha is on grid."""
    fresh = make_state(state.spec, data, cfg)
    if abs(fresh.cached_log_likelihood - state.cached_log_likelihood) > tol * max(1.0, abs(fresh.cached_log_likelihood)):
        raise AssertionError("stale cached log-likelihood")
    if abs(fresh.cached_log_prior_gamma - state.cached_log_prior_gamma) > tol:
        raise AssertionError("stale cached log-prior")
    if not cfg.in_support(state.alpha, state.family):
        raise AssertionError(f"alpha {state.alpha} is off the grid")


def accept(log_ratio, rng):
    """Metropolis decision: accept with probability ``min(1, exp(log_ratio))``."""
    if log_ratio >= 0:
        return True
    if not log_ratio > -math.inf:
        return False
    return rng.random() < math.exp(log_ratio)


# -- life move --------------------------------------------------------------

def _log_trunc_mass(mean, sd):
    # log P(0 < N(mean, sd^2) <= mean + 1)
    return math.log(sc.ndtr(1.0 / sd) - sc.ndtr(-mean / sd))


def life_log_ratio(state, candidate, cfg):
    g, gp = state.gamma, candidate.gamma
    if g > gp + 1.0:
        # reverse proposal cannot reach gamma
        return -math.inf
    sd = math.sqrt(cfg.xi_scale)
    return (candidate.cached_log_likelihood - state.cached_log_likelihood
            + candidate.cached_log_prior_gamma - state.cached_log_prior_gamma
            + _log_trunc_mass(g, sd) - _log_trunc_mass(gp, sd))


def propose_life(state, data, cfg, rng):
    """Draw gamma' from N(gamma, xi_scale) truncated to (0, gamma + 1]."""
    g = state.gamma
    sd = math.sqrt(cfg.xi_scale)
    for _ in range(_TRUNC_NORMAL_ATTEMPTS):
        gp = rng.normal(g, sd)
        if 0.0 < gp <= g + 1.0:
            break
    else:
        raise InvalidMove("truncated-normal rejection cap reached")
    spec = DistSpec(state.family, state.alpha, gp)
    cand = make_state(spec, data, cfg)
    return cand, life_log_ratio(state, cand, cfg)


# -- FLOM matching ----------------------------------------------------------

def propose_alpha_discrete_laplace(alpha, family, cfg, rng):
    """Grid neighbour at distance ``j*step`` with P ∝ exp(-|j| step / scale), j != 0.

    The lattice is unbounded; callers reject draws outside the family's
    support so the proposal stays symmetric.
    """
    ratio = math.exp(-cfg.grid_step / cfg.laplace_scale)
    jump = int(rng.geometric(1.0 - ratio))
    if rng.random() < 0.5:
        jump = -jump
    return cfg.grid_value(cfg.grid_index(alpha) + jump)


def flom_order(alpha, alpha_p, family, family_p, cfg):
    """Moment order shared by a switch move and its reverse.

    ``max(alpha, alpha') / flom_divisor``, reduced to
    ``flom_safety * min(...)`` over the sides whose moments need p < alpha.
    """
    p = max(alpha, alpha_p) / cfg.flom_divisor
    limited = [a for a, f in ((alpha, family), (alpha_p, family_p))
               if FamilyId.parse(f) in (FamilyId.SAS, FamilyId.T)]
    if limited:
        cap = cfg.flom_safety * min(limited)
        if p >= cap:
            p = cap
    return p


def _flom_match(family, alpha, family_p, alpha_p, gamma, p):
    """gamma' with equal E|x|^p, and log d(gamma')/d(gamma)."""
    family = FamilyId.parse(family)
    family_p = FamilyId.parse(family_p)
    try:
        lc = log_flom_constant(family, p, alpha) - log_flom_constant(family_p, p, alpha_p)
    except MomentUndefinedError as exc:
        raise InvalidMove(str(exc)) from exc
    e, e_p = _scale_exponent(family, p, alpha), _scale_exponent(family_p, p, alpha_p)
    log_g = math.log(gamma)
    log_gp = (lc + e * log_g) / e_p
    if not math.isfinite(log_gp) or abs(log_gp) > 700:
        raise InvalidMove("scale map overflow")
    log_jac = math.log(e / e_p) + log_gp - log_g
    return math.exp(log_gp), log_jac


def map_scale_intra(family, alpha, alpha_p, gamma, p):
    """Within-family scale map g(.) and log|d gamma'/d gamma|."""
    return _flom_match(family, alpha, family, alpha_p, gamma, p)


# -- inter-family shape maps ------------------------------------------------

def _f1(a):
    return 0.5 * a * a


def _f1_inv(a):
    return math.sqrt(2.0 * a)


def _f2(a):
    # logit((a + 2) / 4), natural log
    u = (a + 2.0) / 4.0
    if not (0.0 < u < 1.0):
        raise InvalidMove("shape map singular at the Gaussian anchor")
    return math.log(u / (1.0 - u))


def _f2_inv(a):
    return 4.0 / (1.0 + math.exp(-a)) - 2.0


_S, _G, _T = FamilyId.SAS, FamilyId.GG, FamilyId.T
_SHAPE_MAPS = {
    (_S, _G): _f1,
    (_S, _T): _f2,
    (_G, _S): _f1_inv,
    (_T, _S): _f2_inv,
    (_G, _T): lambda a: _f2(_f1_inv(a)),
    (_T, _G): lambda a: _f1(_f2_inv(a)),
}


def _d_f1(a):
    return a


def _d_f1_inv(a):
    return 1.0 / math.sqrt(2.0 * a)


def _d_f2(a):
    return 4.0 / (4.0 - a * a)


def _d_f2_inv(a):
    s = 1.0 / (1.0 + math.exp(-a))
    return 4.0 * s * (1.0 - s)


_SHAPE_DERIVS = {
    (_S, _G): _d_f1,
    (_S, _T): _d_f2,
    (_G, _S): _d_f1_inv,
    (_T, _S): _d_f2_inv,
    (_G, _T): lambda a: _d_f2(_f1_inv(a)) * _d_f1_inv(a),
    (_T, _G): lambda a: _d_f1(_f2_inv(a)) * _d_f2_inv(a),
}


def _pair(family, family_p):
    key = (FamilyId.parse(family), FamilyId.parse(family_p))
    if key[0] is key[1]:
        raise ValueError("inter-family map needs two distinct families")
    return key


def shape_map(alpha, family, family_p):
    """Unsnapped shape map psi(alpha, k, k')."""
    return _SHAPE_MAPS[_pair(family, family_p)](alpha)


def shape_map_log_derivative(alpha, family, family_p):
    return math.log(abs(_SHAPE_DERIVS[_pair(family, family_p)](alpha)))


@functools.lru_cache(maxsize=4096)
def _snapped_shape(alpha, family, family_p, cfg):
    raw = shape_map(alpha, family, family_p)
    if not (math.isfinite(raw) and raw > 0):
        raise InvalidMove("shape map left the positive axis")
    alpha_p = cfg.grid_value(cfg.grid_index(raw))
    if not cfg.in_support(alpha_p, family_p):
        raise InvalidMove(f"snapped shape {alpha_p} outside support")
    back = shape_map(alpha_p, family_p, family)
    if not (math.isfinite(back) and back > 0) or cfg.grid_value(cfg.grid_index(back)) != alpha:
        raise InvalidMove("grid pairing is not one-to-one here")
    return alpha_p


def map_shape_inter(alpha, family, family_p, cfg=None):
    """psi snapped to the destination grid.

    Raises InvalidMove when the image is singular, leaves the support, or
    does not snap back to ``alpha`` under the reverse map (which keeps the
    pairing between grids one-to-one).
    """
    cfg = cfg or SamplerConfig()
    return _snapped_shape(float(alpha), FamilyId.parse(family), FamilyId.parse(family_p), cfg)


def map_scale_inter(alpha, alpha_p, gamma, p, family, family_p):
    """Between-family scale map w(.) and the full log-Jacobian.

    The Jacobian is ``log|d gamma'/d gamma| + log|d psi/d alpha|`` with the
    shape derivative taken analytically at ``alpha`` before snapping.
    """
    gamma_p, log_dg = _flom_match(family, alpha, family_p, alpha_p, gamma, p)
    return gamma_p, log_dg + shape_map_log_derivative(alpha, family, family_p)


# -- steps ------------------------------------------------------------------

def _reject(kind, proposal=None, p=math.nan):
    return MoveRecord(kind, False, -math.inf, proposal, p)


def step_life(state, data, cfg, rng):
    try:
        cand, lr = propose_life(state, data, cfg, rng)
    except InvalidMove:
        return state, _reject(LIFE)
    ok = accept(lr, rng)
    return (cand if ok else state), MoveRecord(LIFE, ok, lr, cand.spec)


def intra_log_ratio(state, candidate, log_jacobian):
    return (candidate.cached_log_likelihood - state.cached_log_likelihood
            + candidate.cached_log_prior_gamma - state.cached_log_prior_gamma + log_jacobian)


def step_intra(state, data, cfg, rng):
    fam = state.family
    alpha_p = propose_alpha_discrete_laplace(state.alpha, fam, cfg, rng)
    if not cfg.in_support(alpha_p, fam):
        return state, _reject(INTRA)
    p = flom_order(state.alpha, alpha_p, fam, fam, cfg)
    try:
        gamma_p, log_j = map_scale_intra(fam, state.alpha, alpha_p, state.gamma, p)
    except InvalidMove:
        return state, _reject(INTRA, p=p)
    cand = make_state(DistSpec(fam, alpha_p, gamma_p), data, cfg)
    lr = intra_log_ratio(state, cand, log_j)
    ok = accept(lr, rng)
    return (cand if ok else state), MoveRecord(INTRA, ok, lr, cand.spec, p)


def inter_log_ratio(state, candidate, log_dgamma, cfg):
    return (candidate.cached_log_likelihood - state.cached_log_likelihood
            + candidate.cached_log_prior_gamma - state.cached_log_prior_gamma
            + _log_alpha_prior(candidate.family, cfg) - _log_alpha_prior(state.family, cfg)
            + log_dgamma)


def propose_inter(state, family_p, data, cfg):
    """Deterministic inter-family proposal; returns (candidate, log_ratio, p)."""
    alpha_p = map_shape_inter(state.alpha, state.family, family_p, cfg)
    p = flom_order(state.alpha, alpha_p, state.family, family_p, cfg)
    gamma_p, log_dg = _flom_match(state.family, state.alpha, family_p, alpha_p, state.gamma, p)
    cand = make_state(DistSpec(family_p, alpha_p, gamma_p), data, cfg)
    return cand, inter_log_ratio(state, cand, log_dg, cfg), p


def step_inter(state, data, cfg, rng):
    others = [f for f in FamilyId if f is not state.family]
    family_p = others[int(rng.integers(2))]
    try:
        cand, lr, p = propose_inter(state, family_p, data, cfg)
    except InvalidMove:
        return state, _reject(INTER)
    ok = accept(lr, rng)
    return (cand if ok else state), MoveRecord(INTER, ok, lr, cand.spec, p)


_STEPS = (step_life, step_intra, step_inter)


# -- chain ------------------------------------------------------------------

@dataclass
class ChainTrace:
    """Per-iteration record; row i is the state after move i."""

    initial: DistSpec
    family: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray
    move: np.ndarray
    accepted: np.ndarray
    log_ratio: np.ndarray
    proposed_family: np.ndarray
    proposed_alpha: np.ndarray
    proposed_gamma: np.ndarray
    flom_order: np.ndarray

    def __len__(self):
        return len(self.family)

    @property
    def iteration(self):
        return np.arange(1, len(self) + 1)

    def states(self):
        return list(zip(self.iteration.tolist(), self.family.tolist(),
                        self.alpha.tolist(), self.gamma.tolist()))

    def to_rows(self):
        """(iter, k, alpha, gamma, move, accepted) rows for text output."""
        return [(i, int(k), float(a), float(g), MOVE_NAMES[m], int(acc))
                for i, k, a, g, m, acc in zip(self.iteration, self.family, self.alpha,
                                              self.gamma, self.move, self.accepted)]


def initial_state(data, cfg):
    x = np.asarray(data.x if isinstance(data, _Data) else data, dtype=float)
    q1, q3 = np.percentile(x, [25, 75])
    iqr = float(q3 - q1)
    if not iqr > 0:
        raise DegenerateDataError("interquartile range of the data is zero")
    alpha0 = min(2.0, cfg.grid_value(cfg.grid_size(FamilyId.GG)))
    return DistSpec(FamilyId.GG, alpha0, 0.5 * iqr)


def run_chain(data, cfg, rng=None, *, init=None, prior_only=False, debug=False):
    """Run ``cfg.n_iter`` iterations from ``init`` (default (GG, 2, IQR/2)).

    ``prior_only`` replaces the likelihood by a constant, leaving the chain
    to sample the prior; ``debug`` re-checks the cached state every step.
    """
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise ValueError("data must be non-empty and finite")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    prepared = _Data(x, prior_only=prior_only)
    default = initial_state(prepared, cfg)
    if init is None:
        init = default
    elif not cfg.in_support(init.alpha, init.family):
        raise ValueError(f"initial alpha {init.alpha} is not on the {init.family.label} grid")
    state = make_state(init, prepared, cfg)

    n = int(cfg.n_iter)
    fam = np.empty(n, dtype=np.int8)
    alpha = np.empty(n)
    gamma = np.empty(n)
    move = np.empty(n, dtype=np.int8)
    accepted = np.empty(n, dtype=bool)
    log_ratio = np.empty(n)
    p_fam = np.zeros(n, dtype=np.int8)
    p_alpha = np.full(n, np.nan)
    p_gamma = np.full(n, np.nan)
    p_order = np.full(n, np.nan)
    cum = np.cumsum([cfg.p_life, cfg.p_intra, cfg.p_inter])

    for i in range(n):
        kind = int(np.searchsorted(cum, rng.random(), side="right"))
        kind = min(kind, 2)
        state, rec = _STEPS[kind](state, prepared, cfg, rng)
        if debug:
            check_state(state, prepared, cfg)
        spec = state.spec
        fam[i] = int(spec.family)
        alpha[i] = spec.alpha
        gamma[i] = spec.gamma
        move[i] = kind
        accepted[i] = rec.accepted
        log_ratio[i] = rec.log_ratio
        if rec.proposal is not None:
            p_fam[i] = int(rec.proposal.family)
            p_alpha[i] = rec.proposal.alpha
            p_gamma[i] = rec.proposal.gamma
        p_order[i] = rec.flom_order

    return ChainTrace(init, fam, alpha, gamma, move, accepted, log_ratio,
                      p_fam, p_alpha, p_gamma, p_order)


# -- summary ----------------------------------------------------------------

@dataclass
class FitReport:
    modal_family: FamilyId
    family_frequencies: tuple
    alpha_hat: float
    gamma_hat: float
    alpha_ci: tuple
    gamma_ci: tuple
    n_post: int
    acceptance: dict = field(default_factory=dict)
    diagnostics: Optional[dict] = None
    config: dict = field(default_factory=dict)
    seed: Optional[int] = None

    @property
    def spec(self):
        return DistSpec(self.modal_family, self.alpha_hat, self.gamma_hat)

    def to_dict(self):
        return {
            "family": self.modal_family.label,
            "family_code": int(self.modal_family),
            "family_frequencies": {f.label: float(v) for f, v in zip(FamilyId, self.family_frequencies)},
            "alpha_hat": self.alpha_hat,
            "gamma_hat": self.gamma_hat,
            "alpha_ci": list(self.alpha_ci),
            "gamma_ci": list(self.gamma_ci),
            "n_post_burn_in": self.n_post,
            "acceptance": self.acceptance,
            "diagnostics": self.diagnostics,
            "config": self.config,
            "seed": self.seed,
        }


def summarize(trace, cfg, data=None, rng=None, bins=100):
    """Discard burn-in, pick the modal family and summarize its draws.

    With ``data`` (and ``rng`` for the synthetic KS sample) the report also
    carries KL and KS diagnostics for the fitted member.
    """
    post = slice(int(cfg.burn_in), None)
    fam = trace.family[post]
    if fam.size == 0:
        raise ValueError("no iterations left after burn-in")
    counts = np.array([np.count_nonzero(fam == int(f)) for f in FamilyId], dtype=float)
    freqs = counts / counts.sum()
    modal = FamilyId(int(np.argmax(counts)) + 1)
    sel = fam == int(modal)
    a = trace.alpha[post][sel]
    g = trace.gamma[post][sel]
    a_hat, g_hat = float(a.mean()), float(g.mean())
    a_sd, g_sd = float(a.std()), float(g.std())
    acceptance = {}
    for k, name in enumerate(MOVE_NAMES):
        m = trace.move == k
        acceptance[name] = float(trace.accepted[m].mean()) if m.any() else None
    report = FitReport(
        modal_family=modal,
        family_frequencies=tuple(float(v) for v in freqs),
        alpha_hat=a_hat,
        gamma_hat=g_hat,
        alpha_ci=(a_hat - a_sd, a_hat + a_sd),
        gamma_ci=(g_hat - g_sd, g_hat + g_sd),
        n_post=int(fam.size),
        acceptance=acceptance,
        config=cfg.to_dict(),
        seed=cfg.seed,
    )
    if data is not None:
        from .diagnostics import fit_diagnostics
        if rng is None:
            rng = np.random.default_rng(cfg.seed)
        report.diagnostics = fit_diagnostics(data, report.spec, rng, bins=bins)
    return report
