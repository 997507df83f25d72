"""Posterior inference for the two-component shared-mean count mixture.

The model puts weight alpha on Poisson(lambda) and 1-alpha on the
mean-parameterised geometric, with a Beta(a0, a0) prior on alpha and the
improper 1/lambda prior on the shared mean.  Component roles are fixed
(1 = Poisson, 2 = geometric), so no label-switching handling exists or
is needed.

Three independent routes to the same posterior:

* `run_gibbs` - latent-allocation Gibbs with a random-walk Metropolis
  step on ln(lambda),
* `run_marginal_mh` - random-walk Metropolis on (logit alpha, ln lambda)
  against the allocation-marginalized posterior,
* `grid_posterior_alpha` - 2-D tensor-grid quadrature (Gauss-Jacobi in
  alpha, Gauss-Legendre in ln lambda), used as the oracle for both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .distributions import CountDataset
from .errors import AccuracyError, DegeneracyError
from .evidence import QuadratureConfig, _bracket_support, _panel_nodes
from .rng import Rng, RngSeed
from .special import log_factorial

_ACCEPTANCE_HEALTHY = (0.05, 0.95)


# ----------------------------------------------------------------------
# configuration and state types


@dataclass(frozen=True)
class MixtureSpec:
    """Fixed-role two-component mixture with one shared mean parameter."""

    a0: float = 0.5
    component1: str = "poisson"
    component2: str = "geometric"
    shared_parameter: bool = True

    def __post_init__(self):
        if self.a0 <= 0.0:
            raise ValueError("a0 must be positive")
        if self.component1 != "poisson" or self.component2 != "geometric":
            raise ValueError("component roles are fixed: 1=poisson, 2=geometric")
        if not self.shared_parameter:
            raise ValueError("only the shared-mean mixture is supported")


@dataclass(frozen=True)
class McmcConfig:
    iterations: int = 10_000
    burn_in: int = 2_000
    initial_step: float = 0.5
    target_acceptance_gibbs: float = 0.44
    target_acceptance_marginal: float = 0.35
    adapt: bool = True

    def __post_init__(self):
        if self.iterations <= self.burn_in:
            raise ValueError("iterations must exceed burn_in")
        if self.burn_in < 0 or self.initial_step <= 0.0:
            raise ValueError("burn_in must be >= 0 and initial_step positive")


@dataclass(frozen=True)
class BetaParameters:
    a: float
    b: float

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)


@dataclass(frozen=True)
class AllocationState:
    """Component labels (1 or 2) with their sufficient counts."""

    z: np.ndarray
    n1: int
    n2: int
    s1: int
    s2: int

    @classmethod
    def from_labels(cls, z, values) -> "AllocationState":
        z = np.asarray(z, dtype=np.int64)
        values = np.asarray(values, dtype=np.int64)
        if z.shape != values.shape:
            raise ValueError("labels and values must align")
        if not np.all((z == 1) | (z == 2)):
            raise ValueError("labels must be 1 or 2")
        in1 = z == 1
        return cls(
            z=z,
            n1=int(in1.sum()),
            n2=int((~in1).sum()),
            s1=int(values[in1].sum()),
            s2=int(values[~in1].sum()),
        )


@dataclass(frozen=True)
class MixtureChain:
    """Post-burn-in draws of (alpha, lambda) plus sampler diagnostics."""

    alpha_draws: np.ndarray
    lambda_draws: np.ndarray
    iterations: int
    burn_in: int
    mh_acceptance_rate: float
    seed: RngSeed
    kernel: str = "gibbs"
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        kept = self.iterations - self.burn_in
        if self.alpha_draws.shape[0] != kept or self.lambda_draws.shape[0] != kept:
            raise ValueError("chain length must equal iterations - burn_in")


@dataclass(frozen=True)
class SummaryTable:
    """Location summaries of a chain, for the weight and the shared mean."""

    alpha_mean: float
    alpha_median: float
    alpha_quantiles: dict[float, float]
    lambda_mean: float
    lambda_median: float
    lambda_quantiles: dict[float, float]
    n_draws: int
    mh_acceptance_rate: float


@dataclass(frozen=True)
class DiscretizedPosterior:
    """Marginal posterior of the mixture weight on a quadrature grid."""

    alpha_grid: np.ndarray
    density: np.ndarray
    node_mass: np.ndarray
    mean: float
    median: float
    log_normalizer: float
    normalization_error: float

    def quantile(self, q: float) -> float:
        if not 0.0 <= q <= 1.0:
            raise ValueError("q must be in [0, 1]")
        cum = np.cumsum(self.node_mass)
        mid = cum - 0.5 * self.node_mass
        return float(np.interp(q, mid, self.alpha_grid))


# ----------------------------------------------------------------------
# conditionals


def conditional_alpha(state: AllocationState, a0: float) -> BetaParameters:
    """Conjugate update of the weight: Beta(a0 + n1, a0 + n2)."""
    if a0 <= 0.0:
        raise ValueError("a0 must be positive")
    return BetaParameters(a0 + state.n1, a0 + state.n2)


def allocation_probability(x, alpha: float, lam: float):
    """P(component 1 | x, alpha, lambda), from log pmfs for stability."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    xa = np.asarray(x, dtype=np.int64)
    log_lam = math.log(lam)
    log1p_lam = math.log1p(lam)
    lf1 = xa * log_lam - lam - log_factorial(xa)
    lf2 = xa * log_lam - (xa + 1) * log1p_lam
    d = (math.log(alpha) - math.log1p(-alpha)) + (lf1 - lf2)
    out = _expit(d)
    return float(out) if np.isscalar(x) or np.asarray(out).ndim == 0 else out


def log_lambda_conditional(lam: float, state: AllocationState) -> float:
    """Unnormalized log density of lambda given the allocations.

    (s1+s2-1) ln(lambda) - n1 lambda - (s2+n2) ln(1+lambda); improper
    when s1+s2 = 0 and n1 = 0 (exponent of lambda is -1 at the origin).
    """
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    total = state.s1 + state.s2
    if total == 0 and state.n1 == 0:
        raise DegeneracyError(
            "all-zero allocation to the geometric component leaves an "
            "improper lambda conditional under the 1/lambda prior"
        )
    return (
        (total - 1) * math.log(lam)
        - state.n1 * lam
        - (state.s2 + state.n2) * math.log1p(lam)
    )


def _expit(d):
    d = np.asarray(d, dtype=float)
    with np.errstate(over="ignore"):
        return np.where(d >= 0.0, 1.0 / (1.0 + np.exp(-d)), np.exp(d) / (1.0 + np.exp(d)))


def _log_expit(d):
    # ln sigmoid(d) = -softplus(-d), stable on both tails
    return -np.logaddexp(0.0, -np.asarray(d, dtype=float))


def _require_nondegenerate(data: CountDataset) -> None:
    if data.total < 1:
        raise DegeneracyError(
            "all-zero dataset: the 1/lambda prior gives an improper posterior"
        )


def _initial_point(data: CountDataset, spec: MixtureSpec, rng: Rng) -> tuple[float, float]:
    alpha = float(rng.beta(spec.a0, spec.a0))
    alpha = min(max(alpha, 1e-12), 1.0 - 1e-12)
    lam = data.mean if data.mean > 0.0 else 0.5
    return alpha, lam


# ----------------------------------------------------------------------
# Gibbs with latent allocations


def run_gibbs(
    data: CountDataset,
    spec: MixtureSpec,
    config: McmcConfig = McmcConfig(),
    seed: RngSeed = RngSeed(0),
) -> MixtureChain:
    """Latent-allocation Gibbs sweep: {z | alpha, lambda} -> {alpha | z} -> {lambda | z}.

    The lambda step is a Gaussian random walk on ln(lambda) whose scale is
    Robbins-Monro adapted toward the target acceptance during burn-in only.
    Deterministic given (data, spec, config, seed).
    """
    _require_nondegenerate(data)
    rng = Rng(seed)
    values = data.values.astype(np.float64)
    lfact = log_factorial(data.values)
    n = data.n
    total = data.total

    alpha, lam = _initial_point(data, spec, rng)
    v = math.log(lam)
    log_step = math.log(config.initial_step)

    kept = config.iterations - config.burn_in
    alphas = np.empty(kept)
    lambdas = np.empty(kept)
    accepted_post = 0
    attempts_post = 0

    def log_target_v(vv: float, n1: int, s2n2: int) -> float:
        # lambda^total e^(-n1 lambda) (1+lambda)^-(s2+n2), plus ln-scale Jacobian
        if vv > 690.0:
            return -math.inf
        return total * vv - n1 * math.exp(vv) - s2n2 * float(np.logaddexp(0.0, vv))

    for it in range(config.iterations):
        # allocations
        lam = math.exp(v)
        softplus_v = float(np.logaddexp(0.0, v))
        lf1 = values * v - lam - lfact
        lf2 = values * v - (values + 1.0) * softplus_v
        d = (math.log(alpha) - math.log1p(-alpha)) + (lf1 - lf2)
        p1 = _expit(d)
        u = rng.uniform(n)
        in1 = u < p1
        n1 = int(in1.sum())
        s2n2 = (total - int(in1.dot(values))) + (n - n1)

        # weight
        alpha = float(rng.beta(spec.a0 + n1, spec.a0 + (n - n1)))
        alpha = min(max(alpha, 1e-300), 1.0 - 1e-16)

        # shared mean, random walk on ln(lambda)
        log_v_cur = log_target_v(v, n1, s2n2)
        step = math.exp(log_step)
        v_prop = v + rng.normal(0.0, step)
        log_v_prop = log_target_v(v_prop, n1, s2n2)
        log_ratio = log_v_prop - log_v_cur
        accept_prob = 1.0 if log_ratio >= 0.0 else math.exp(log_ratio)
        moved = rng.uniform() < accept_prob
        if moved:
            v = v_prop
        if it < config.burn_in:
            if config.adapt:
                gamma = (it + 1.0) ** -0.6
                log_step += gamma * (accept_prob - config.target_acceptance_gibbs)
        else:
            attempts_post += 1
            accepted_post += moved
            k = it - config.burn_in
            alphas[k] = alpha
            lambdas[k] = math.exp(v)

    rate = accepted_post / attempts_post if attempts_post else 0.0
    warnings = ()
    if not _ACCEPTANCE_HEALTHY[0] <= rate <= _ACCEPTANCE_HEALTHY[1]:
        warnings = (
            f"lambda-step acceptance {rate:.3f} outside "
            f"[{_ACCEPTANCE_HEALTHY[0]}, {_ACCEPTANCE_HEALTHY[1]}] after adaptation",
        )
    return MixtureChain(
        alpha_draws=alphas,
        lambda_draws=lambdas,
        iterations=config.iterations,
        burn_in=config.burn_in,
        mh_acceptance_rate=rate,
        seed=seed,
        kernel="gibbs",
        warnings=warnings,
    )


# ----------------------------------------------------------------------
# marginalized random-walk Metropolis


def run_marginal_mh(
    data: CountDataset,
    spec: MixtureSpec,
    config: McmcConfig = McmcConfig(),
    seed: RngSeed = RngSeed(0),
) -> MixtureChain:
    """Random-walk Metropolis on (logit alpha, ln lambda) against the
    allocation-marginalized posterior; validation kernel for run_gibbs."""
    _require_nondegenerate(data)
    rng = Rng(seed)
    values = data.values.astype(np.float64)
    lfact = log_factorial(data.values)
    a0 = spec.a0

    def log_target(s: float, vv: float) -> float:
        if vv > 690.0:
            return -math.inf
        lam = math.exp(vv)
        softplus_v = float(np.logaddexp(0.0, vv))
        lf1 = values * vv - lam - lfact
        lf2 = values * vv - (values + 1.0) * softplus_v
        log_alpha = float(_log_expit(s))
        log_1m_alpha = float(_log_expit(-s))
        loglik = float(np.logaddexp(log_alpha + lf1, log_1m_alpha + lf2).sum())
        # Beta(a0,a0) prior plus logit Jacobian leaves alpha^a0 (1-alpha)^a0;
        # the 1/lambda prior is flat in ln(lambda).
        return loglik + a0 * (log_alpha + log_1m_alpha)

    alpha0, lam0 = _initial_point(data, spec, rng)
    s = math.log(alpha0) - math.log1p(-alpha0)
    v = math.log(lam0)
    log_step = math.log(config.initial_step)
    cur = log_target(s, v)

    kept = config.iterations - config.burn_in
    alphas = np.empty(kept)
    lambdas = np.empty(kept)
    accepted_post = 0
    attempts_post = 0

    for it in range(config.iterations):
        step = math.exp(log_step)
        s_prop = s + rng.normal(0.0, step)
        v_prop = v + rng.normal(0.0, step)
        prop = log_target(s_prop, v_prop)
        log_ratio = prop - cur
        accept_prob = 1.0 if log_ratio >= 0.0 else math.exp(log_ratio)
        moved = rng.uniform() < accept_prob
        if moved:
            s, v, cur = s_prop, v_prop, prop
        if it < config.burn_in:
            if config.adapt:
                gamma = (it + 1.0) ** -0.6
                log_step += gamma * (accept_prob - config.target_acceptance_marginal)
        else:
            attempts_post += 1
            accepted_post += moved
            k = it - config.burn_in
            alphas[k] = _expit(s)
            lambdas[k] = math.exp(v)

    rate = accepted_post / attempts_post if attempts_post else 0.0
    warnings = ()
    if not _ACCEPTANCE_HEALTHY[0] <= rate <= _ACCEPTANCE_HEALTHY[1]:
        warnings = (
            f"joint-step acceptance {rate:.3f} outside "
            f"[{_ACCEPTANCE_HEALTHY[0]}, {_ACCEPTANCE_HEALTHY[1]}] after adaptation",
        )
    return MixtureChain(
        alpha_draws=alphas,
        lambda_draws=lambdas,
        iterations=config.iterations,
        burn_in=config.burn_in,
        mh_acceptance_rate=rate,
        seed=seed,
        kernel="marginal_mh",
        warnings=warnings,
    )


# ----------------------------------------------------------------------
# 2-D grid oracle


def _alpha_nodes(a0: float, k: int) -> tuple[np.ndarray, np.ndarray]:
    # Gauss-Jacobi absorbs the Beta(a0,a0) kernel, so a0 < 1 endpoint
    # singularities cost nothing; constants cancel in normalization.
    x, w = roots_jacobi(k, a0 - 1.0, a0 - 1.0)
    return (x + 1.0) / 2.0, w


def grid_posterior_alpha(
    data: CountDataset | None,
    spec: MixtureSpec,
    grid: QuadratureConfig = QuadratureConfig(),
) -> DiscretizedPosterior:
    """Marginal posterior of the mixture weight by tensor-grid quadrature.

    Gauss-Jacobi nodes on the weight axis (prior absorbed into the rule),
    composite Gauss-Legendre on u = ln(lambda) over a bracketed support.
    `data=None` returns the Beta(a0, a0) prior itself, the zero-data check.
    """
    alpha, w_alpha = _alpha_nodes(spec.a0, grid.alpha_nodes)
    if data is None:
        mass = w_alpha / w_alpha.sum()
        log_dens = (spec.a0 - 1.0) * (np.log(alpha) + np.log1p(-alpha))
        log_norm = (
            math.lgamma(spec.a0) * 2.0 - math.lgamma(2.0 * spec.a0)
        )  # ln B(a0, a0)
        density = np.exp(log_dens - log_norm)
        mean = float(np.sum(mass * alpha))
        post = DiscretizedPosterior(
            alpha_grid=alpha,
            density=density,
            node_mass=mass,
            mean=mean,
            median=0.5,
            log_normalizer=log_norm,
            normalization_error=0.0,
        )
        return post

    _require_nondegenerate(data)

    def evaluate(n_alpha: int, nodes_per_panel: int, drop: float):
        a_nodes, a_wts = _alpha_nodes(spec.a0, n_alpha)
        lo, hi, panels = _mixture_u_bracket(data, grid, drop)
        u, u_wts = _panel_nodes(lo, hi, panels, nodes_per_panel)
        # log-likelihood matrix over (alpha node, u node)
        loglik = _mixture_loglik_grid(data, a_nodes, u)
        shift = loglik.max()
        integ_u = (np.exp(loglik - shift) * u_wts[None, :]).sum(axis=1)
        raw_mass = a_wts * integ_u
        z = raw_mass.sum()
        mass = raw_mass / z
        return a_nodes, a_wts, mass, shift + math.log(z), float(np.sum(mass * a_nodes))

    a_nodes, a_wts, mass, log_z, mean = evaluate(
        grid.alpha_nodes, grid.nodes_per_panel, grid.bracket_drop
    )
    # refinement pass doubles the weight axis, adds nodes, and widens the
    # bracket, so truncation errors show up as well as rule errors
    _, _, _, log_z_ref, mean_ref = evaluate(
        grid.alpha_nodes * 2, grid.nodes_per_panel + 8, grid.bracket_drop + 20.0
    )
    err = max(abs(log_z - log_z_ref), abs(mean - mean_ref))
    if err > max(grid.tol, 1e-8):
        raise AccuracyError(
            f"grid refinement moved the posterior by {err:.3e}", estimate=mean
        )

    # true posterior density at the nodes: mass_j = density_j w_j 2^(1-2a0) / kernel_j
    log_kernel = (spec.a0 - 1.0) * (np.log(a_nodes) + np.log1p(-a_nodes))
    density = mass * np.exp(log_kernel + (2.0 * spec.a0 - 1.0) * math.log(2.0)) / a_wts

    cum = np.cumsum(mass)
    mid = cum - 0.5 * mass
    median = float(np.interp(0.5, mid, a_nodes))
    return DiscretizedPosterior(
        alpha_grid=a_nodes,
        density=density,
        node_mass=mass,
        mean=mean,
        median=median,
        log_normalizer=log_z,
        normalization_error=err,
    )


def _mixture_u_bracket(data: CountDataset, grid: QuadratureConfig, drop: float):
    """Support of the u = ln(lambda) axis, wide enough for any alpha.

    Takes the union of the pure-Poisson and pure-geometric brackets (both
    profiles peak at ln(total/n); every mixture profile sits between them
    up to per-observation weighting).
    """
    distinct, counts = np.unique(data.values, return_counts=True)
    vals = distinct.astype(np.float64)
    cnts = counts.astype(np.float64)
    lfact = log_factorial(distinct)
    n = float(data.n)
    total = float(data.total)

    def log_pois(u: float) -> float:
        return float(np.dot(cnts, vals * u - math.exp(u) - lfact)) if u < 690.0 else -math.inf

    def log_geo(u: float) -> float:
        sp = float(np.logaddexp(0.0, u))
        return float(np.dot(cnts, vals * u - (vals + 1.0) * sp))

    mode = math.log(total / n)
    sd_pois = 1.0 / math.sqrt(total)
    sd_geo = math.sqrt((total + n) / (total * n))
    lo_p, hi_p = _bracket_support(log_pois, mode, sd_pois, drop)
    lo_g, hi_g = _bracket_support(log_geo, mode, sd_geo, drop)
    lo, hi = min(lo_p, lo_g), max(hi_p, hi_g)
    sd = max(sd_pois, sd_geo)
    panels = max(8, min(grid.max_panels, math.ceil((hi - lo) / (grid.panel_width_sds * sd))))
    return lo, hi, panels


def _mixture_loglik_grid(data: CountDataset, alpha: np.ndarray, u: np.ndarray) -> np.ndarray:
    """sum_i ln(alpha f1 + (1-alpha) f2) on the (alpha, u) tensor grid.

    Observations are grouped by distinct value, so the tensor is
    (alpha, distinct values, u) rather than (alpha, n, u); the alpha axis
    is chunked to bound the temporaries on refined grids.
    """
    distinct, counts = np.unique(data.values, return_counts=True)
    vals = distinct.astype(np.float64)
    cnts = counts.astype(np.float64)
    lfact = log_factorial(distinct)
    lam = np.exp(u)
    softplus_u = np.logaddexp(0.0, u)
    lf1 = vals[:, None] * u[None, :] - lam[None, :] - lfact[:, None]
    lf2 = vals[:, None] * u[None, :] - (vals[:, None] + 1.0) * softplus_u[None, :]
    out = np.empty((alpha.size, u.size))
    chunk = max(1, int(4_000_000 / max(1, vals.size * u.size)))
    for start in range(0, alpha.size, chunk):
        a = alpha[start : start + chunk]
        la = np.log(a)[:, None, None]
        l1a = np.log1p(-a)[:, None, None]
        per_value = np.logaddexp(la + lf1[None, :, :], l1a + lf2[None, :, :])
        out[start : start + chunk] = np.tensordot(per_value, cnts, axes=([1], [0]))
    return out


# ----------------------------------------------------------------------
# summaries


def posterior_summary(chain: MixtureChain, quantiles=(0.1, 0.25, 0.5, 0.75, 0.9)) -> SummaryTable:
    """Means, medians, and requested quantiles of the chain."""
    if chain.alpha_draws.size == 0:
        raise ValueError("chain is empty")
    qs = tuple(float(q) for q in quantiles)
    if any(not 0.0 <= q <= 1.0 for q in qs):
        raise ValueError("quantiles must lie in [0, 1]")
    a = chain.alpha_draws
    l = chain.lambda_draws
    return SummaryTable(
        alpha_mean=float(a.mean()),
        alpha_median=float(np.median(a)),
        alpha_quantiles={q: float(np.quantile(a, q)) for q in qs},
        lambda_mean=float(l.mean()),
        lambda_median=float(np.median(l)),
        lambda_quantiles={q: float(np.quantile(l, q)) for q in qs},
        n_draws=int(a.size),
        mh_acceptance_rate=chain.mh_acceptance_rate,
    )
