"""Target detection probability and the per-block detection chain.

The probing receiver runs a Gaussianized likelihood-ratio test whose statistic
is, under either hypothesis, a weighted sum of noncentral chi-squares with one
component per stream: weight w = 1 - 1/sigma^2, where sigma^2 is the receive
variance including the communication layers the receiver cannot remove.  The
threshold is set from the null quantile at the false-alarm target, and the
detection probability follows by evaluating the alternative CDF there.

Streams with sigma^2 = 1 contribute zero weight.  When such a stream also has
a zero reference mean (zero probing gain, or no probing power at all) its
statistic term is identically zero and the stream is dropped with a warning;
when the reference mean is nonzero (all power on the known waveform, the
matched-filter limit) the chi-square machinery cannot represent the stream and
a DegenerateStatisticError is raised.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import BlockKind, CodingParams, SystemConfig, kappas
from .errors import DegenerateStatisticError
from .stats import GeneralizedChiSquare, gchisq_cdf, gchisq_quantile

logger = logging.getLogger(__name__)

# sigma^2 - 1 below this is treated as a vanished weight
DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class DetectionParams:
    """Per-stream statistic parameters for one block and block kind.

    ``weights``/``noncentralities_null``/``noncentralities_alt``/``sigma_sq``
    cover the active (non-dropped) streams; ``mu_norm_sq`` is the squared norm
    of the Gaussianized reference mean, which the threshold offset and the
    Monte Carlo oracle both need; ``dropped`` lists zero-information streams
    that were removed.
    """

    weights: tuple
    noncentralities_null: tuple
    noncentralities_alt: tuple
    sigma_sq: tuple
    mu_norm_sq: tuple
    block_len: int
    dropped: tuple


def _alt_factor_no_urllc(beta_s1, alpha_s1, c):
    """Noncentrality factor for clean blocks: power on the probing waveform
    plus the precancellation-correlated broadband contribution, with the
    threshold-recentering coefficient c = sigma^2/(sigma^2 - 1)."""
    return beta_s1 + (1.0 - beta_s1) * (alpha_s1 + c * (1.0 - alpha_s1)) ** 2


def _alt_factor_with_urllc(p: CodingParams, c):
    inner = _alt_factor_no_urllc(p.beta_s2, p.alpha_s2, c)
    return p.beta_u + (1.0 - p.beta_u) * (
        p.alpha_u ** 2 + (1.0 - p.alpha_u) ** 2 * inner)


def detection_params(cfg: SystemConfig, p: CodingParams, kind: BlockKind,
                     b: int) -> DetectionParams:
    """Statistic parameters for block ``b`` (zero-based) under ``kind``."""
    gains = cfg.sense_gain_array()[b]
    ell = cfg.block_len
    big_p = cfg.power
    k1, k2 = kappas(p, kind)

    if kind is BlockKind.NO_URLLC:
        mu_coeff = (1.0 - p.alpha_s1) ** 2 * (1.0 - p.beta_s1)
    else:
        mu_coeff = ((1.0 - p.alpha_u) ** 2 * (1.0 - p.alpha_s2) ** 2
                    * (1.0 - p.beta_u) * (1.0 - p.beta_s2))

    weights, nu_null, nu_alt, sigmas, mus, dropped = [], [], [], [], [], []
    for j, gamma in enumerate(gains):
        s = gamma * k2 * (1.0 - k1) * big_p
        mu_sq = gamma * mu_coeff * ell * big_p
        if s <= DEGENERATE_EPS:
            if mu_sq <= DEGENERATE_EPS * ell * big_p:
                dropped.append(j)
                continue
            raise DegenerateStatisticError(
                f"stream {j}: unit-variance statistic with a nonzero "
                "reference mean (matched-filter limit) cannot be represented")
        sigma_sq = 1.0 + s
        if cfg.detection_nu_variant == "kappa":
            nu0 = k1 * k2 * ell * big_p / s ** 2
        else:
            nu0 = mu_sq / s ** 2
        c = sigma_sq / s
        if kind is BlockKind.NO_URLLC:
            factor = _alt_factor_no_urllc(p.beta_s1, p.alpha_s1, c)
        else:
            factor = _alt_factor_with_urllc(p, c)
        weights.append(s / sigma_sq)
        nu_null.append(nu0)
        nu_alt.append(gamma * ell * big_p * factor)
        sigmas.append(sigma_sq)
        mus.append(mu_sq)

    if not weights:
        raise DegenerateStatisticError(
            "every stream is degenerate: the statistic is constant",
            all_streams=True)
    if dropped:
        logger.warning("block %d (%s): dropped zero-information streams %s",
                       b, kind.value, dropped)
    return DetectionParams(tuple(weights), tuple(nu_null), tuple(nu_alt),
                           tuple(sigmas), tuple(mus), ell, tuple(dropped))


@lru_cache(maxsize=262144)
def _pd_cached(weights, nu_null, nu_alt, block_len, false_alarm):
    null = GeneralizedChiSquare(weights, block_len, nu_null)
    alt = GeneralizedChiSquare(weights, block_len, nu_alt)
    thresh = gchisq_quantile(null, 1.0 - false_alarm)
    return 1.0 - gchisq_cdf(alt, thresh)


def detection_probability(cfg: SystemConfig, p: CodingParams, kind: BlockKind,
                          b: int) -> float:
    """Pr[statistic exceeds the false-alarm-calibrated threshold | target].

    Fully degenerate blocks (hypotheses share one law, constant statistic)
    detect at exactly the false-alarm rate; other degeneracies propagate.
    """
    try:
        params = detection_params(cfg, p, kind, b)
    except DegenerateStatisticError as err:
        if err.all_streams:
            return cfg.false_alarm
        raise
    return float(_pd_cached(params.weights, params.noncentralities_null,
                            params.noncentralities_alt, params.block_len,
                            cfg.false_alarm))


def chain_from_probs(pd_without, pd_with, num_blocks: int):
    """Effective per-block detection probabilities from the pure-kind values.

    Block b carries the low-latency layer with probability equal to the
    previous block's effective detection probability (zero before the first
    block), so the chain follows the affine recursion
    p_b = p_{b-1}*pd_with_b + (1 - p_{b-1})*pd_without_b.

    ``pd_without``/``pd_with`` may be scalars, per-block sequences, or arrays
    of grid cells (leading block axis when per-block).
    """
    pd_without = np.asarray(pd_without, dtype=float)
    pd_with = np.asarray(pd_with, dtype=float)
    per_block = pd_without.ndim > 0 and pd_without.shape[0] == num_blocks
    prev = np.zeros(np.broadcast(pd_without[0] if per_block else pd_without,
                                 pd_with[0] if per_block else pd_with).shape)
    out = []
    for b in range(num_blocks):
        w = pd_with[b] if per_block else pd_with
        d = pd_without[b] if per_block else pd_without
        prev = prev * w + (1.0 - prev) * d
        out.append(prev)
    return np.array(out)


def chain_fixed_point(pd_without, pd_with):
    """Limit of the affine recursion (homogeneous per-block probabilities).

    The denominator vanishes only at pd_with = 1, pd_without = 0, where the
    recursion never leaves its 0 start.
    """
    pd_without = np.asarray(pd_without, dtype=float)
    pd_with = np.asarray(pd_with, dtype=float)
    denom = 1.0 - (pd_with - pd_without)
    return np.where(denom <= 0.0, 0.0,
                    pd_without / np.where(denom <= 0.0, 1.0, denom))


def detection_chain(cfg: SystemConfig, p: CodingParams):
    """Effective detection probability for each block, first block onward."""
    pd_without = np.array([detection_probability(cfg, p, BlockKind.NO_URLLC, b)
                           for b in range(cfg.num_blocks)])
    pd_with = np.array([detection_probability(cfg, p, BlockKind.WITH_URLLC, b)
                        for b in range(cfg.num_blocks)])
    return chain_from_probs(pd_without, pd_with, cfg.num_blocks)
