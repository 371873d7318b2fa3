"""Low-latency decoding error bound in the finite-blocklength regime.

The block error of the threshold decoder is bounded by a convex combination
of a missed/wrong-decoding term (active when the previous block detected a
target) and a false-detection term (active otherwise).  Both reduce to two
scalar ingredients per block: the normal-approximation tail of the decoding
metric and a union-bound remainder that is independent of the coding
parameters.

Everything here is elementwise numpy so the grid optimizer can evaluate whole
parameter lattices through the same formulas.
"""

from dataclasses import dataclass

import numpy as np

from .channel import CodingParams, SystemConfig, snr_set
from .stats import capacity, dispersion, q_func

_LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class UrllcErrorComponents:
    """Per-block error-bound ingredients.

    eps_tilde_1: metric-below-threshold probability (normal approximation
    plus the Berry-Esseen allowance); eps_tilde_2: union-bound remainder for
    competing codewords; eps_hat_1: eps_tilde_1 minus the refined-statistics
    allowance; p_u1/p_u2: the with- and without-message branch bounds; c_u and
    v_u: summed capacity (nats) and dispersion of the low-latency layer.
    """

    eps_tilde_1: float
    eps_tilde_2: float
    eps_hat_1: float
    p_u1: float
    p_u2: float
    c_u: float
    v_u: float


def _clamp01(x):
    return np.clip(x, 0.0, 1.0)


def metric_tail(block_len, c_u, v_u, ln_msgs, k_u, be_const):
    """Pr[decoding metric <= threshold], threshold ln_msgs + k_u*ln(block_len).

    Vanishing dispersion collapses to the deterministic limit (0 or 1);
    exactly balancing mean and threshold with zero dispersion is undefined.
    """
    c_u = np.asarray(c_u, dtype=float)
    v_u = np.asarray(v_u, dtype=float)
    num = block_len * c_u - ln_msgs - k_u * np.log(block_len)
    denom = np.sqrt(block_len * v_u)
    zero_v = v_u == 0.0
    if np.any(zero_v & (num == 0.0)):
        raise ValueError("zero dispersion with the metric mean exactly at the "
                         "threshold has no defined tail")
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = np.where(zero_v, np.inf * np.sign(num), num / denom)
    tail = np.where(np.isneginf(arg), 1.0,
                    np.where(np.isposinf(arg), 0.0, q_func(np.where(np.isfinite(arg), arg, 0.0))))
    return _clamp01(tail + be_const / np.sqrt(block_len))


def union_remainder(block_len, k_u, be_const):
    """Competing-codeword remainder; independent of the coding parameters."""
    return float(_clamp01(
        2.0 / block_len ** k_u
        * (_LN2 / np.sqrt(2.0 * np.pi * block_len)
           + 2.0 * be_const / np.sqrt(block_len))))


def _pow_msgs(eps, msgs):
    """eps ** msgs in log space (msgs can reach 2**20 and beyond)."""
    eps = np.asarray(eps, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.exp(msgs * np.log(np.where(eps > 0.0, eps, 1.0)))
    return np.where(eps > 0.0, out, 0.0)


def error_terms(block_len, c_u, v_u, ln_msgs, msgs, k_u, be_b, be_btilde):
    """(eps1, eps2, eps_hat_1, p_u1, p_u2) for scalar or array c_u/v_u."""
    eps1 = metric_tail(block_len, c_u, v_u, ln_msgs, k_u, be_b)
    eps2 = union_remainder(block_len, k_u, be_b)
    eps_hat = _clamp01(eps1 - 2.0 * be_btilde / np.sqrt(block_len))
    p_u1 = _clamp01(eps1 + _pow_msgs(eps1, msgs) + eps2)
    p_u2 = float(-np.expm1(msgs * np.log1p(-eps2 / msgs)))
    return eps1, eps2, eps_hat, p_u1, p_u2


def urllc_snr_terms(cfg: SystemConfig, alpha_u, beta_u, b: int):
    """(c_u, v_u) summed over streams of block ``b``; broadcasts over params."""
    lam = cfg.comm_gain_array()[b]
    alpha_u = np.asarray(alpha_u, dtype=float)[..., None]
    beta_u = np.asarray(beta_u, dtype=float)[..., None]
    omega = snr_set(lam, cfg.power, alpha_u, 0.0, 0.0, beta_u, 0.0, 0.0)[0]
    return capacity(omega).sum(axis=-1), dispersion(omega).sum(axis=-1)


def urllc_components(cfg: SystemConfig, p: CodingParams, b: int) -> UrllcErrorComponents:
    """Error-bound ingredients for block ``b`` (zero-based)."""
    c_u, v_u = urllc_snr_terms(cfg, p.alpha_u, p.beta_u, b)
    msgs = float(cfg.urllc_msgs) * float(cfg.dpc_bins)
    eps1, eps2, eps_hat, p_u1, p_u2 = error_terms(
        cfg.block_len, float(c_u), float(v_u), np.log(msgs), msgs,
        cfg.k_u, cfg.berry_esseen_b, cfg.berry_esseen_btilde)
    return UrllcErrorComponents(float(eps1), float(eps2), float(eps_hat),
                                float(p_u1), float(p_u2), float(c_u), float(v_u))


def urllc_error_bound(comp: UrllcErrorComponents, p_prev_d):
    """Error bound given the previous block's detection probability."""
    p_prev_d = np.clip(p_prev_d, 0.0, 1.0)
    return _clamp01(p_prev_d * comp.p_u1 + (1.0 - p_prev_d) * comp.p_u2)


def urllc_error_asymptotic(comp: UrllcErrorComponents, p_prev_d, urllc_msgs,
                           dpc_bins, block_len, k_u=1.0):
    """Large-block simplification: only the detected-branch normal tail
    survives, with the logarithmic threshold slack and no Berry-Esseen term."""
    ln_msgs = np.log(float(urllc_msgs) * float(dpc_bins))
    tail = metric_tail(block_len, comp.c_u, comp.v_u, ln_msgs, k_u, 0.0)
    return float(np.clip(p_prev_d, 0.0, 1.0) * tail)
