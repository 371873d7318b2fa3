"""Broadband-rate upper bounds for both decoder strategies.

The broadband message spans the whole frame; its decoder conditions on which
blocks were flagged as carrying a low-latency message (and, for the
cancellation decoder, which of those were decoded correctly).  The bound
averages the per-realization capacity/dispersion over those outcomes, either
by exact enumeration over block subsets or, when every block and stream sees
the same gain, by the closed two- and three-outcome mixtures.

Rates are in nats per channel use throughout; conversion to bits happens at
the output layer.
"""

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .channel import BlockKind, CodingParams, SystemConfig, snr_set
from .reliability import UrllcErrorComponents, _pow_msgs, urllc_components
from .sensing import chain_fixed_point, detection_chain, detection_probability
from .stats import capacity, dispersion, q_inv

_LN2 = math.log(2.0)

# exact enumeration limits: 2^eta subsets / 3^eta subset pairs
MAX_ENUM_BLOCKS_TIN = 14
MAX_ENUM_BLOCKS_SIC = 9


@dataclass(frozen=True)
class DetectDecodeProbs:
    """Per-block probability that a low-latency message is flagged (p_dt) and
    that a flagged one is decoded correctly (p_dc)."""

    p_dt: float
    p_dc: float


@dataclass(frozen=True)
class RateBound:
    """Rate bound with its mixture capacity/dispersion and feasibility.

    ``feasible`` is False when the error-budget correction leaves no
    probability mass for the decoding tail; ``rate_negative`` marks bounds
    that came out below zero (reported as-is; the optimizer scores them 0).
    """

    rate_nats: float
    c_eff: float
    v_eff: float
    delta_e: float
    feasible: bool
    rate_negative: bool = False


def detect_decode_probs(comp: UrllcErrorComponents, p_prev_d, msgs) -> DetectDecodeProbs:
    """Flagging and correct-decoding probabilities for one block."""
    miss_all = float(_pow_msgs(comp.eps_hat_1, msgs))
    p_dt = np.clip(p_prev_d * (1.0 - miss_all) + (1.0 - p_prev_d) * comp.p_u2,
                   0.0, 1.0)
    p_dc = np.clip(1.0 - comp.eps_tilde_1 - comp.eps_tilde_2, 0.0, 1.0)
    return DetectDecodeProbs(float(p_dt), float(p_dc))


# ----------------------------------------------------------------------------
#  error-budget correction
# ----------------------------------------------------------------------------

def delta_margin(n, k_e, be_btilde):
    """Parameter-independent part of the error-budget correction."""
    return (be_btilde / math.sqrt(n) * (1.0 + 4.0 / n ** k_e)
            + 2.0 * _LN2 / (n ** k_e * math.sqrt(2.0 * n * math.pi)))


def delta_collapse(n, eta, k_e, be_btilde, p_prev, eps1_pow_msgs, p_u2):
    """Homogeneous-case correction: the subset sum collapses to a power."""
    bracket = (p_prev * (1.0 - eps1_pow_msgs)
               + (1.0 - p_prev) * (1.0 - p_u2))
    return 1.0 + delta_margin(n, k_e, be_btilde) - bracket ** eta


def delta_subset_sum(n, eta, k_e, be_btilde, p_prev_b, eps1_pow_msgs_b, p_u2_b):
    """Exact subset enumeration of the error-budget correction."""
    hit = [p_prev_b[b] * (1.0 - eps1_pow_msgs_b[b]) for b in range(eta)]
    miss = [(1.0 - p_prev_b[b]) * (1.0 - p_u2_b[b]) for b in range(eta)]
    terms = []
    for size in range(eta + 1):
        for subset in combinations(range(eta), size):
            chosen = set(subset)
            prod = 1.0
            for b in range(eta):
                prod *= hit[b] if b in chosen else miss[b]
            terms.append(prod)
    return 1.0 + delta_margin(n, k_e, be_btilde) - math.fsum(terms)


def delta_e(cfg: SystemConfig, p_d_chain, comps) -> float:
    """Error-budget correction.

    Stationary form: a scalar ``p_d_chain`` with a single components object
    treats every block at that detection probability (the chain's fixed point
    in the homogeneous regime) and uses the collapsed power formula.
    Per-block form: a chain sequence with per-block components enumerates the
    2^eta flagged-block subsets, pairing block b with the chain value of
    block b-1 (zero before the first block).
    """
    eta = cfg.num_blocks
    msgs = float(cfg.urllc_msgs) * float(cfg.dpc_bins)
    chain = np.asarray(p_d_chain, dtype=float)
    if chain.ndim == 0 and not isinstance(comps, Sequence):
        return delta_collapse(cfg.n, eta, cfg.k_e, cfg.berry_esseen_btilde,
                              float(chain),
                              float(_pow_msgs(comps.eps_tilde_1, msgs)),
                              comps.p_u2)
    comps_list = list(comps) if isinstance(comps, Sequence) else [comps] * eta
    p_prev = np.concatenate(([0.0], chain[:-1]))
    return delta_subset_sum(
        cfg.n, eta, cfg.k_e, cfg.berry_esseen_btilde, p_prev,
        [float(_pow_msgs(c.eps_tilde_1, msgs)) for c in comps_list],
        [c.p_u2 for c in comps_list])


def _pure_kind_probs(cfg, p):
    pd_wo = detection_probability(cfg, p, BlockKind.NO_URLLC, 0)
    pd_w = detection_probability(cfg, p, BlockKind.WITH_URLLC, 0)
    return pd_wo, pd_w


# ----------------------------------------------------------------------------
#  mixture capacity/dispersion
# ----------------------------------------------------------------------------

def tin_mixture(q, p_dt, cap1, cap2, disp1, disp2):
    """Two-outcome mixture for the interference-as-noise decoder."""
    c_e = q * ((1.0 - p_dt) * cap1 + p_dt * cap2)
    v_e = q * ((1.0 - p_dt) * disp1 + p_dt * disp2)
    return c_e, v_e


def sic_mixture(q, p_dt, p_dc, cap1, cap2, cap3, disp1, disp2, disp3):
    """Three-outcome mixture for the cancellation decoder."""
    c_e = q * ((1.0 - p_dt) * cap1
               + p_dt * ((1.0 - p_dc) * cap2 + p_dc * cap3))
    v_e = q * ((1.0 - p_dt) * disp1
               + p_dt * ((1.0 - p_dc) * disp2 + p_dc * disp3))
    return c_e, v_e


def rate_from_mixture(c_e, v_e, n, embb_target, delta, k_e, ln_sense_codebook):
    """Normal-approximation rate bound; returns (rate, feasible) arrays."""
    slack = embb_target - np.asarray(delta, dtype=float)
    feasible = (slack > 0.0) & (slack < 1.0)
    safe = np.where(feasible, slack, 0.5)
    rate = (np.asarray(c_e, dtype=float)
            - np.sqrt(np.asarray(v_e, dtype=float) / n) * q_inv(safe)
            - k_e * math.log(n) / n - ln_sense_codebook / n)
    return np.where(feasible, rate, np.nan), feasible


def _block_snr_tables(cfg, p):
    """Per-block summed capacity/dispersion for the three broadband SNRs."""
    lam = cfg.comm_gain_array()
    o_u, o1, o2, o3 = snr_set(lam, cfg.power, p.alpha_u, p.alpha_s1,
                              p.alpha_s2, p.beta_u, p.beta_s1, p.beta_s2,
                              cfg.sic_variance_variant)
    tables = {}
    for name, om in (("1", o1), ("2", o2), ("3", o3)):
        tables["c" + name] = capacity(om).sum(axis=1)
        tables["v" + name] = dispersion(om).sum(axis=1)
    return tables


def _subset_mixture_tin(eta, p_dt_b, base_c, base_v, dc_b, dv_b):
    """Exact subset enumeration of the two-outcome mixture.

    base_* hold the all-clean sums; dc_b/dv_b the per-block deltas when block
    b is flagged.  Returns (C_e, V_e, total probability mass).
    """
    c_terms, v_terms, mass = [], [], []
    for size in range(eta + 1):
        for subset in combinations(range(eta), size):
            prob = 1.0
            c_val, v_val = base_c, base_v
            for b in range(eta):
                if b in subset:
                    prob *= p_dt_b[b]
                    c_val += dc_b[b]
                    v_val += dv_b[b]
                else:
                    prob *= 1.0 - p_dt_b[b]
            c_terms.append(prob * c_val)
            v_terms.append(prob * v_val)
            mass.append(prob)
    return (math.fsum(c_terms) / eta, math.fsum(v_terms) / eta,
            math.fsum(mass))


def _subset_mixture_sic(eta, p_dt_b, p_dc_b, base_c, base_v, dc2_b, dv2_b,
                        dc3_b, dv3_b):
    """Exact subset-pair enumeration of the three-outcome mixture."""
    c_terms, v_terms, mass = [], [], []
    for size in range(eta + 1):
        for flagged in combinations(range(eta), size):
            prob_dt = 1.0
            c_flag, v_flag = base_c, base_v
            for b in range(eta):
                if b in flagged:
                    prob_dt *= p_dt_b[b]
                    c_flag += dc2_b[b]
                    v_flag += dv2_b[b]
                else:
                    prob_dt *= 1.0 - p_dt_b[b]
            for inner_size in range(size + 1):
                for decoded in combinations(flagged, inner_size):
                    prob = prob_dt
                    c_val, v_val = c_flag, v_flag
                    for b in flagged:
                        if b in decoded:
                            prob *= p_dc_b[b]
                            c_val += dc3_b[b] - dc2_b[b]
                            v_val += dv3_b[b] - dv2_b[b]
                        else:
                            prob *= 1.0 - p_dc_b[b]
                    c_terms.append(prob * c_val)
                    v_terms.append(prob * v_val)
                    mass.append(prob)
    return (math.fsum(c_terms) / eta, math.fsum(v_terms) / eta,
            math.fsum(mass))


# ----------------------------------------------------------------------------
#  full bounds
# ----------------------------------------------------------------------------

def _assemble(cfg, c_e, v_e, delta):
    rate, feasible = rate_from_mixture(c_e, v_e, cfg.n, cfg.embb_target,
                                       delta, cfg.k_e,
                                       math.log(cfg.sense_codebook))
    rate = float(rate) if feasible else float("nan")
    return RateBound(rate_nats=rate, c_eff=float(c_e), v_eff=float(v_e),
                     delta_e=float(delta), feasible=bool(feasible),
                     rate_negative=bool(feasible and rate < 0.0))


def _per_block_inputs(cfg, p):
    chain = detection_chain(cfg, p)
    p_prev = np.concatenate(([0.0], chain[:-1]))
    comps = [urllc_components(cfg, p, b) for b in range(cfg.num_blocks)]
    msgs = float(cfg.urllc_msgs) * float(cfg.dpc_bins)
    dd = [detect_decode_probs(comps[b], p_prev[b], msgs)
          for b in range(cfg.num_blocks)]
    return chain, comps, dd


def tin_rate(cfg: SystemConfig, p: CodingParams) -> RateBound:
    """Rate bound when the decoder treats the low-latency layer as noise."""
    tables = _block_snr_tables(cfg, p)
    if cfg.equal_gains:
        pd_wo, pd_w = _pure_kind_probs(cfg, p)
        pstar = float(chain_fixed_point(pd_wo, pd_w))
        comp = urllc_components(cfg, p, 0)
        msgs = float(cfg.urllc_msgs) * float(cfg.dpc_bins)
        dd = detect_decode_probs(comp, pstar, msgs)
        c_e, v_e = tin_mixture(cfg.num_streams, dd.p_dt,
                               tables["c1"][0] / cfg.num_streams,
                               tables["c2"][0] / cfg.num_streams,
                               tables["v1"][0] / cfg.num_streams,
                               tables["v2"][0] / cfg.num_streams)
        delta = delta_collapse(cfg.n, cfg.num_blocks, cfg.k_e,
                               cfg.berry_esseen_btilde, pstar,
                               float(_pow_msgs(comp.eps_tilde_1, msgs)),
                               comp.p_u2)
        return _assemble(cfg, c_e, v_e, delta)

    if cfg.num_blocks > MAX_ENUM_BLOCKS_TIN:
        raise ValueError(
            f"exact enumeration supports at most {MAX_ENUM_BLOCKS_TIN} blocks "
            "without equal_gains")
    chain, comps, dd = _per_block_inputs(cfg, p)
    eta = cfg.num_blocks
    base_c = float(np.sum(tables["c1"]))
    base_v = float(np.sum(tables["v1"]))
    dc = tables["c2"] - tables["c1"]
    dv = tables["v2"] - tables["v1"]
    c_e, v_e, _ = _subset_mixture_tin(eta, [d.p_dt for d in dd], base_c,
                                      base_v, dc, dv)
    delta = delta_e(cfg, chain, comps)
    return _assemble(cfg, c_e, v_e, delta)


def sic_rate(cfg: SystemConfig, p: CodingParams) -> RateBound:
    """Rate bound when correctly decoded low-latency layers are removed."""
    tables = _block_snr_tables(cfg, p)
    if cfg.equal_gains:
        pd_wo, pd_w = _pure_kind_probs(cfg, p)
        pstar = float(chain_fixed_point(pd_wo, pd_w))
        comp = urllc_components(cfg, p, 0)
        msgs = float(cfg.urllc_msgs) * float(cfg.dpc_bins)
        dd = detect_decode_probs(comp, pstar, msgs)
        q = cfg.num_streams
        c_e, v_e = sic_mixture(q, dd.p_dt, dd.p_dc,
                               tables["c1"][0] / q, tables["c2"][0] / q,
                               tables["c3"][0] / q, tables["v1"][0] / q,
                               tables["v2"][0] / q, tables["v3"][0] / q)
        delta = delta_collapse(cfg.n, cfg.num_blocks, cfg.k_e,
                               cfg.berry_esseen_btilde, pstar,
                               float(_pow_msgs(comp.eps_tilde_1, msgs)),
                               comp.p_u2)
        return _assemble(cfg, c_e, v_e, delta)

    if cfg.num_blocks > MAX_ENUM_BLOCKS_SIC:
        raise ValueError(
            f"exact subset-pair enumeration supports at most "
            f"{MAX_ENUM_BLOCKS_SIC} blocks without equal_gains")
    chain, comps, dd = _per_block_inputs(cfg, p)
    eta = cfg.num_blocks
    base_c = float(np.sum(tables["c1"]))
    base_v = float(np.sum(tables["v1"]))
    c_e, v_e, _ = _subset_mixture_sic(
        eta, [d.p_dt for d in dd], [d.p_dc for d in dd], base_c, base_v,
        tables["c2"] - tables["c1"], tables["v2"] - tables["v1"],
        tables["c3"] - tables["c1"], tables["v3"] - tables["v1"])
    delta = delta_e(cfg, chain, comps)
    return _assemble(cfg, c_e, v_e, delta)
