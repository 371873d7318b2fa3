"""Constrained grid-search maximization and the baseline access schemes.

The search follows the staged procedure: first the low-latency power/DPC
pair (alpha_u, beta_u) is screened against the reliability target in its
worst detection direction, then for each surviving pair the four remaining
axes are scanned exhaustively for the best broadband rate subject to the
per-block detection constraint.  A joint-search switch skips the screening
(the inner scan is exhaustive either way, so screening is the only staged
approximation).

The homogeneous (equal-gains) path evaluates whole parameter lattices as
numpy arrays through the same formula kernels used by the scalar contract
functions; the reported winner is always re-evaluated through the scalar
path, so every emitted row reproduces in isolation.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from itertools import product
from typing import Sequence, Union

import numpy as np

from .backend import thread_count
from .channel import BlockKind, CodingParams, SystemConfig, snr_set
from .errors import DegenerateStatisticError, NumericalFailureError
from .rate import (
    delta_collapse,
    rate_from_mixture,
    sic_mixture,
    sic_rate,
    tin_mixture,
    tin_rate,
)
from .reliability import error_terms, urllc_components, urllc_error_bound, urllc_snr_terms
from .sensing import chain_fixed_point, detection_chain, detection_probability
from .stats import capacity, dispersion

_LN2 = math.log(2.0)
RATE_TIE_TOL = 1e-12


class Scheme(Enum):
    DPC_TIN = "dpc-tin"
    DPC_SIC = "dpc-sic"
    POWER_SHARING_TIN = "power-sharing-tin"
    POWER_SHARING_SIC = "power-sharing-sic"
    TIME_SHARING = "time-sharing"


@dataclass(frozen=True)
class GridSpec:
    """Uniform [0, 1] lattice shared by every searched axis."""

    points_per_axis: int = 21

    def __post_init__(self):
        if self.points_per_axis < 2:
            raise ValueError("points_per_axis must be >= 2")

    def axis(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.points_per_axis)


@dataclass(frozen=True)
class TimeFractions:
    """Per-block channel-use split of the time-sharing baseline."""

    rho_s: float
    rho_u: float

    def as_vector(self):
        return (0.0, 0.0, 0.0, self.rho_u, self.rho_s, 0.0)


@dataclass(frozen=True)
class TradeoffPoint:
    scheme: Scheme
    eps_u: float
    pd_min: float
    params: Union[CodingParams, TimeFractions]
    rate_nats: float
    rate_bits: float
    urllc_eps_max: float
    detection_min: float
    feasible: bool

    def csv_params(self):
        """(alpha_u, beta_u, alpha_s1, beta_s1, alpha_s2, beta_s2) column
        values; the time-sharing baseline stores rho_u in the beta_u slot and
        rho_s in the beta_s1 slot."""
        if isinstance(self.params, TimeFractions):
            return (0.0, self.params.rho_u, 0.0, self.params.rho_s, 0.0, 0.0)
        p = self.params
        return (p.alpha_u, p.beta_u, p.alpha_s1, p.beta_s1, p.alpha_s2,
                p.beta_s2)


# ----------------------------------------------------------------------------
#  stage 1: reliability screening of (alpha_u, beta_u)
# ----------------------------------------------------------------------------

def _stage1_terms(cfg: SystemConfig, pairs: np.ndarray):
    """Reliability ingredients for an array of (alpha_u, beta_u) pairs.

    Returns per-pair arrays (eps1, eps_hat_pow, p_u1) and the shared scalar
    p_u2, evaluated block-wise-worst for heterogeneous gains.
    """
    msgs = float(cfg.urllc_msgs) * float(cfg.dpc_bins)
    ln_msgs = math.log(msgs)
    blocks = range(cfg.num_blocks) if not cfg.equal_gains else (0,)
    eps1 = np.zeros(len(pairs))
    p_u1 = np.zeros(len(pairs))
    for b in blocks:
        c_u, v_u = urllc_snr_terms(cfg, pairs[:, 0], pairs[:, 1], b)
        e1, _, _, pu1_b, _ = error_terms(cfg.block_len, c_u, v_u, ln_msgs,
                                         msgs, cfg.k_u, cfg.berry_esseen_b,
                                         cfg.berry_esseen_btilde)
        eps1 = np.maximum(eps1, e1)
        p_u1 = np.maximum(p_u1, pu1_b)
    _, eps2, _, _, p_u2 = error_terms(cfg.block_len, 1.0, 0.25, ln_msgs, msgs,
                                      cfg.k_u, cfg.berry_esseen_b,
                                      cfg.berry_esseen_btilde)
    return eps1, p_u1, float(p_u2)


def feasible_urllc_set(cfg: SystemConfig, grid: GridSpec):
    """(alpha_u, beta_u) grid points whose reliability bound holds for every
    block in the worst detection direction (both endpoints of the chain)."""
    axis = grid.axis()
    pairs = np.array(list(product(axis, axis)))
    _, p_u1, p_u2 = _stage1_terms(cfg, pairs)
    worst = np.maximum(p_u1, p_u2)
    return [tuple(pair) for pair, ok in zip(pairs, worst <= cfg.urllc_target)
            if ok]


# ----------------------------------------------------------------------------
#  incumbent tracking
# ----------------------------------------------------------------------------

class _CellState:
    """Running maximum, tie candidates, and least-violating fallback."""

    def __init__(self):
        self.best = -np.inf
        self.candidates = []  # (vec6, record)
        self.violation = np.inf
        self.fallback = None  # (viol, -objective, vec6, record)

    def offer(self, objective, vec, record):
        if objective > self.best + RATE_TIE_TOL:
            self.best = objective
            self.candidates = [(vec, record)]
        elif objective >= self.best - RATE_TIE_TOL:
            self.candidates.append((vec, record))
        if objective > self.best - RATE_TIE_TOL:
            self.candidates = [
                (v, r) for v, r in self.candidates
                if r["objective"] >= self.best - RATE_TIE_TOL]

    def offer_violation(self, viol, objective, vec, record):
        key = (viol, -objective, vec)
        if self.fallback is None or key < (self.violation,
                                           self.fallback[1],
                                           self.fallback[2]):
            self.violation = viol
            self.fallback = (viol, -objective, vec, record)

    def winner(self):
        if self.candidates:
            vec, record = min(self.candidates, key=lambda c: c[0])
            return vec, record, True
        if self.fallback is not None:
            return self.fallback[2], self.fallback[3], False
        return None, None, False


# ----------------------------------------------------------------------------
#  homogeneous lattice evaluation
# ----------------------------------------------------------------------------

def _pd_lattice_no_urllc(cfg, a_s1, b_s1):
    """Detection probability for each clean-block cell; NaN where the
    matched-filter degeneracy makes the statistic unrepresentable."""
    out = np.empty(a_s1.size)
    def one(i):
        p = CodingParams(0.0, float(a_s1[i]), 0.0, 0.0, float(b_s1[i]), 0.0)
        try:
            return detection_probability(cfg, p, BlockKind.NO_URLLC, 0)
        except DegenerateStatisticError:
            return np.nan
        except NumericalFailureError as err:
            raise NumericalFailureError(
                f"detection quantile failed at clean-block cell "
                f"alpha_s1={a_s1[i]!r}, beta_s1={b_s1[i]!r}: {err}",
                residual=err.residual) from err
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        for i, val in enumerate(pool.map(one, range(a_s1.size))):
            out[i] = val
    return out


def _pd_lattice_with_urllc(cfg, alpha_u, beta_u, a_s2, b_s2):
    out = np.empty(a_s2.size)
    def one(i):
        p = CodingParams(alpha_u, 0.0, float(a_s2[i]), beta_u, 0.0,
                         float(b_s2[i]))
        try:
            return detection_probability(cfg, p, BlockKind.WITH_URLLC, 0)
        except DegenerateStatisticError:
            return np.nan
        except NumericalFailureError as err:
            raise NumericalFailureError(
                f"detection quantile failed at busy-block cell "
                f"alpha_u={alpha_u!r}, beta_u={beta_u!r}, "
                f"alpha_s2={a_s2[i]!r}, beta_s2={b_s2[i]!r}: {err}",
                residual=err.residual) from err
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        for i, val in enumerate(pool.map(one, range(a_s2.size))):
            out[i] = val
    return out


def _evaluate_dpc(cfg: SystemConfig, mode: str, grid: GridSpec, queries,
                  power_sharing: bool, joint: bool):
    """Best point per (eps_u, pd_min) query for the precoded schemes."""
    if not cfg.equal_gains:
        return _evaluate_dpc_scalar(cfg, mode, grid, queries, power_sharing,
                                    joint)
    axis = grid.axis()
    lam = float(cfg.comm_gain_array()[0, 0])
    q = cfg.num_streams
    msgs = float(cfg.urllc_msgs) * float(cfg.dpc_bins)
    ln_ms = math.log(cfg.sense_codebook)

    if power_sharing:
        pair_list = np.array([(0.0, b) for b in axis])
        s1_a = np.zeros(axis.size)
        s1_b = axis.copy()
        s2_a = np.zeros(axis.size)
        s2_b = axis.copy()
    else:
        pair_list = np.array(list(product(axis, axis)))
        mesh = np.array(list(product(axis, axis)))
        s1_a, s1_b = mesh[:, 0], mesh[:, 1]
        s2_a, s2_b = mesh[:, 0].copy(), mesh[:, 1].copy()

    eps1_pair, p_u1_pair, p_u2 = _stage1_terms(cfg, pair_list)
    worst_pair = np.maximum(p_u1_pair, p_u2)
    if joint:
        active_pairs = np.ones(len(pair_list), dtype=bool)
    else:
        max_eps = max(eps for eps, _ in queries)
        active_pairs = worst_pair <= max_eps
        if not np.any(active_pairs):
            # nothing screens in: evaluate the least-violating pair so the
            # infeasible rows still carry a concrete attachment
            active_pairs[int(np.argmin(worst_pair))] = True

    # clean-block tables are pair-independent
    pd_wo = _pd_lattice_no_urllc(cfg, s1_a, s1_b)
    o1 = snr_set(lam, cfg.power, 0.0, s1_a, 0.0, 0.0, s1_b, 0.0)[1]
    c1, v1 = capacity(o1), dispersion(o1)

    states = {key: _CellState() for key in queries}
    msgs_f = msgs
    for idx in np.flatnonzero(active_pairs):
        alpha_u, beta_u = (float(pair_list[idx, 0]), float(pair_list[idx, 1]))
        c_u, v_u = urllc_snr_terms(cfg, alpha_u, beta_u, 0)
        eps1, eps2, eps_hat, p_u1, p_u2_s = error_terms(
            cfg.block_len, float(c_u), float(v_u), math.log(msgs_f), msgs_f,
            cfg.k_u, cfg.berry_esseen_b, cfg.berry_esseen_btilde)
        eps1_pow = float(np.exp(msgs_f * np.log(eps1)) if eps1 > 0 else 0.0)
        ehat_pow = float(np.exp(msgs_f * np.log(eps_hat)) if eps_hat > 0 else 0.0)
        p_dc = min(1.0, max(0.0, 1.0 - eps1 - eps2))

        pd_w = _pd_lattice_with_urllc(cfg, alpha_u, beta_u, s2_a, s2_b)

        o2 = snr_set(lam, cfg.power, alpha_u, 0.0, s2_a, beta_u, 0.0, s2_b)[2]
        c2, v2 = capacity(o2), dispersion(o2)
        sig_yv = 1.0 + lam * (1.0 - alpha_u ** 2) * (1.0 - beta_u) * cfg.power
        if cfg.sic_variance_variant == "s2_params":
            sig_s2v = 1.0 + lam * ((1.0 - alpha_u) ** 2 * (1.0 - s2_a) ** 2
                                   * (1.0 - beta_u) * (1.0 - s2_b) * cfg.power)
            o3 = (sig_yv - sig_s2v) / sig_s2v
            c3, v3 = capacity(o3)[None, :], dispersion(o3)[None, :]
        else:
            sig_s2v = 1.0 + lam * ((1.0 - alpha_u) ** 2 * (1.0 - s1_a) ** 2
                                   * (1.0 - beta_u) * (1.0 - s1_b) * cfg.power)
            o3 = (sig_yv - sig_s2v) / sig_s2v
            c3, v3 = capacity(o3)[:, None], dispersion(o3)[:, None]

        wo = pd_wo[:, None]
        w = pd_w[None, :]
        valid = ~(np.isnan(wo) | np.isnan(w))
        prev = np.zeros(np.broadcast(wo, w).shape)
        max_prev = np.zeros_like(prev)
        for b in range(cfg.num_blocks):
            if b > 0:
                max_prev = np.maximum(max_prev, prev)
            prev = prev * w + (1.0 - prev) * wo
        eps_max = p_u2_s + np.maximum(0.0, p_u1 - p_u2_s) * max_prev \
            + np.minimum(0.0, p_u1 - p_u2_s) * 0.0
        det_min = np.minimum(wo, w) + np.zeros_like(prev)
        p_star = chain_fixed_point(wo, w) + np.zeros_like(prev)

        p_dt = p_star * (1.0 - ehat_pow) + (1.0 - p_star) * p_u2_s
        delta = delta_collapse(cfg.n, cfg.num_blocks, cfg.k_e,
                               cfg.berry_esseen_btilde, p_star, eps1_pow,
                               p_u2_s)
        if mode == "tin":
            c_e, v_e = tin_mixture(q, p_dt, c1[:, None], c2[None, :],
                                   v1[:, None], v2[None, :])
        else:
            c_e, v_e = sic_mixture(q, p_dt, p_dc, c1[:, None], c2[None, :],
                                   c3, v1[:, None], v2[None, :], v3)
        rate, rate_ok = rate_from_mixture(c_e, v_e, cfg.n, cfg.embb_target,
                                          delta, cfg.k_e, ln_ms)
        objective = np.where(rate_ok & valid, np.maximum(rate, 0.0), -np.inf)

        for key in queries:
            eps_u, pd_min = key
            state = states[key]
            screened_out = (not joint) and max(p_u1, p_u2_s) > eps_u
            mask = valid & rate_ok & (eps_max <= eps_u) & (det_min >= pd_min)
            if screened_out:
                # staged procedure: this pair does not participate for the
                # query, but its cells may still anchor the least-violating
                # attachment of an infeasible row
                mask = np.zeros_like(mask)
            if np.any(mask):
                masked = np.where(mask, objective, -np.inf)
                m = float(masked.max())
                if m >= state.best - RATE_TIE_TOL:
                    for i, j in np.argwhere(masked >= m - RATE_TIE_TOL):
                        vec = (alpha_u, float(s1_a[i]), float(s2_a[j]),
                               beta_u, float(s1_b[i]), float(s2_b[j]))
                        record = {
                            "objective": float(masked[i, j]),
                            "rate": float(rate[i, j]),
                            "eps_max": float(eps_max[i, j]),
                            "det_min": float(det_min[i, j]),
                        }
                        state.offer(record["objective"], vec, record)
            else:
                viol = (np.maximum(0.0, eps_max - eps_u) / eps_u
                        + np.maximum(0.0, pd_min - det_min)
                        / max(pd_min, 1e-300))
                viol = np.where(valid, viol, np.inf)
                i, j = np.unravel_index(int(np.argmin(viol)), viol.shape)
                if np.isfinite(viol[i, j]):
                    vec = (alpha_u, float(s1_a[i]), float(s2_a[j]),
                           beta_u, float(s1_b[i]), float(s2_b[j]))
                    record = {
                        "objective": float(objective[i, j]),
                        "rate": float(rate[i, j]),
                        "eps_max": float(eps_max[i, j]),
                        "det_min": float(det_min[i, j]),
                    }
                    state.offer_violation(float(viol[i, j]),
                                          record["objective"], vec, record)
    return states


def _evaluate_dpc_scalar(cfg, mode, grid, queries, power_sharing, joint):
    """Reference path for heterogeneous gains: plain loops over the lattice."""
    axis = grid.axis()
    states = {key: _CellState() for key in queries}
    pairs = ([(0.0, b) for b in axis] if power_sharing
             else list(product(axis, axis)))
    pair_arr = np.array(pairs)
    _, p_u1_arr, p_u2 = _stage1_terms(cfg, pair_arr)
    s1_cells = ([(0.0, b) for b in axis] if power_sharing
                else list(product(axis, axis)))
    s2_cells = s1_cells
    for (alpha_u, beta_u), p_u1 in zip(pairs, p_u1_arr):
        for a1, b1 in s1_cells:
            for a2, b2 in s2_cells:
                p = CodingParams(alpha_u, a1, a2, beta_u, b1, b2)
                try:
                    point = evaluate_params(cfg, p, mode)
                except DegenerateStatisticError:
                    continue
                vec = p.as_vector()
                for key in queries:
                    eps_u, pd_min = key
                    state = states[key]
                    screened_out = (not joint
                                    and max(p_u1, p_u2) > eps_u)
                    if (not screened_out and point["rate_ok"]
                            and point["eps_max"] <= eps_u
                            and point["det_min"] >= pd_min):
                        state.offer(point["objective"], vec, point)
                    else:
                        viol = ((max(0.0, point["eps_max"] - eps_u) / eps_u)
                                + max(0.0, pd_min - point["det_min"])
                                / max(pd_min, 1e-300))
                        state.offer_violation(viol, point["objective"], vec,
                                              point)
    return states


def evaluate_params(cfg: SystemConfig, p: CodingParams, mode: str):
    """Scalar evaluation of one parameter vector: rate, constraint values.

    This is the reproduction path for emitted rows: it recomputes the exact
    quantities the search used, through the contract functions.
    """
    rate_fn = tin_rate if mode == "tin" else sic_rate
    chain = detection_chain(cfg, p)
    pd_wo = detection_probability(cfg, p, BlockKind.NO_URLLC, 0)
    pd_w = detection_probability(cfg, p, BlockKind.WITH_URLLC, 0)
    det_min = min(pd_wo, pd_w, float(chain.min()))
    prev = np.concatenate(([0.0], chain[:-1]))
    if cfg.equal_gains:
        comp = urllc_components(cfg, p, 0)
        eps_max = float(np.max(urllc_error_bound(comp, prev)))
    else:
        eps_max = float(max(
            urllc_error_bound(urllc_components(cfg, p, b), prev[b])
            for b in range(cfg.num_blocks)))
    bound = rate_fn(cfg, p)
    objective = max(bound.rate_nats, 0.0) if bound.feasible else -np.inf
    return {
        "objective": objective,
        "rate": bound.rate_nats if bound.feasible else np.nan,
        "eps_max": eps_max,
        "det_min": det_min,
        "rate_ok": bound.feasible,
    }


def _finish_point(cfg, scheme, mode, key, state):
    eps_u, pd_min = key
    vec, record, feasible = state.winner()
    if vec is None:
        params = CodingParams(0, 0, 0, 0, 0, 0)
        return TradeoffPoint(scheme, eps_u, pd_min, params, np.nan, np.nan,
                             np.nan, np.nan, False)
    params = CodingParams(alpha_u=vec[0], alpha_s1=vec[1], alpha_s2=vec[2],
                          beta_u=vec[3], beta_s1=vec[4], beta_s2=vec[5])
    # re-evaluate through the scalar path so the row reproduces in isolation
    point = evaluate_params(cfg, params, mode)
    rate = point["rate"]
    feas = (feasible and point["rate_ok"] and point["eps_max"] <= eps_u
            and point["det_min"] >= pd_min)
    return TradeoffPoint(scheme, eps_u, pd_min, params, rate,
                         rate / _LN2 if np.isfinite(rate) else np.nan,
                         point["eps_max"], point["det_min"], feas)


# ----------------------------------------------------------------------------
#  time-sharing baseline
# ----------------------------------------------------------------------------

def time_sharing_cell(cfg: SystemConfig, rho_s: float, rho_u: float):
    """Evaluate one (rho_s, rho_u) split; returns the same record shape as
    evaluate_params plus the segment lengths.

    Probing runs for floor(rho_s*l) uses at full power in every block (the
    statistic machinery sees it as an energy detector on the unknown
    full-power transmission); low-latency messages get floor(rho_u*l) uses at
    full power in flagged blocks; the broadband layer occupies the remainder
    interference-free.
    """
    if not cfg.equal_gains:
        raise ValueError("time sharing requires equal_gains")
    ell = cfg.block_len
    ell_s = int(rho_s * ell)
    ell_u = int(rho_u * ell)
    lam = float(cfg.comm_gain_array()[0, 0])
    q = cfg.num_streams
    msgs = float(cfg.urllc_msgs) * float(cfg.dpc_bins)
    geometry_ok = ell_s >= 1 and ell_u >= 1 and ell_s + ell_u <= ell

    # detection from the probing segment
    if ell_s >= 1:
        cfg_s = replace(cfg, block_len=ell_s)
        p_probe = CodingParams(0.0, 0.0, 0.0, 0.0, 1.0, 0.0)
        pd = detection_probability(cfg_s, p_probe, BlockKind.NO_URLLC, 0)
    else:
        pd = cfg.false_alarm
    det_min = pd

    # reliability from the low-latency segment
    if ell_u >= 1:
        cap_u = float(q * capacity(lam * cfg.power))
        disp_u = float(q * dispersion(lam * cfg.power))
        eps1, eps2, eps_hat, p_u1, p_u2 = error_terms(
            ell_u, cap_u, disp_u, math.log(msgs), msgs, cfg.k_u,
            cfg.berry_esseen_b, cfg.berry_esseen_btilde)
    else:
        eps1 = eps_hat = p_u1 = 1.0
        eps2 = p_u2 = 1.0
    eps_max = max(p_u2, pd * p_u1 + (1.0 - pd) * p_u2)

    eps1_pow = float(np.exp(msgs * np.log(eps1)) if eps1 > 0 else 0.0)
    ehat_pow = float(np.exp(msgs * np.log(eps_hat)) if eps_hat > 0 else 0.0)
    p_dt = pd * (1.0 - ehat_pow) + (1.0 - pd) * p_u2
    delta = delta_collapse(cfg.n, cfg.num_blocks, cfg.k_e,
                           cfg.berry_esseen_btilde, pd, eps1_pow, p_u2)

    frac_clean = max(ell - ell_s, 0) / ell
    frac_busy = max(ell - ell_s - ell_u, 0) / ell
    cap = float(capacity(lam * cfg.power))
    disp = float(dispersion(lam * cfg.power))
    c_e, v_e = tin_mixture(q, p_dt, frac_clean * cap, frac_busy * cap,
                           frac_clean * disp, frac_busy * disp)
    rate, rate_ok = rate_from_mixture(c_e, v_e, cfg.n, cfg.embb_target, delta,
                                      cfg.k_e, math.log(cfg.sense_codebook))
    rate = float(rate)
    objective = max(rate, 0.0) if rate_ok else -np.inf
    return {
        "objective": objective if geometry_ok else -np.inf,
        "rate": rate if rate_ok else np.nan,
        "eps_max": eps_max,
        "det_min": det_min,
        "rate_ok": bool(rate_ok),
        "geometry_ok": geometry_ok,
        "ell_s": ell_s,
        "ell_u": ell_u,
    }


def _evaluate_time_sharing(cfg: SystemConfig, grid: GridSpec, queries):
    axis = grid.axis()
    states = {key: _CellState() for key in queries}
    for rho_s in axis:
        for rho_u in axis:
            cell = time_sharing_cell(cfg, float(rho_s), float(rho_u))
            vec = (0.0, 0.0, 0.0, float(rho_u), float(rho_s), 0.0)
            for key in queries:
                eps_u, pd_min = key
                state = states[key]
                ok = (cell["geometry_ok"] and cell["rate_ok"]
                      and cell["eps_max"] <= eps_u
                      and cell["det_min"] >= pd_min)
                if ok:
                    state.offer(cell["objective"], vec, cell)
                elif cell["geometry_ok"]:
                    viol = (max(0.0, cell["eps_max"] - eps_u) / eps_u
                            + max(0.0, pd_min - cell["det_min"])
                            / max(pd_min, 1e-300))
                    state.offer_violation(viol, cell["objective"], vec, cell)
    out = {}
    for key, state in states.items():
        eps_u, pd_min = key
        vec, record, feasible = state.winner()
        if vec is None:
            out[key] = TradeoffPoint(Scheme.TIME_SHARING, eps_u, pd_min,
                                     TimeFractions(0.0, 0.0), np.nan, np.nan,
                                     np.nan, np.nan, False)
            continue
        params = TimeFractions(rho_s=vec[4], rho_u=vec[3])
        cell = time_sharing_cell(cfg, params.rho_s, params.rho_u)
        feas = (feasible and cell["rate_ok"] and cell["eps_max"] <= eps_u
                and cell["det_min"] >= pd_min)
        rate = cell["rate"]
        out[key] = TradeoffPoint(Scheme.TIME_SHARING, eps_u, pd_min, params,
                                 rate,
                                 rate / _LN2 if np.isfinite(rate) else np.nan,
                                 cell["eps_max"], cell["det_min"], feas)
    return out


# ----------------------------------------------------------------------------
#  public entry points
# ----------------------------------------------------------------------------

def _scheme_points(cfg: SystemConfig, scheme: Scheme, grid: GridSpec,
                   queries, joint=False):
    queries = list(queries)
    if scheme is Scheme.TIME_SHARING:
        return _evaluate_time_sharing(cfg, grid, queries)
    mode = "sic" if scheme in (Scheme.DPC_SIC, Scheme.POWER_SHARING_SIC) else "tin"
    ps = scheme in (Scheme.POWER_SHARING_TIN, Scheme.POWER_SHARING_SIC)
    states = _evaluate_dpc(cfg, mode, grid, queries, ps, joint)
    return {key: _finish_point(cfg, scheme, mode, key, state)
            for key, state in states.items()}


def optimize(cfg: SystemConfig, mode: str, grid: GridSpec,
             joint: bool = False) -> TradeoffPoint:
    """Best feasible point at the configuration's own targets."""
    if mode not in ("tin", "sic"):
        raise ValueError("mode must be 'tin' or 'sic'")
    scheme = Scheme.DPC_TIN if mode == "tin" else Scheme.DPC_SIC
    key = (cfg.urllc_target, cfg.detection_target)
    return _scheme_points(cfg, scheme, grid, [key], joint)[key]


def power_sharing_point(cfg: SystemConfig, mode: str,
                        grid: GridSpec) -> TradeoffPoint:
    """No-precoding baseline: alpha axes pinned to zero, beta axes searched."""
    scheme = (Scheme.POWER_SHARING_TIN if mode == "tin"
              else Scheme.POWER_SHARING_SIC)
    key = (cfg.urllc_target, cfg.detection_target)
    return _scheme_points(cfg, scheme, grid, [key])[key]


def time_sharing_point(cfg: SystemConfig, grid: GridSpec) -> TradeoffPoint:
    """Separated-tasks baseline searched over the two time fractions."""
    key = (cfg.urllc_target, cfg.detection_target)
    return _scheme_points(cfg, Scheme.TIME_SHARING, grid, [key])[key]


def sweep(cfg: SystemConfig, pd_grid: Sequence[float],
          eps_u_list: Sequence[float], schemes: Sequence[Scheme],
          grid: GridSpec, joint: bool = False):
    """Cross-product evaluation, rows ordered (scheme, eps_u, pd_min)."""
    if not len(pd_grid) or not len(eps_u_list):
        raise ValueError("pd_grid and eps_u_list must be nonempty")
    rows = []
    queries = [(float(e), float(d)) for e in eps_u_list for d in pd_grid]
    for scheme in schemes:
        points = _scheme_points(cfg, scheme, grid, queries, joint)
        for eps_u in eps_u_list:
            for pd_min in pd_grid:
                rows.append(points[(float(eps_u), float(pd_min))])
    return rows
