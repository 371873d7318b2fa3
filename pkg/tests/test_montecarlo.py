"""Stochastic-oracle tests: shells, detection trials, metric moments."""

import math

import numpy as np
import pytest
from scipy.stats import chi2

from isacopt.channel import BlockKind, CodingParams, SystemConfig
from isacopt.errors import DegenerateStatisticError
from isacopt.montecarlo import (
    RngStream,
    mc_detection,
    mc_gchisq_samples,
    mc_info_density,
    sample_shell,
)
from isacopt.reliability import urllc_components
from isacopt.sensing import detection_probability
from isacopt.stats import GeneralizedChiSquare, gchisq_cdf


def make_cfg(sense_gain=1.0, false_alarm=1e-2, num_streams=1, comm_gain=1.0):
    return SystemConfig.homogeneous(
        power=0.5, block_len=150, num_blocks=10, num_streams=num_streams,
        comm_gain=comm_gain, sense_gain=sense_gain, false_alarm=false_alarm,
        embb_target=1e-3, urllc_target=1e-2, detection_target=0.5,
        urllc_msgs=16, dpc_bins=256, sense_codebook=256, k_u=2.0)


MID = CodingParams(0.5, 0.5, 0.5, 0.5, 0.5, 0.5)


# ----------------------------------------------------------------------------
#  power-shell sampling
# ----------------------------------------------------------------------------

def test_shell_zero_radius():
    assert np.all(sample_shell(8, 0.0, RngStream(1)) == 0.0)


def test_shell_norm_invariant():
    for i in range(50):
        v = sample_shell(150, 3.0, RngStream(2, i))
        assert abs(v @ v - 9.0) <= 1e-12 * 9.0


def test_shell_reproducible_and_streams_differ():
    a = sample_shell(32, 1.0, RngStream(3, 5))
    b = sample_shell(32, 1.0, RngStream(3, 5))
    c = sample_shell(32, 1.0, RngStream(3, 6))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_shell_moments():
    dim, radius, n = 150, math.sqrt(75.0), 20000
    coords = np.stack([sample_shell(dim, radius, RngStream(4, i))
                       for i in range(n)])
    se_mean = np.std(coords, axis=0, ddof=1) / math.sqrt(n)
    assert np.all(np.abs(coords.mean(axis=0)) <= 4.0 * se_mean)
    sq = coords ** 2
    se_sq = np.std(sq, axis=0, ddof=1) / math.sqrt(n)
    assert np.all(np.abs(sq.mean(axis=0) - radius ** 2 / dim) <= 4.0 * se_sq)


def test_shell_validation():
    with pytest.raises(ValueError):
        sample_shell(0, 1.0, RngStream(1))
    with pytest.raises(ValueError):
        sample_shell(4, -1.0, RngStream(1))


# ----------------------------------------------------------------------------
#  detection trials
# ----------------------------------------------------------------------------

def test_mc_detection_near_zero_gain_hypotheses_coincide():
    cfg = make_cfg(sense_gain=1e-9)
    est = mc_detection(cfg, MID, BlockKind.NO_URLLC, 20000, RngStream(5))
    band = 3.0 * math.sqrt(est.p_fa * (1 - est.p_fa) / est.trials +
                           est.p_d * (1 - est.p_d) / est.trials)
    assert abs(est.p_d - est.p_fa) <= band + 1e-3


def test_mc_detection_zero_gain_propagates_degenerate():
    cfg = make_cfg(sense_gain=0.0)
    with pytest.raises(DegenerateStatisticError):
        mc_detection(cfg, MID, BlockKind.NO_URLLC, 100, RngStream(5))


def test_mc_detection_false_alarm_calibration_at_half():
    cfg = make_cfg(false_alarm=0.5)
    est = mc_detection(cfg, MID, BlockKind.WITH_URLLC, 20000, RngStream(6))
    assert abs(est.p_fa - 0.5) <= 3.0 * est.stderr_fa


def test_mc_detection_tracks_analytic_probability():
    cfg = make_cfg()
    for i, kind in enumerate(BlockKind):
        ana = detection_probability(cfg, MID, kind, 0)
        est = mc_detection(cfg, MID, kind, 20000, RngStream(7, i))
        assert abs(est.p_d - ana) <= 0.03
        assert abs(est.p_fa - cfg.false_alarm) <= 3.0 * est.stderr_fa


def test_mc_detection_deterministic():
    cfg = make_cfg()
    a = mc_detection(cfg, MID, BlockKind.NO_URLLC, 5000, RngStream(8))
    b = mc_detection(cfg, MID, BlockKind.NO_URLLC, 5000, RngStream(8))
    assert a == b


# ----------------------------------------------------------------------------
#  decoding-metric sampling
# ----------------------------------------------------------------------------

def test_info_density_zero_gain_degenerates_to_zero():
    cfg = make_cfg(comm_gain=0.0)
    mean, var, stat = mc_info_density(cfg, MID, 0, 2000, RngStream(9))
    assert mean == 0.0 and var == 0.0


def test_info_density_matches_stated_moments():
    cfg = make_cfg()
    p = CodingParams(0.0, 0.5, 0.5, 0.5, 0.5, 0.5)
    comp = urllc_components(cfg, p, 0)
    n = 30000
    mean, var, stat = mc_info_density(cfg, p, 0, n, RngStream(10))
    target_mean = cfg.block_len * comp.c_u
    target_var = cfg.block_len * comp.v_u
    assert abs(mean - target_mean) <= 0.01 * target_mean + 4 * math.sqrt(target_var / n)
    assert abs(var - target_var) <= 0.10 * target_var
    assert np.isfinite(stat)


def test_info_density_deterministic():
    cfg = make_cfg()
    a = mc_info_density(cfg, MID, 0, 2000, RngStream(11))
    b = mc_info_density(cfg, MID, 0, 2000, RngStream(11))
    assert a == b


def test_info_density_trial_floor():
    cfg = make_cfg()
    with pytest.raises(ValueError):
        mc_info_density(cfg, MID, 0, 10, RngStream(11))


# ----------------------------------------------------------------------------
#  chi-square sampling oracle
# ----------------------------------------------------------------------------

def test_gchisq_samples_exponential_median():
    d = GeneralizedChiSquare([0.5], 2, [0.0])
    n = 10 ** 5
    emp = mc_gchisq_samples(d, n, RngStream(12))
    med = float(emp.quantile(0.5))
    # density at the median is 1/2, so the median stderr is ~1/sqrt(n)
    assert abs(med - math.log(2.0)) <= 3.0 / math.sqrt(n)


def test_gchisq_samples_central_case_quantiles():
    d = GeneralizedChiSquare([1.0], 40, [0.0])
    n = 10 ** 5
    emp = mc_gchisq_samples(d, n, RngStream(13))
    for p in np.linspace(0.05, 0.95, 11):
        x = chi2.ppf(p, 40)
        se = math.sqrt(p * (1 - p) / n)
        assert abs(emp.cdf(x) - p) <= 3.0 * se + 1e-4


def test_gchisq_samples_dkw_band_against_analytic():
    d = GeneralizedChiSquare([0.4, 0.6], 150, [4.0, 25.0])
    n = 10 ** 6
    emp = mc_gchisq_samples(d, n, RngStream(14))
    band = math.sqrt(math.log(2 / 0.01) / (2 * n)) + 1e-4
    probes = emp.quantile(np.linspace(0.001, 0.999, 101))
    for x in probes:
        assert abs(gchisq_cdf(d, float(x)) - emp.cdf(float(x))) <= band
