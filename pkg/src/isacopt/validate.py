"""Seeded Monte Carlo validation suite wired to the CLI.

Every check compares an analytic quantity with its stochastic oracle under a
trial-count-aware tolerance, so the suite still evaluates (with wide bands)
when run with tiny --trials values.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import BlockKind, CodingParams, SystemConfig
from .montecarlo import RngStream, mc_detection, mc_gchisq_samples, mc_info_density, sample_shell
from .reliability import urllc_components
from .sensing import detection_params, detection_probability
from .stats import GeneralizedChiSquare, gchisq_cdf

DEFAULT_TRIALS = 10 ** 5
DEFAULT_SEED = 20250811


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    expected: float
    tolerance: float

    def line(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict}  {self.name}: measured={self.measured:.6g} "
                f"expected={self.expected:.6g} tol={self.tolerance:.3g}")


def _dkw_band(n, alpha=0.01):
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def _mc_cfg(false_alarm=1e-2):
    return SystemConfig.homogeneous(
        power=0.5, block_len=150, num_blocks=10, num_streams=1, comm_gain=1.0,
        sense_gain=1.0, false_alarm=false_alarm, embb_target=1e-3,
        urllc_target=1e-2, detection_target=0.5, urllc_msgs=16, dpc_bins=256,
        sense_codebook=256, k_u=2.0)


def check_gchisq_sampling(trials, seed):
    """Analytic CDF within the 99% DKW band of the sampling oracle."""
    results = []
    cases = [
        ("gchisq central", GeneralizedChiSquare([1.0], 150, [0.0])),
        ("gchisq mixed", GeneralizedChiSquare([0.3, 0.7], 150, [2.5, 10.0])),
    ]
    band = _dkw_band(trials) + 1e-4
    for i, (name, dist) in enumerate(cases):
        emp = mc_gchisq_samples(dist, trials, RngStream(seed, 100 + i))
        probes = emp.quantile(np.linspace(0.002, 0.998, 199))
        gap = max(abs(gchisq_cdf(dist, float(x)) - float(emp.cdf(float(x))))
                  for x in probes)
        results.append(CheckResult(name, gap <= band, gap, 0.0, band))
    return results


def _mixture_allowance(cfg, p, kind):
    """Bound on the analytic-vs-simulated detection gap from codeword
    cross terms.

    The analytic alternative law fixes the statistic's noncentrality at the
    mean over codewords, while the simulation realizes it per trial with
    variance from the inner products of independent shell draws.  A Taylor
    bound with |Q''| <= 0.242 gives |gap| <= 0.121 * w^2 Var(nu) / sigma_T^2
    per merged stream; the factor below doubles it to absorb the matching
    second-order width effects.
    """
    from .montecarlo import _component_radii
    det = detection_params(cfg, p, kind, 0)
    gains = cfg.sense_gain_array()[0]
    active = [j for j in range(cfg.num_streams) if j not in det.dropped]
    r_v, r_e, r_s, comm_scale = _component_radii(cfg, p, kind)
    ell = cfg.block_len
    var_shift = 0.0
    var_total = 0.0
    for w, sig, gamma in zip(det.weights, det.sigma_sq, gains[active]):
        c_ratio = sig / (sig - 1.0)
        if kind is BlockKind.NO_URLLC:
            coef = p.alpha_s1 + c_ratio * (1.0 - p.alpha_s1)
            var_nu = gamma ** 2 * 4.0 / ell * (coef * r_s * r_e) ** 2
        else:
            coef = p.alpha_s2 + c_ratio * (1.0 - p.alpha_s2)
            var_nu = gamma ** 2 * 4.0 / ell * (
                (comm_scale * r_v * r_e) ** 2
                + (comm_scale * coef * r_v * r_s) ** 2
                + (comm_scale ** 2 * coef * r_e * r_s) ** 2)
        var_shift += w ** 2 * var_nu
        var_total += w ** 2 * 2.0 * (ell + 2.0 * max(det.noncentralities_alt))
    return 0.25 * var_shift / max(var_total, 1e-300)


def check_detection(trials, seed):
    """Empirical detection within budget of the analytic value, and the
    empirical false alarm within 3 binomial stderr of the target.

    The budget is 0.02 plus the analytic cross-term allowance (see
    _mixture_allowance) plus the binomial error, so the check stays sharp yet
    seed-robust even for draws landing on the steep part of the curve.
    """
    cfg = _mc_cfg()
    draw = np.random.default_rng(seed)
    results = []
    for kind in (BlockKind.NO_URLLC, BlockKind.WITH_URLLC):
        for rep in range(3):
            p = CodingParams(*np.round(draw.uniform(0.05, 0.95, 6), 3))
            ana = detection_probability(cfg, p, kind, 0)
            est = mc_detection(cfg, p, kind, trials,
                               RngStream(seed, 200 + rep))
            tol = (0.02 + _mixture_allowance(cfg, p, kind)
                   + 3.0 * math.sqrt(0.25 / trials))
            results.append(CheckResult(
                f"detection {kind.value} draw{rep}",
                abs(est.p_d - ana) <= tol, est.p_d, ana, tol))
            fa_tol = 3.0 * est.stderr_fa
            results.append(CheckResult(
                f"false alarm {kind.value} draw{rep}",
                abs(est.p_fa - cfg.false_alarm) <= fa_tol, est.p_fa,
                cfg.false_alarm, fa_tol))
    return results


def check_metric_gaussianity(trials, seed):
    """Decoding-metric sample mean and variance against the stated moments."""
    cfg = _mc_cfg()
    p = CodingParams(0.0, 0.5, 0.5, 0.5, 0.5, 0.5)
    comp = urllc_components(cfg, p, 0)
    target_mean = cfg.block_len * comp.c_u
    target_var = cfg.block_len * comp.v_u
    mean_hat, var_hat, _ = mc_info_density(cfg, p, 0, max(trials, 1000),
                                           RngStream(seed, 300))
    mean_tol = 0.01 * target_mean + 4.0 * math.sqrt(target_var / trials)
    var_tol = 0.10 * target_var + 4.0 * target_var * math.sqrt(2.0 / trials)
    return [
        CheckResult("metric mean", abs(mean_hat - target_mean) <= mean_tol,
                    mean_hat, target_mean, mean_tol),
        CheckResult("metric variance", abs(var_hat - target_var) <= var_tol,
                    var_hat, target_var, var_tol),
    ]


def check_shell_moments(trials, seed):
    """Uniform-shell coordinate moments against the analytic sphere values.

    Standard errors come from the exact sphere moments (Var x_i = r^2/d,
    Var x_i^2 = 2(d-1)/(d+2) * r^4/d^2), so the bands stay meaningful at any
    trial count; the draw count is floored because the check is cheap and a
    maximum over 150 coordinates needs a minimally stable sample.
    """
    dim, radius = 150, math.sqrt(75.0)
    draws = min(max(trials, 2000), 20000)
    coords = np.stack([sample_shell(dim, radius, RngStream(seed, 400 + i))
                       for i in range(draws)])
    worst_norm = float(np.max(np.abs(np.sum(coords ** 2, axis=1)
                                     - radius ** 2))) / radius ** 2
    mean_se = radius / math.sqrt(dim * draws)
    mean_dev = float(np.max(np.abs(np.mean(coords, axis=0))))
    sq_se = math.sqrt(2.0 * (dim - 1) / (dim + 2)) * radius ** 2 / dim \
        / math.sqrt(draws)
    sq_dev = float(np.max(np.abs(np.mean(coords ** 2, axis=0)
                                 - radius ** 2 / dim)))
    # 4 sigma per coordinate plus a Bonferroni-style bump for the maximum
    # over the 150 coordinates
    z = 4.0 + math.sqrt(2.0 * math.log(dim)) / 2.0
    return [
        CheckResult("shell norm", worst_norm <= 1e-12, worst_norm, 0.0, 1e-12),
        CheckResult("shell coordinate mean", mean_dev <= z * mean_se,
                    mean_dev, 0.0, z * mean_se),
        CheckResult("shell coordinate power", sq_dev <= z * sq_se,
                    sq_dev, 0.0, z * sq_se),
    ]


def run_validation(trials=DEFAULT_TRIALS, seed=DEFAULT_SEED):
    results = []
    results += check_gchisq_sampling(trials, seed)
    results += check_detection(trials, seed)
    results += check_metric_gaussianity(trials, seed)
    results += check_shell_moments(trials, seed)
    return results
