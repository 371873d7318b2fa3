"""Independent stochastic oracles for the analytic modules.

Trials are processed in fixed-size chunks, each driven by its own child
stream derived from a counter-based generator (Philox via SeedSequence), so
results are reproducible and independent of how chunks would be scheduled.

The detection oracle draws the per-layer transmit components independently
and uniformly on their power shells.  The precoded broadband component is
drawn directly on the norm window that the auxiliary-index search would
enforce, independent of the probing waveform (the standard precoding
approximation); the low-latency layer's codeword is drawn on its own shell
with its cross terms left random.  Those are exactly the correlation
conventions behind the analytic statistics, which is what makes this an
apples-to-apples oracle; the residual cross-term fluctuation is the reason
the agreement budget is 0.02 rather than Monte Carlo noise alone.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import anderson

from ._imhof import detection_stat
from .channel import BlockKind, CodingParams, SystemConfig, variance_set
from .sensing import detection_params
from .stats import GeneralizedChiSquare, gchisq_quantile

CHUNK = 16384


@dataclass(frozen=True)
class RngStream:
    """Reproducible stream identity: (seed, stream_id) -> generator.

    Identical pairs reproduce identical draws; distinct stream_ids give
    statistically independent streams.  ``child`` derives sub-streams for
    chunked or partitioned work.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index: int) -> "RngStream":
        return _ChildStream(self.seed, self.stream_id, index)


@dataclass(frozen=True)
class _ChildStream:
    seed: int
    stream_id: int
    index: int

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed,
                                    spawn_key=(self.stream_id, self.index))
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class DetectionEstimate:
    """Empirical exceedance frequencies with binomial standard errors."""

    p_d: float
    p_fa: float
    stderr_d: float
    stderr_fa: float
    trials: int
    threshold: float


def sample_shell(dim: int, radius: float, rng: RngStream) -> np.ndarray:
    """One point uniform on the sphere of squared norm radius**2."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    gen = rng.generator()
    if radius == 0.0:
        return np.zeros(dim)
    vec = gen.standard_normal(dim)
    norm = np.linalg.norm(vec)
    while norm == 0.0:  # essentially impossible; keeps the map total
        vec = gen.standard_normal(dim)
        norm = np.linalg.norm(vec)
    return vec * (radius / norm)


def _shell_batch(gen, count, dim, radius):
    vec = gen.standard_normal((count, dim))
    norms = np.linalg.norm(vec, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return vec * (radius / norms)


def _component_radii(cfg: SystemConfig, p: CodingParams, kind: BlockKind):
    ell, big_p = cfg.block_len, cfg.power
    if kind is BlockKind.NO_URLLC:
        # (precoded broadband, probing); coefficient of the probing waveform
        # inside the transmit sum is 1
        r_e = np.sqrt(ell * p.beta_s1 * big_p)
        r_s = np.sqrt(ell * (1.0 - p.beta_s1) * big_p)
        return None, r_e, r_s, 1.0
    r_v = np.sqrt(ell * (p.beta_u + p.alpha_u ** 2 * (1.0 - p.beta_u)) * big_p)
    r_e = np.sqrt(ell * (1.0 - p.beta_u) * p.beta_s2 * big_p)
    r_s = np.sqrt(ell * (1.0 - p.beta_u) * (1.0 - p.beta_s2) * big_p)
    return r_v, r_e, r_s, 1.0 - p.alpha_u


def mc_detection(cfg: SystemConfig, p: CodingParams, kind: BlockKind,
                 trials: int, rng: RngStream) -> DetectionEstimate:
    """Empirical detection/false-alarm rates of the per-block test.

    The threshold comes from the analytic null quantile, so the false-alarm
    estimate doubles as a calibration check of that quantile.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    det = detection_params(cfg, p, kind, 0)
    gains = cfg.sense_gain_array()[0]
    active = [j for j in range(cfg.num_streams) if j not in det.dropped]
    ell = cfg.block_len
    q = len(active)
    sigma_sq = np.array(det.sigma_sq)

    null = GeneralizedChiSquare(det.weights, ell, det.noncentralities_null)
    offset = float(np.sum(np.array(det.mu_norm_sq) / (sigma_sq - 1.0)))
    threshold = gchisq_quantile(null, 1.0 - cfg.false_alarm) - offset

    if kind is BlockKind.NO_URLLC:
        mu_coeff = (1.0 - p.alpha_s1)
    else:
        mu_coeff = (1.0 - p.alpha_u) * (1.0 - p.alpha_s2)
    r_v, r_e, r_s, comm_scale = _component_radii(cfg, p, kind)
    root_gain = np.sqrt(gains[active])[None, :, None]

    exceed_d = 0
    exceed_fa = 0
    done = 0
    chunk_index = 0
    while done < trials:
        count = min(CHUNK, trials - done)
        gen = rng.child(chunk_index).generator()
        # fixed draw order: probing, precoded broadband, low-latency layer,
        # then the two noise fields
        x_s = _shell_batch(gen, count * q, ell, r_s).reshape(count, q, ell)
        x_e = _shell_batch(gen, count * q, ell, r_e).reshape(count, q, ell)
        if r_v is None:
            x = x_e + x_s
        else:
            v = _shell_batch(gen, count * q, ell, r_v).reshape(count, q, ell)
            x = v + comm_scale * (x_e + x_s)
        noise_h1 = gen.standard_normal((count, q, ell))
        noise_h0 = gen.standard_normal((count, q, ell))

        mu = (np.sqrt(gains[active])[None, :, None] * mu_coeff) * x_s
        y_h1 = root_gain * x + noise_h1
        t_h1 = detection_stat(y_h1, mu, sigma_sq)
        t_h0 = detection_stat(noise_h0, mu, sigma_sq)
        exceed_d += int(np.sum(t_h1 > threshold))
        exceed_fa += int(np.sum(t_h0 > threshold))
        done += count
        chunk_index += 1

    p_d = exceed_d / trials
    p_fa = exceed_fa / trials
    return DetectionEstimate(
        p_d=p_d, p_fa=p_fa,
        stderr_d=np.sqrt(max(p_d * (1 - p_d), 1.0 / trials) / trials),
        stderr_fa=np.sqrt(max(p_fa * (1 - p_fa), 1.0 / trials) / trials),
        trials=trials, threshold=threshold)


def mc_info_density(cfg: SystemConfig, p: CodingParams, b: int, trials: int,
                    rng: RngStream):
    """Sample mean/variance and a normality statistic of the decoding metric.

    Draws the low-latency codeword on its shell, the effective noise Gaussian
    at the modeled conditional variance, and evaluates the Gaussian
    log-density ratio the threshold decoder uses.
    """
    if trials < 1000:
        raise ValueError("trials must be >= 1000")
    lam = cfg.comm_gain_array()[b]
    ell, big_p = cfg.block_len, cfg.power
    sig_y, sig_y_v = variance_set(lam, big_p, p.alpha_u, p.alpha_s1,
                                  p.alpha_s2, p.beta_u, p.beta_s1,
                                  p.beta_s2)[:2]
    r_v = np.sqrt(ell * (p.beta_u + p.alpha_u ** 2 * (1.0 - p.beta_u)) * big_p)
    q = cfg.num_streams

    values = np.empty(trials)
    done = 0
    chunk_index = 0
    while done < trials:
        count = min(CHUNK, trials - done)
        gen = rng.child(chunk_index).generator()
        v = _shell_batch(gen, count * q, ell, r_v).reshape(count, q, ell)
        z = gen.standard_normal((count, q, ell)) * np.sqrt(sig_y_v)[None, :, None]
        y = np.sqrt(lam)[None, :, None] * v + z
        log_ratio = (
            -0.5 * ell * np.log(sig_y_v / sig_y)[None, :]
            - np.einsum("ijk,ijk->ij", z, z) / (2.0 * sig_y_v[None, :])
            + np.einsum("ijk,ijk->ij", y, y) / (2.0 * sig_y[None, :]))
        values[done:done + count] = log_ratio.sum(axis=1)
        done += count
        chunk_index += 1

    mean_hat = float(np.mean(values))
    var_hat = float(np.var(values, ddof=1))
    if var_hat == 0.0:  # zero-gain channel: the metric is identically 0
        return mean_hat, var_hat, 0.0
    normality_stat = float(anderson(values, dist="norm").statistic)
    return mean_hat, var_hat, normality_stat


class EmpiricalCdf:
    """Queryable empirical CDF over a frozen sorted sample."""

    def __init__(self, samples: np.ndarray):
        self.samples = np.sort(samples)
        self.n = self.samples.size

    def cdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.n

    def quantile(self, p):
        idx = np.clip((np.asarray(p) * self.n).astype(int), 0, self.n - 1)
        return self.samples[idx]


def mc_gchisq_samples(d: GeneralizedChiSquare, trials: int,
                      rng: RngStream) -> EmpiricalCdf:
    """Sampling oracle for the weighted noncentral chi-square sum.

    Each component w*||Z + mu*e1||^2 (Z standard normal of the shared dof,
    ||mu||^2 the noncentrality) is drawn through the exact equivalent law
    w * NCX2(dof, noncentrality).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    out = np.empty(trials)
    done = 0
    chunk_index = 0
    while done < trials:
        count = min(CHUNK * 8, trials - done)
        gen = rng.child(chunk_index).generator()
        acc = np.zeros(count)
        for w, nu in zip(d.weights, d.noncentralities):
            acc += w * gen.noncentral_chisquare(d.dof, nu, size=count)
        out[done:done + count] = acc
        done += count
        chunk_index += 1
    return EmpiricalCdf(out)
