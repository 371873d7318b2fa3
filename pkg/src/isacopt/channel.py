"""System configuration, coding parameters, and derived variance/SNR terms.

All downstream analytics consume the quantities computed here: the receive
variances with and without knowledge of each signal layer, the per-layer SNR
ratios built from them, and the kappa power summaries used by the detection
statistics.  The helpers accept numpy scalars or broadcastable arrays for the
coding parameters so the grid optimizer can reuse the exact same formulas.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ConfigError


class BlockKind(Enum):
    """Whether the block carries a low-latency message on top of the rest."""
    NO_URLLC = "no_urllc"
    WITH_URLLC = "with_urllc"


@dataclass(frozen=True)
class CodingParams:
    """The six precancellation/power-split coefficients, each in [0, 1].

    alpha_u precancels everything from the low-latency layer; alpha_s1 and
    alpha_s2 precancel the probing waveform from the broadband layer in
    blocks without and with the low-latency message; beta_u splits power to
    the low-latency layer, beta_s1/beta_s2 split the remainder between the
    broadband and probing layers per block kind.
    """

    alpha_u: float
    alpha_s1: float
    alpha_s2: float
    beta_u: float
    beta_s1: float
    beta_s2: float

    def __post_init__(self):
        for name in ("alpha_u", "alpha_s1", "alpha_s2",
                     "beta_u", "beta_s1", "beta_s2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v!r} outside [0, 1]")

    def as_vector(self):
        """Deterministic ordering used for lexicographic tie-breaks."""
        return (self.alpha_u, self.alpha_s1, self.alpha_s2,
                self.beta_u, self.beta_s1, self.beta_s2)


@dataclass(frozen=True)
class SystemConfig:
    """Physical and protocol constants for one frame configuration.

    Noise variance is normalized to 1 and ``power`` is the per-use trace
    budget.  Eigenvalue arrays are (num_blocks x num_streams), nonincreasing
    across streams.  Probabilities are decimals in (0, 1).
    """

    power: float
    block_len: int
    num_blocks: int
    num_streams: int
    comm_eigenvalues: tuple
    sense_eigenvalues: tuple
    false_alarm: float
    embb_target: float
    urllc_target: float
    detection_target: float
    urllc_msgs: int
    dpc_bins: int
    sense_codebook: int
    k_u: float = 1.0
    k_e: float = 1.0
    berry_esseen_b: float = 0.0
    berry_esseen_btilde: float = 0.0
    equal_gains: bool = False
    sic_variance_variant: str = "as_written"
    detection_nu_variant: str = "exact"

    def __post_init__(self):
        if not (self.power > 0 and np.isfinite(self.power)):
            raise ConfigError("power must be positive", field="power")
        for name in ("block_len", "num_blocks", "num_streams",
                     "urllc_msgs", "dpc_bins", "sense_codebook"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer", field=name)
        for name in ("false_alarm", "embb_target", "urllc_target",
                     "detection_target"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must lie strictly inside (0, 1)",
                                  field=name)
        for name in ("k_u", "k_e"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive", field=name)
        for name in ("berry_esseen_b", "berry_esseen_btilde"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative", field=name)
        if self.sic_variance_variant not in ("as_written", "s2_params"):
            raise ConfigError("sic_variance_variant must be 'as_written' or "
                              "'s2_params'", field="sic_variance_variant")
        if self.detection_nu_variant not in ("exact", "kappa"):
            raise ConfigError("detection_nu_variant must be 'exact' or 'kappa'",
                              field="detection_nu_variant")

        for name in ("comm_eigenvalues", "sense_eigenvalues"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.num_blocks, self.num_streams):
                raise ConfigError(
                    f"{name} must have shape ({self.num_blocks}, "
                    f"{self.num_streams}), got {arr.shape}", field=name)
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ConfigError(f"{name} must be finite and nonnegative",
                                  field=name)
            if np.any(np.diff(arr, axis=1) > 1e-12):
                raise ConfigError(f"{name} must be nonincreasing across streams",
                                  field=name)
            object.__setattr__(self, name,
                               tuple(tuple(row) for row in arr.tolist()))
        if self.equal_gains:
            for name in ("comm_eigenvalues", "sense_eigenvalues"):
                arr = np.asarray(getattr(self, name))
                if arr.size and np.ptp(arr) > 0:
                    raise ConfigError(
                        f"equal_gains set but {name} is not constant", field=name)

    @classmethod
    def homogeneous(cls, *, power, block_len, num_blocks, num_streams,
                    comm_gain, sense_gain, **kwargs):
        """Configuration with one gain per link shared by every block/stream."""
        comm = [[float(comm_gain)] * num_streams] * num_blocks
        sense = [[float(sense_gain)] * num_streams] * num_blocks
        return cls(power=power, block_len=block_len, num_blocks=num_blocks,
                   num_streams=num_streams, comm_eigenvalues=comm,
                   sense_eigenvalues=sense, equal_gains=True, **kwargs)

    @property
    def n(self) -> int:
        """Total frame length in channel uses."""
        return self.num_blocks * self.block_len

    def comm_gain_array(self):
        return np.asarray(self.comm_eigenvalues, dtype=float)

    def sense_gain_array(self):
        return np.asarray(self.sense_eigenvalues, dtype=float)

    def with_targets(self, *, urllc_target=None, detection_target=None):
        updates = {}
        if urllc_target is not None:
            updates["urllc_target"] = urllc_target
        if detection_target is not None:
            updates["detection_target"] = detection_target
        return replace(self, **updates)


def channel_eigenvalues(channel_matrix: Sequence[Sequence[complex]],
                        num_streams: int) -> np.ndarray:
    """Top eigenvalues of H H^H in descending order (convenience helper).

    The analytics take eigenvalues directly; this exists for callers holding
    a raw channel matrix.
    """
    h = np.asarray(channel_matrix)
    gram = h @ h.conj().T
    ev = np.linalg.eigvalsh(gram)[::-1].real
    ev = np.clip(ev, 0.0, None)
    if num_streams > ev.size:
        raise ValueError("num_streams exceeds the channel rank bound")
    return ev[:num_streams]


# ----------------------------------------------------------------------------
#  kappa power summaries
# ----------------------------------------------------------------------------

def kappas(p: CodingParams, kind: BlockKind):
    """(kappa1, kappa2): broadband-layer and low-latency-layer power factors.

    kappa1 is the fraction of the block's non-probing power that the probing
    receiver can remove thanks to precancellation; kappa2 rescales for the
    low-latency layer present in WITH_URLLC blocks.
    """
    if kind is BlockKind.NO_URLLC:
        k1 = (1.0 - p.alpha_s1 ** 2) * (1.0 - p.beta_s1)
        k2 = 1.0
    else:
        k1 = (1.0 - p.alpha_s2 ** 2) * (1.0 - p.beta_s2)
        k2 = (1.0 - p.beta_u) * (1.0 - p.alpha_u) ** 2
    return k1, k2


# ----------------------------------------------------------------------------
#  receive variances and SNR ratios (array-friendly kernels)
# ----------------------------------------------------------------------------

def variance_set(lam, power, alpha_u, alpha_s1, alpha_s2, beta_u, beta_s1,
                 beta_s2, sic_variant="as_written"):
    """All five receive variances for gain(s) ``lam``; broadcasts over inputs.

    Returns (sig_y, sig_y_v, sig_y_s1, sig_y_s2, sig_y_s2v): unconditional,
    given the low-latency codeword, given the clean-block broadband codeword,
    given the busy-block broadband codeword, and given both busy-block
    broadband and low-latency codewords.
    """
    lam = np.asarray(lam, dtype=float)
    sig_y = 1.0 + lam * power
    sig_y_v = 1.0 + lam * (1.0 - alpha_u ** 2) * (1.0 - beta_u) * power
    sig_y_s1 = 1.0 + lam * (1.0 - alpha_s1 ** 2) * (1.0 - beta_s1) * power
    sig_y_s2 = 1.0 + lam * power * (
        1.0 - (1.0 - alpha_u) ** 2 * (1.0 - beta_u)
        * (1.0 - (1.0 - alpha_s2 ** 2) * (1.0 - beta_s2)))
    if sic_variant == "s2_params":
        sig_y_s2v = 1.0 + lam * ((1.0 - alpha_u) ** 2 * (1.0 - alpha_s2) ** 2
                                 * (1.0 - beta_u) * (1.0 - beta_s2) * power)
    else:
        sig_y_s2v = 1.0 + lam * ((1.0 - alpha_u) ** 2 * (1.0 - alpha_s1) ** 2
                                 * (1.0 - beta_u) * (1.0 - beta_s1) * power)
    return sig_y, sig_y_v, sig_y_s1, sig_y_s2, sig_y_s2v


def snr_set(lam, power, alpha_u, alpha_s1, alpha_s2, beta_u, beta_s1, beta_s2,
            sic_variant="as_written"):
    """(omega_u, omega1, omega2, omega3) SNR ratios; broadcasts over inputs.

    omega_u drives the low-latency decoder; omega1/omega2 are the broadband
    SNRs in clean/busy blocks with interference treated as noise; omega3 is
    the busy-block broadband SNR after the low-latency layer is removed.
    """
    sig_y, sig_y_v, sig_y_s1, sig_y_s2, sig_y_s2v = variance_set(
        lam, power, alpha_u, alpha_s1, alpha_s2, beta_u, beta_s1, beta_s2,
        sic_variant)
    omega_u = (sig_y - sig_y_v) / sig_y_v
    omega1 = (sig_y - sig_y_s1) / sig_y_s1
    omega2 = (sig_y - sig_y_s2) / sig_y_s2
    omega3 = (sig_y_v - sig_y_s2v) / sig_y_s2v
    return omega_u, omega1, omega2, omega3


@dataclass(frozen=True)
class VarianceSet:
    sig_y: float
    sig_y_v: float
    sig_y_s1: float
    sig_y_s2: float
    sig_y_s2v: float


@dataclass(frozen=True)
class SnrRatios:
    urllc: float
    embb_clean: float
    embb_tin: float
    embb_sic: float


def comm_variances(cfg: SystemConfig, p: CodingParams, b: int, j: int) -> VarianceSet:
    """Receive variances for block ``b``, stream ``j`` (zero-based)."""
    lam = cfg.comm_gain_array()[b, j]
    vals = variance_set(lam, cfg.power, p.alpha_u, p.alpha_s1, p.alpha_s2,
                        p.beta_u, p.beta_s1, p.beta_s2,
                        cfg.sic_variance_variant)
    return VarianceSet(*(float(v) for v in vals))


def snr_ratios(cfg: SystemConfig, p: CodingParams, b: int, j: int) -> SnrRatios:
    """SNR ratios for block ``b``, stream ``j`` (zero-based)."""
    lam = cfg.comm_gain_array()[b, j]
    vals = snr_set(lam, cfg.power, p.alpha_u, p.alpha_s1, p.alpha_s2,
                   p.beta_u, p.beta_s1, p.beta_s2, cfg.sic_variance_variant)
    return SnrRatios(*(float(v) for v in vals))
