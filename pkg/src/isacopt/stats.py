"""Special functions and the generalized chi-square distribution.

Everything here works in natural logarithms; rates derived downstream are in
nats per channel use and only converted to bits at the output layer.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special as sp
from scipy.optimize import brentq

from . import _imhof
from .errors import NumericalFailureError

# Quadrature defaults: tail accuracy well under the 1e-9 contract, with the
# evaluation budget acting as the failure backstop.
IMHOF_ABS_TOL = 1e-10
IMHOF_MAX_EVALS = 10 ** 6
QUANTILE_PROB_TOL = 1e-9


def q_func(x):
    """Gaussian tail probability Q(x) = 0.5*erfc(x/sqrt(2))."""
    return 0.5 * sp.erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def q_inv(p):
    """Inverse of q_func; strictly decreasing on (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("q_inv requires probabilities strictly inside (0, 1)")
    return np.sqrt(2.0) * sp.erfcinv(2.0 * p)


def capacity(x):
    """Gaussian channel capacity 0.5*ln(1+x) in nats."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("capacity requires a nonnegative SNR")
    return 0.5 * np.log1p(x)


def dispersion(x):
    """Channel dispersion x(2+x) / (2(1+x)^2); increases from 0 to 1/2."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("dispersion requires a nonnegative SNR")
    return x * (2.0 + x) / (2.0 * (1.0 + x) ** 2)


@dataclass(frozen=True)
class GeneralizedChiSquare:
    """Weighted sum of independent noncentral chi-squares, shared dof.

    Represents  sum_j weights[j] * NCX2(dof, noncentralities[j]).  Negative
    weights are accepted by the CDF machinery even though the detection
    statistics only produce weights in (0, 1).
    """

    weights: tuple
    dof: int
    noncentralities: tuple

    def __init__(self, weights: Sequence[float], dof: int,
                 noncentralities: Sequence[float]):
        weights = tuple(float(v) for v in weights)
        noncentralities = tuple(float(v) for v in noncentralities)
        if len(weights) != len(noncentralities) or len(weights) < 1:
            raise ValueError("weights and noncentralities must have equal length >= 1")
        if int(dof) < 1 or int(dof) != dof:
            raise ValueError("dof must be a positive integer")
        for w in weights:
            if not np.isfinite(w) or w == 0.0:
                raise ValueError("weights must be finite and nonzero")
        for nu in noncentralities:
            if not (np.isfinite(nu) and nu >= 0.0):
                raise ValueError("noncentralities must be finite and nonnegative")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "dof", int(dof))
        object.__setattr__(self, "noncentralities", noncentralities)

    def _arrays(self):
        """Canonical (w, dof, nc) arrays with equal-weight components merged."""
        groups = {}
        for w, nu in zip(self.weights, self.noncentralities):
            d, n = groups.get(w, (0.0, 0.0))
            groups[w] = (d + self.dof, n + nu)
        ws = np.array(sorted(groups), dtype=float)
        dofs = np.array([groups[w][0] for w in ws], dtype=float)
        ncs = np.array([groups[w][1] for w in ws], dtype=float)
        return ws, dofs, ncs

    def mean(self):
        w = np.array(self.weights)
        nu = np.array(self.noncentralities)
        return float(np.sum(w * (self.dof + nu)))

    def std(self):
        w = np.array(self.weights)
        nu = np.array(self.noncentralities)
        return float(np.sqrt(np.sum(w * w * (2.0 * self.dof + 4.0 * nu))))

    def skewness(self):
        w = np.array(self.weights)
        nu = np.array(self.noncentralities)
        mu3 = float(np.sum(w ** 3 * (8.0 * self.dof + 24.0 * nu)))
        return mu3 / max(self.std(), 1e-300) ** 3


def gchisq_cdf(d: GeneralizedChiSquare, x: float,
               tol: float = IMHOF_ABS_TOL, max_evals: int = IMHOF_MAX_EVALS) -> float:
    """CDF of the weighted noncentral chi-square sum at x.

    Adaptive Imhof inversion with an explicit truncation bound; raises
    NumericalFailureError (with the residual) when the evaluation budget is
    exhausted before the tolerance is met.
    """
    w, dofs, ncs = d._arrays()
    x = float(x)
    if np.all(w > 0.0) and x <= 0.0:
        return 0.0
    if np.all(w < 0.0) and x >= 0.0:
        return 1.0
    val, err, _ = _imhof.imhof_cdf(x, w, dofs, ncs, tol, max_evals)
    if not np.isfinite(val) or err > max(tol, 1e-9):
        raise NumericalFailureError(
            f"chi-square quadrature did not converge at x={x!r} "
            f"(residual {err:.3e})", residual=err)
    return min(1.0, max(0.0, val))


def gchisq_quantile(d: GeneralizedChiSquare, p: float,
                    tol: float = IMHOF_ABS_TOL,
                    max_evals: int = IMHOF_MAX_EVALS) -> float:
    """x with gchisq_cdf(d, x) = p, to within 1e-9 in probability.

    Bracketing root search; brackets grow from mean +/- k*std until the
    target probability is enclosed.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError("quantile requires a probability strictly inside (0, 1)")
    mean, std = d.mean(), d.std()
    std = max(std, 1e-12 * max(abs(mean), 1.0))
    positive = all(w > 0.0 for w in d.weights)

    def f(x):
        return gchisq_cdf(d, x, tol=tol, max_evals=max_evals) - p

    def clip_lo(x):
        return max(x, 0.0) if positive else x

    # Cornish-Fisher seed keeps the bracket (and the root search) tight; the
    # mean +/- k*std growth loop below is the fallback when the seed misses.
    z = float(q_inv(1.0 - p))
    seed = mean + std * (z + d.skewness() * (z * z - 1.0) / 6.0)
    lo, hi = clip_lo(seed - 0.75 * std), seed + 0.75 * std
    flo, fhi = f(lo), f(hi)
    if flo > 0.0 or fhi < 0.0:
        k = max(2.0, abs(z) + 1.0)
        lo, hi = clip_lo(mean - k * std), mean + k * std
        flo, fhi = f(lo), f(hi)
        while flo > 0.0 or fhi < 0.0:
            k *= 2.0
            if k > 2.0 ** 20:
                raise NumericalFailureError(
                    f"quantile bracket for p={p!r} exceeded growth bound")
            if flo > 0.0:
                lo = clip_lo(mean - k * std)
                flo = f(lo)
            if fhi < 0.0:
                hi = mean + k * std
                fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    root = brentq(f, lo, hi, xtol=1e-9 * std, rtol=8.9e-16)
    resid = abs(f(root))
    if resid > QUANTILE_PROB_TOL:
        raise NumericalFailureError(
            f"quantile refinement stalled at residual {resid:.3e}",
            residual=resid)
    return float(root)
