"""Student-t quantiles, weighted residual variance and seeded samplers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import betaincc


@dataclass(frozen=True)
class TQuantileSpec:
    dof: int
    level: float = 0.95

    def __post_init__(self):
        if self.dof < 1:
            raise ValueError(
                f"t quantile needs dof >= 1 (dof = M - 3, so M >= 4 required); got dof={self.dof}")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"confidence level must lie in (0, 1), got {self.level}")


def _two_sided_tail(t: float, dof: float) -> float:
    # P(|T| > t) = I_{dof/(dof+t^2)}(dof/2, 1/2), written via the complement so
    # the argument t^2/(dof+t^2) keeps full precision for large dof.
    return float(betaincc(0.5, 0.5 * dof, t * t / (dof + t * t)))


@lru_cache(maxsize=4096)
def _t_quantile(dof: int, level: float) -> float:
    alpha = 1.0 - level
    hi = 1.0
    while _two_sided_tail(hi, dof) > alpha:
        hi *= 2.0
    return brentq(lambda t: _two_sided_tail(t, dof) - alpha, 0.0, hi,
                  xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=500)


def t_quantile(spec: TQuantileSpec) -> float:
    """Two-sided Student-t critical value ``t_{dof, 1 - alpha/2}``."""
    return _t_quantile(int(spec.dof), float(spec.level))


def t_critical(M: int, alpha: float) -> float:
    """Critical value for an ``M``-length fit of the 3-parameter decay model."""
    return t_quantile(TQuantileSpec(M - 3, 1.0 - alpha))


def weighted_s2(residuals, weights, M: int | None = None) -> float:
    """``sum(w * r**2) / (M - 3)``."""
    r = np.asarray(residuals, dtype=float)
    w = np.asarray(weights, dtype=float)
    if M is None:
        M = r.size
    if r.size != M or w.size != M:
        raise ValueError("residuals, weights and M disagree")
    if M < 4:
        raise ValueError(f"M >= 4 required for the residual variance (got {M})")
    return math.fsum(w * r * r) / (M - 3)


class RngStream:
    """Reproducible random substream derived from ``(seed, stream_id)``.

    The pair is hashed through :class:`numpy.random.SeedSequence`, so distinct
    stream ids give statistically independent generators regardless of the
    order in which they are consumed.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([self.seed, self.stream_id])))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def sample_binomial(rng: RngStream, trials, prob, size=None):
    return rng.generator.binomial(trials, prob, size=size)


def beta_shape(mean, variance):
    """Moment-matched Beta shape parameters ``(alpha, beta)``."""
    mean = np.asarray(mean, dtype=float)
    variance = np.asarray(variance, dtype=float)
    if np.any(variance >= mean * (1.0 - mean)):
        raise ValueError("Beta moment matching infeasible: variance >= mean * (1 - mean)")
    nu = mean * (1.0 - mean) / variance - 1.0
    return mean * nu, (1.0 - mean) * nu


def sample_sequence_mean(rng: RngStream, mean, variance, size=None):
    """Per-sequence mean survival rates drawn from a moment-matched Beta.

    Entries with zero variance return ``mean`` exactly. ``mean`` and
    ``variance`` broadcast against each other and ``size``.
    """
    mu, var = np.broadcast_arrays(np.asarray(mean, dtype=float),
                                  np.asarray(variance, dtype=float))
    if size is not None:
        mu = np.broadcast_to(mu, size)
        var = np.broadcast_to(var, size)
    if np.any(var < 0):
        raise ValueError("variance must be non-negative")
    zero = var == 0
    if np.any(~zero & (var >= mu * (1.0 - mu))):
        raise ValueError("Beta moment matching infeasible: variance >= mean * (1 - mean)")
    # placeholder shape where variance is zero; those draws are discarded
    alpha, beta = beta_shape(np.where(zero, 0.5, mu), np.where(zero, 0.05, var))
    out = np.where(zero, mu, rng.generator.beta(alpha, beta))
    return float(out) if out.ndim == 0 else out
