"""Predicted confidence interval of the WLS decay-rate estimate."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .model import RBConfig, VarianceParams, var_avg_survival
from .stats import t_critical


class DegenerateDesignError(ValueError):
    """The weighted normal matrix of a design is singular or numerically so."""


@dataclass(frozen=True)
class WeightVector:
    w: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1 or not np.all(w > 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and strictly positive")
        object.__setattr__(self, "w", w)

    def __len__(self):
        return self.w.size

    def scaled(self, c: float) -> "WeightVector":
        return WeightVector(self.w * c, dict(self.provenance, scale=c))


@dataclass(frozen=True)
class CIResult:
    h_value: float
    H_prime: float
    t_factor: float
    M: int

    def to_dict(self) -> dict:
        return {"h": self.h_value, "H_prime": self.H_prime,
                "t_factor": self.t_factor, "M": self.M}


def _weights_array(w) -> np.ndarray:
    return w.w if isinstance(w, WeightVector) else np.asarray(w, dtype=float)


def weights_from_model(cfg: RBConfig, vp: VarianceParams) -> WeightVector:
    """Inverse modeled variances of the per-length average survival rates."""
    m, n, k = cfg.arrays()
    var = var_avg_survival(m, n, k, vp)
    if np.any(var <= 0):
        bad = [int(x) for x in m[var <= 0]]
        degenerate = "beta" if vp.beta == 0 else "q"
        raise DegenerateDesignError(
            f"modeled variance is zero at m={bad} (p_hat={vp.p_hat}, beta={vp.beta}); "
            f"infinite weight, check {degenerate!r} and 'p_hat'")
    return WeightVector(1.0 / var, {"q": vp.q, "beta": vp.beta, "p_hat": vp.p_hat,
                                    "D": vp.D, "n": list(cfg.n), "k": list(cfg.k)})


def jacobian_row(m: float, p: float, a: float) -> np.ndarray:
    """Gradient of ``a p^m + b`` with respect to ``(p, a, b)``."""
    return np.array([a * m * p ** (m - 1), p ** m, 1.0])


def h_prime_explicit(m, w, p: float) -> float:
    """Closed-form ``a^2 [(J^T W J)^{-1}]_pp``, independent of ``a``."""
    m = np.asarray(m, dtype=float)
    wa = _weights_array(w)
    if m.size < 4 or wa.size != m.size:
        raise ValueError(f"need M >= 4 lengths with one weight each (got M={m.size})")
    num, den = kernels.hprime_parts(m, wa, float(p))
    if not (den > 1e-300) or not (num > 0) or not math.isfinite(num / den):
        raise DegenerateDesignError(
            f"near-singular design (denominator {den:.3g}) for m={[float(x) for x in m]}")
    return num / den


def h_prime_oracle(m, w, p: float, a: float = 1.0) -> float:
    """Reference H' from an explicit 3x3 normal matrix and its cofactor inverse.

    The Jacobian entries are the same floats the closed form sees; everything
    after that is exact rational arithmetic, so the result is the correctly
    rounded value of ``a^2 [(J^T W J)^{-1}]_pp`` for those inputs.
    """
    m = np.asarray(m, dtype=float)
    wa = _weights_array(w)
    fa = Fraction(a)
    f = np.power(p, m)
    g = m * np.power(p, m - 1.0)
    rows = [(fa * Fraction(float(gi)), Fraction(float(fi)), Fraction(1))
            for fi, gi in zip(f, g)]
    ws = [Fraction(float(x)) for x in wa]
    G = [[sum(wi * r[i] * r[j] for wi, r in zip(ws, rows)) for j in range(3)]
         for i in range(3)]
    cof_pp = G[1][1] * G[2][2] - G[1][2] * G[2][1]
    det = (G[0][0] * cof_pp
           - G[0][1] * (G[1][0] * G[2][2] - G[1][2] * G[2][0])
           + G[0][2] * (G[1][0] * G[2][1] - G[1][1] * G[2][0]))
    if det == 0:
        raise DegenerateDesignError(f"singular normal matrix for m={[float(x) for x in m]}")
    return float(fa * fa * cof_pp / det)


def objective_h(cfg: RBConfig, vp: VarianceParams, alpha: float = 0.05,
                p_hat: float | None = None) -> CIResult:
    """Predicted CI half-width factor ``t_{M-3,1-alpha/2} sqrt(H')``.

    ``p_hat`` defaults to the prior in ``vp``.
    """
    if cfg.M < 4:
        raise ValueError("M >= 4 required")
    p = vp.p_hat if p_hat is None else p_hat
    w = weights_from_model(cfg, vp)
    Hp = h_prime_explicit(cfg.m, w, p)
    t = t_critical(cfg.M, alpha)
    return CIResult(t * math.sqrt(Hp), Hp, t, cfg.M)


def ci_halfwidth(s2: float, H: float, M: int, alpha: float = 0.05) -> float:
    """Realized half-width ``t sqrt(H s^2)`` of a fitted decay rate."""
    if M < 4:
        raise ValueError(f"M >= 4 required (got {M})")
    if s2 < 0 or H <= 0:
        raise ValueError("need s2 >= 0 and H > 0")
    return t_critical(M, alpha) * math.sqrt(H * s2)
