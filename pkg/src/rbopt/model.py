"""Decay, variance and execution-time models for standard RB.

Sequence and shot counts are accepted as non-negative reals here so the
relaxed optimizer can reuse the same functions; integrality is checked only
when a concrete :class:`RBConfig` is built.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ValidationError(ValueError):
    """Raised when a parameter set or configuration violates its invariants.

    ``field`` names the offending attribute so the CLI can report it.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _as_int_tuple(values, name: str) -> tuple[int, ...]:
    out = []
    for v in values:
        fv = float(v)
        if not math.isfinite(fv) or fv != round(fv):
            raise ValidationError(name, f"expected integers, got {v!r}")
        out.append(int(round(fv)))
    return tuple(out)


@dataclass(frozen=True)
class RBConfig:
    """An RB configuration: Clifford lengths, sequences per length, shots per sequence."""

    m: tuple[int, ...]
    n: tuple[int, ...]
    k: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "m", _as_int_tuple(self.m, "m"))
        object.__setattr__(self, "n", _as_int_tuple(self.n, "n"))
        object.__setattr__(self, "k", _as_int_tuple(self.k, "k"))
        M = len(self.m)
        if len(self.n) != M or len(self.k) != M:
            raise ValidationError("n", "m, n and k must have the same length")
        if M < 4:
            raise ValidationError("m", f"M >= 4 required (got M={M})")
        if self.m[0] < 1:
            raise ValidationError("m", "m_1 >= 1 required")
        if any(b < a + 1 for a, b in zip(self.m, self.m[1:])):
            raise ValidationError("m", "Clifford lengths must be strictly increasing")
        if min(self.n) < 1:
            raise ValidationError("n", "n_i >= 1 required")
        if min(self.k) < 1:
            raise ValidationError("k", "k_i >= 1 required")

    @property
    def M(self) -> int:
        return len(self.m)

    @property
    def total_sequences(self) -> int:
        return sum(self.n)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (np.asarray(self.m, dtype=float),
                np.asarray(self.n, dtype=float),
                np.asarray(self.k, dtype=float))

    def to_dict(self) -> dict:
        return {"m": list(self.m), "n": list(self.n), "k": list(self.k)}

    @classmethod
    def from_dict(cls, d: dict) -> "RBConfig":
        for key in ("m", "n", "k"):
            if key not in d:
                raise ValidationError(key, "missing from configuration")
        M = len(d["m"])
        n = d["n"] if isinstance(d["n"], (list, tuple)) else [d["n"]] * M
        k = d["k"] if isinstance(d["k"], (list, tuple)) else [d["k"]] * M
        return cls(tuple(d["m"]), tuple(n), tuple(k))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "RBConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DecayParams:
    """Parameters of ``f(m) = a * p**m + b``.

    ``p == 1`` is accepted so a no-decay ground truth can be simulated.
    """

    p: float
    a: float
    b: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValidationError("p", f"decay rate must lie in (0, 1], got {self.p}")
        if not 0.0 < self.a <= 1.0:
            raise ValidationError("a", f"amplitude must lie in (0, 1], got {self.a}")
        if not 0.0 <= self.b < 1.0:
            raise ValidationError("b", f"offset must lie in [0, 1), got {self.b}")
        if self.a + self.b > 1.0 + 1e-12:
            raise ValidationError("a", "a + b <= 1 required")


@dataclass(frozen=True)
class VarianceParams:
    """Variance-model parameters: sequence-scatter base ``q`` and amplitude
    ``beta``, prior decay rate ``p_hat`` and Hilbert-space dimension ``D``."""

    q: float
    beta: float
    p_hat: float
    D: int = 4

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValidationError("q", f"must lie in (0, 1), got {self.q}")
        if not self.beta >= 0.0:
            raise ValidationError("beta", f"must be >= 0, got {self.beta}")
        if not 0.0 < self.p_hat <= 1.0:
            raise ValidationError("p_hat", f"must lie in (0, 1], got {self.p_hat}")
        D = int(self.D)
        if D != self.D or D < 2 or D & (D - 1):
            raise ValidationError("dim", f"must be a power of two >= 2, got {self.D}")
        object.__setattr__(self, "D", D)


@dataclass(frozen=True)
class TimeParams:
    """Execution-time coefficients in seconds and the total budget ``T``.

    ``cL`` is the per-sequence loading time of the general model; it is zero
    in the standard approximation.
    """

    c1: float
    c0: float
    T: float
    cL: float = field(default=0.0)

    def __post_init__(self):
        if not self.c1 > 0:
            raise ValidationError("c1_us", "must be > 0")
        if not self.c0 >= 0:
            raise ValidationError("c0_us", "must be >= 0")
        if not self.T > 0:
            raise ValidationError("budget_s", "must be > 0")
        if not self.cL >= 0:
            raise ValidationError("cL_us", "must be >= 0")

    @classmethod
    def from_microseconds(cls, c1_us: float, c0_us: float, budget_s: float,
                          cL_us: float = 0.0) -> "TimeParams":
        return cls(c1_us * 1e-6, c0_us * 1e-6, budget_s, cL_us * 1e-6)


def decay(m, params: DecayParams):
    """Survival probability ``a * p**m + b`` (vectorized over ``m``)."""
    return params.a * np.power(params.p, m) + params.b


def avg_gate_fidelity(p: float, D: int) -> float:
    return p + (1.0 - p) / D


def ideal_mean(m, p_hat: float, D: int):
    """Mean survival rate of an SPAM-free device, ``(1 - 1/D) p_hat**m + 1/D``."""
    return (1.0 - 1.0 / D) * np.power(p_hat, m) + 1.0 / D


def var_seq(m, vp: VarianceParams):
    qm = np.power(vp.q, m)
    return vp.beta * qm * (1.0 - qm)


def var_shot(m, k, vp: VarianceParams):
    mu = ideal_mean(m, vp.p_hat, vp.D)
    return mu * (1.0 - mu) / k


def var_avg_survival(m, n, k, vp: VarianceParams):
    """Variance of the length-``m`` average survival rate over ``n`` sequences."""
    return (var_seq(m, vp) + var_shot(m, k, vp)) / n


def exec_time(cfg: RBConfig | tuple[Sequence[float], Sequence[float], Sequence[float]],
              tp: TimeParams, *, general: bool = False) -> float:
    """Predicted execution time in seconds.

    ``cfg`` may be an :class:`RBConfig` or a raw ``(m, n, k)`` triple of
    (possibly fractional) arrays. With ``general=True`` the per-sequence
    loading term ``cL`` is included.
    """
    if isinstance(cfg, RBConfig):
        m, n, k = cfg.arrays()
    else:
        m, n, k = (np.asarray(x, dtype=float) for x in cfg)
    per_seq = k * (tp.c1 * m + tp.c0)
    if general:
        per_seq = per_seq + tp.cL
    return math.fsum(n * per_seq)
