"""RB configuration optimization and heuristic configuration families.

For each number of lengths ``M`` the integer program is relaxed to real
``m`` and ``n``, solved locally with an augmented-Lagrangian method, rounded
back to integers, and the best feasible configuration across ``M`` wins.

Lengths are parameterized by their gaps, ``m_i = m_{i-1} + 1 + d_i`` with
``d_i >= 0``, so the ordering constraints become simple bounds handled by the
quasi-Newton inner solver; the time and maximum-length constraints go through
the augmented Lagrangian.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .ci import objective_h
from .model import RBConfig, TimeParams, VarianceParams, exec_time
from .stats import t_critical

FAMILIES = ("linear", "square", "exponential")
VARIANTS = ("free-n", "identical-n")

FD_REL_STEP = 1e-6
INNER_TOL = 1e-10
CONSTRAINT_TOL = 1e-8
MAX_OUTER = 40
HEURISTIC_SLACK = 1.1


class InfeasibleError(RuntimeError):
    """No configuration satisfies the constraints."""


@dataclass(frozen=True)
class OptimizeSpec:
    vp: VarianceParams
    tp: TimeParams
    alpha: float = 0.05
    M_max: int = 40
    variant: str = "free-n"
    n_min: int | None = None
    k_fixed: int = 100
    m_max_bound: int = 1024
    multistart: bool = False
    optimize_shots: bool = False
    M_min: int = 4

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.n_min is None:
            object.__setattr__(self, "n_min", 5 if self.variant == "free-n" else 1)
        if self.M_min < 4 or self.M_max < self.M_min:
            raise ValueError("4 <= M_min <= M_max required")
        if self.n_min < 1 or self.k_fixed < 1:
            raise ValueError("n_min >= 1 and k_fixed >= 1 required")
        if self.m_max_bound < self.M_min:
            raise ValueError("m_max_bound must allow at least M_min distinct lengths")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def identical(self) -> bool:
        return self.variant == "identical-n"


@dataclass
class MResult:
    M: int
    h_relaxed: float = math.nan
    h_rounded: float = math.nan
    t_rounded: float = math.nan
    feasible: bool = False
    status: str = ""
    config: RBConfig | None = None
    relaxed_m: list = field(default_factory=list)
    relaxed_n: list = field(default_factory=list)
    relaxed_k: list = field(default_factory=list)

    def row(self) -> dict:
        return {"M": self.M, "h_relaxed": self.h_relaxed, "h_rounded": self.h_rounded,
                "t_rounded": self.t_rounded, "feasible": self.feasible}


@dataclass
class OptimizeReport:
    best: RBConfig
    best_M: int
    h_best: float
    t_best: float
    per_M: list
    relaxed_solution: dict
    objective: str = "min-h"

    def to_dict(self) -> dict:
        return {"best": self.best.to_dict(), "best_M": self.best_M, "h_best": self.h_best,
                "t_best": self.t_best, "objective": self.objective,
                "total_sequences": self.best.total_sequences,
                "relaxed_solution": self.relaxed_solution,
                "per_M": [dict(r.row(), status=r.status) for r in self.per_M]}


# ---------------------------------------------------------------------------
# problem encoding

class _Problem:
    """Variable layout ``[d (M), n (M or 1), k (M, optional)]`` for one M."""

    def __init__(self, spec: OptimizeSpec, M: int):
        self.spec = spec
        self.M = M
        self.nn = 1 if spec.identical else M
        self.nk = M if spec.optimize_shots else 0
        vp = spec.vp
        self.vargs = (vp.q, vp.beta, vp.p_hat, float(vp.D))
        self.t_factor = t_critical(M, spec.alpha)
        self.base = np.arange(1.0, M + 1.0)

    def unpack(self, x):
        M = self.M
        d = x[:M]
        m = self.base + np.cumsum(d)
        n = np.full(M, x[M]) if self.spec.identical else x[M:M + M]
        if self.nk:
            k = x[M + self.nn:]
        else:
            k = np.full(M, float(self.spec.k_fixed))
        return m, n, k

    def pack(self, m, n, k=None):
        d = np.diff(np.concatenate([[0.0], np.asarray(m, float)])) - 1.0
        parts = [np.maximum(d, 0.0), [float(np.mean(n))] if self.spec.identical else n]
        if self.nk:
            parts.append(k if k is not None else np.full(self.M, float(self.spec.k_fixed)))
        return np.concatenate([np.asarray(p, float) for p in parts])

    def bounds(self):
        b = [(0.0, None)] * self.M + [(float(self.spec.n_min), None)] * self.nn
        return b + [(1.0, None)] * self.nk

    def log_hprime(self, x):
        m, n, k = self.unpack(x)
        return kernels.log_hprime_design(m, n, k, *self.vargs)

    def log_hprime_grad(self, x):
        m, n, k = self.unpack(x)
        f, gm, gn, gk = kernels.log_hprime_design_grad(
            m, n, k, *self.vargs, FD_REL_STEP, bool(self.nk))
        return f, self._chain(gm, gn, gk)

    def _chain(self, gm, gn, gk):
        gd = np.cumsum(gm[::-1])[::-1]
        parts = [gd, [gn.sum()] if self.spec.identical else gn]
        if self.nk:
            parts.append(gk)
        return np.concatenate([np.asarray(p, float) for p in parts])

    def time(self, x):
        m, n, k = self.unpack(x)
        tp = self.spec.tp
        return float(np.sum(n * k * (tp.c1 * m + tp.c0)))

    def time_grad(self, x):
        m, n, k = self.unpack(x)
        tp = self.spec.tp
        return self._chain(n * k * tp.c1, k * (tp.c1 * m + tp.c0), n * (tp.c1 * m + tp.c0))

    def h_of(self, x):
        return self.t_factor * math.exp(0.5 * self.log_hprime(x))


def _augmented_lagrangian(fun_grad, constraints, x0, bounds):
    """Minimize ``fun`` subject to ``c(x) <= 0`` for each ``(c, grad_c)``.

    Classic Powell-Hestenes-Rockafellar scheme with L-BFGS-B inner solves.
    Returns ``(x, max_violation, outer_iterations)``.
    """
    lam = np.zeros(len(constraints))
    rho = 10.0
    x = np.asarray(x0, dtype=float)
    prev_viol = math.inf
    viol = math.inf
    for outer in range(1, MAX_OUTER + 1):
        def L(z):
            f, g = fun_grad(z)
            if not math.isfinite(f):
                return 1e30, np.zeros_like(z)
            g = g.copy()
            for j, (c, gc) in enumerate(constraints):
                s = lam[j] + rho * c(z)
                if s > 0:
                    f += (s * s - lam[j] ** 2) / (2 * rho)
                    g += s * gc(z)
                else:
                    f -= lam[j] ** 2 / (2 * rho)
            return f, g

        res = minimize(L, x, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"gtol": INNER_TOL, "ftol": 1e-15, "maxiter": 5000,
                                "maxcor": 20})
        x = res.x
        cvals = np.array([c(x) for c, _ in constraints])
        viol = float(np.max(np.maximum(cvals, 0.0))) if len(cvals) else 0.0
        comp = float(np.max(np.abs(np.minimum(-cvals, lam / rho)))) if len(cvals) else 0.0
        lam = np.maximum(0.0, lam + rho * cvals)
        if viol <= CONSTRAINT_TOL and comp <= 1e-6:
            break
        if viol > 0.25 * prev_viol:
            rho = min(rho * 10.0, 1e10)
        prev_viol = viol
    return x, viol, outer


# ---------------------------------------------------------------------------
# rounding

def _round_lengths(m, m_max, mode="nearest"):
    m = np.asarray(m, float)
    mi = (np.rint(m) if mode == "nearest" else np.floor(m + 1e-9)).astype(np.int64)
    mi[0] = max(mi[0], 1)
    for i in range(1, mi.size):
        mi[i] = max(mi[i], mi[i - 1] + 1)
    return mi if mi[-1] <= m_max else None


def _log_hprime_int(spec, m, n, k):
    vp = spec.vp
    return kernels.log_hprime_design(np.asarray(m, float), np.asarray(n, float),
                                     np.asarray(k, float), vp.q, vp.beta, vp.p_hat,
                                     float(vp.D))


def _seq_time(tp, m, k):
    return k * (tp.c1 * np.asarray(m, float) + tp.c0)


def _greedy_fill(spec, m, n, k, budget):
    """Add sequences one at a time, best log-H' decrease per second first,
    while the time stays within ``budget``."""
    per = _seq_time(spec.tp, m, k)
    t = float(np.sum(n * per))
    cur = _log_hprime_int(spec, m, n, k)
    if spec.identical:
        while t + per.sum() <= budget:
            n = n + 1
            t = float(np.sum(n * per))
        return n
    while True:
        best_j, best_rate = -1, 0.0
        for j in np.flatnonzero(t + per <= budget):
            n[j] += 1
            rate = (cur - _log_hprime_int(spec, m, n, k)) / per[j]
            n[j] -= 1
            if rate > best_rate:
                best_j, best_rate = j, rate
        if best_j < 0:
            return n
        n[best_j] += 1
        t += per[best_j]
        cur = _log_hprime_int(spec, m, n, k)


def _greedy_trim(spec, m, n, k, budget):
    """Remove sequences (cheapest log-H' increase per second saved first)
    until the time fits ``budget``; ``None`` if impossible."""
    per = _seq_time(spec.tp, m, k)
    t = float(np.sum(n * per))
    if spec.identical:
        while t > budget and n[0] > spec.n_min:
            n = n - 1
            t = float(np.sum(n * per))
        return n if t <= budget else None
    while t > budget:
        cur = _log_hprime_int(spec, m, n, k)
        best_j, best_rate = -1, math.inf
        for j in np.flatnonzero(n > spec.n_min):
            n[j] -= 1
            rate = (_log_hprime_int(spec, m, n, k) - cur) / per[j]
            n[j] += 1
            if rate < best_rate:
                best_j, best_rate = j, rate
        if best_j < 0:
            return None
        n[best_j] -= 1
        t -= per[best_j]
    return n


def _round_config(spec, m, n, k):
    """Round a relaxed (m, n, k) to a feasible integer configuration or ``None``.

    Lengths are rounded to nearest and, separately, down (which never adds
    time); the better feasible result is kept.
    """
    best, best_h = None, math.inf
    for mode in ("nearest", "floor"):
        cfg = _round_config_mode(spec, m, n, k, mode)
        if cfg is None:
            continue
        h = _log_hprime_int(spec, *cfg.arrays())
        if h < best_h:
            best, best_h = cfg, h
    return best


def _round_config_mode(spec, m, n, k, mode):
    mi = _round_lengths(m, spec.m_max_bound, mode)
    if mi is None:
        return None
    ki = np.maximum(np.rint(k), 1.0) if spec.optimize_shots else np.full(mi.size, float(spec.k_fixed))
    if spec.identical:
        ni = np.full(mi.size, max(math.floor(float(np.mean(n)) + 1e-9), spec.n_min), float)
    else:
        ni = np.maximum(np.floor(np.asarray(n, float) + 1e-9), spec.n_min)
    T = spec.tp.T
    ni = _greedy_trim(spec, mi, ni, ki, T)
    if ni is None:
        return None
    ni = _greedy_fill(spec, mi, ni, ki, T)
    return RBConfig(tuple(int(x) for x in mi), tuple(int(x) for x in ni),
                    tuple(int(x) for x in ki))


# ---------------------------------------------------------------------------
# minimize h under the time budget

def _starts(prob: _Problem):
    spec, M = prob.spec, prob.M
    n0 = max(3.0 if spec.identical else 5.0, float(spec.n_min))
    k0 = np.full(M, float(spec.k_fixed))
    starts = [prob.pack(np.arange(1.0, M + 1.0), np.full(M, n0), k0)]
    if spec.multistart:
        top = min(float(spec.m_max_bound), 512.0)
        r = top ** (1.0 / max(M - 1, 1))
        geo = np.array([round(r ** i) for i in range(M)], float)
        for i in range(1, M):
            geo[i] = max(geo[i], geo[i - 1] + 1)
        if geo[-1] <= spec.m_max_bound:
            starts.append(prob.pack(geo, np.full(M, n0), k0))
    return starts


def _saturate_time(prob: _Problem, x):
    """Rescale the sequence counts so the time constraint holds with equality
    (h decreases monotonically in every n, so the optimum is on the boundary)."""
    spec = prob.spec
    m, n, k = prob.unpack(x)
    t = prob.time(x)
    if t <= 0:
        return x
    n = np.maximum(n * (spec.tp.T / t), float(spec.n_min))
    x = prob.pack(m, n, k)
    if prob.time(x) > spec.tp.T * (1 + 1e-15):
        # n_min clamps prevented an exact downscale; shrink the unclamped part
        per = k * (spec.tp.c1 * m + spec.tp.c0)
        free = n > spec.n_min
        fixed_t = float(np.sum(n[~free] * per[~free]))
        free_t = float(np.sum(n[free] * per[free]))
        if free_t > 0:
            n[free] *= max(spec.tp.T - fixed_t, 0.0) / free_t
            n = np.maximum(n, float(spec.n_min))
            x = prob.pack(m, n, k)
    if prob.time(x) > spec.tp.T:
        # every count is at n_min; time is affine in a uniform gap scale
        d = x[:prob.M].copy()
        x0 = x.copy()
        x0[:prob.M] = 0.0
        t0, t1 = prob.time(x0), prob.time(x)
        if t1 > t0 and t0 <= spec.tp.T:
            x = x.copy()
            x[:prob.M] = d * ((spec.tp.T - t0) / (t1 - t0))
    return x


def _solve_min_h(spec: OptimizeSpec, M: int) -> MResult:
    prob = _Problem(spec, M)
    out = MResult(M)
    T = spec.tp.T
    m_cap = float(spec.m_max_bound)
    cons = [(lambda x: prob.time(x) / T - 1.0, lambda x: prob.time_grad(x) / T),
            (lambda x: prob.unpack(x)[0][-1] / m_cap - 1.0,
             lambda x: np.concatenate([np.full(M, 1.0 / m_cap), np.zeros(prob.nn + prob.nk)]))]
    best_x, best_h = None, math.inf
    for x0 in _starts(prob):
        x, viol, _ = _augmented_lagrangian(prob.log_hprime_grad, cons, x0, prob.bounds())
        x = _saturate_time(prob, x)
        m = prob.unpack(x)[0]
        if prob.time(x) > T * (1 + 1e-12) or m[-1] > m_cap * (1 + 1e-12):
            continue
        h = prob.h_of(x)
        if h < best_h:
            best_x, best_h = x, h
    if best_x is None:
        out.status = "relaxation infeasible"
        return out
    m, n, k = prob.unpack(best_x)
    out.h_relaxed = best_h
    out.relaxed_m, out.relaxed_n, out.relaxed_k = list(m), list(n), list(k)
    cfg = _round_config(spec, m, n, k)
    if cfg is None:
        out.status = "rounding infeasible"
        return out
    out.config = cfg
    out.h_rounded = objective_h(cfg, spec.vp, spec.alpha).h_value
    out.t_rounded = exec_time(cfg, spec.tp)
    out.feasible = out.t_rounded <= T
    out.status = "ok" if out.feasible else "over budget"
    return out


def _map_M(fn, spec, Ms, threads):
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, [spec] * len(Ms), Ms))
    return [fn(spec, M) for M in Ms]


def _pick(results, key):
    best = None
    for r in results:  # ascending M, so strict < breaks ties toward smaller M
        if r.feasible and (best is None or key(r) < key(best)):
            best = r
    return best


def _min_time_config(spec: OptimizeSpec, M=None) -> float:
    M = spec.M_min if M is None else M
    n = spec.n_min
    return exec_time((np.arange(1, M + 1), np.full(M, n), np.full(M, spec.k_fixed)), spec.tp)


def optimize(spec: OptimizeSpec, threads: int = 1) -> OptimizeReport:
    """Minimize the predicted CI factor ``h`` subject to ``t <= T``."""
    Ms = list(range(spec.M_min, spec.M_max + 1))
    results = _map_M(_solve_min_h, spec, Ms, threads)
    best = _pick(results, lambda r: r.h_rounded)
    if best is None:
        raise InfeasibleError(
            f"no feasible configuration for budget T={spec.tp.T} s; the smallest "
            f"configuration (M={spec.M_min}, n={spec.n_min}) needs "
            f"{_min_time_config(spec):.6g} s")
    res = objective_h(best.config, spec.vp, spec.alpha)
    return OptimizeReport(best.config, best.M, res.h_value, exec_time(best.config, spec.tp),
                          results, {"m": best.relaxed_m, "n": best.relaxed_n,
                                    "k": best.relaxed_k})


# ---------------------------------------------------------------------------
# minimize time under a CI bound

def _round_config_min_time(spec, m, n, k, epsilon, t_factor):
    mi = _round_lengths(m, spec.m_max_bound)
    if mi is None:
        return None
    ki = np.maximum(np.rint(k), 1.0) if spec.optimize_shots else np.full(mi.size, float(spec.k_fixed))
    target = 2.0 * math.log(epsilon / t_factor)
    if spec.identical:
        ni = np.full(mi.size, max(math.floor(float(np.mean(n)) + 1e-9), spec.n_min), float)
    else:
        ni = np.maximum(np.floor(np.asarray(n, float) + 1e-9), spec.n_min)
    per = _seq_time(spec.tp, mi, ki)
    cur = _log_hprime_int(spec, mi, ni, ki)
    guard = 0
    while cur > target:
        guard += 1
        if guard > 10 ** 6:
            return None
        if spec.identical:
            ni = ni + 1
        else:
            best_j, best_rate = -1, -math.inf
            for j in range(mi.size):
                ni[j] += 1
                rate = (cur - _log_hprime_int(spec, mi, ni, ki)) / per[j]
                ni[j] -= 1
                if rate > best_rate:
                    best_j, best_rate = j, rate
            ni[best_j] += 1
        cur = _log_hprime_int(spec, mi, ni, ki)
    return RBConfig(tuple(int(x) for x in mi), tuple(int(x) for x in ni),
                    tuple(int(x) for x in ki))


def _solve_min_time(spec: OptimizeSpec, M: int, epsilon: float) -> MResult:
    prob = _Problem(spec, M)
    out = MResult(M)
    target = 2.0 * math.log(epsilon / prob.t_factor)
    m_cap = float(spec.m_max_bound)
    x_init = _starts(prob)[0]
    t_ref = max(prob.time(x_init), 1e-300)

    def fun_grad(x):
        return prob.time(x) / t_ref, prob.time_grad(x) / t_ref

    def c_h(x):
        return prob.log_hprime(x) - target

    def c_h_grad(x):
        return prob.log_hprime_grad(x)[1]

    cons = [(c_h, c_h_grad),
            (lambda x: prob.unpack(x)[0][-1] / m_cap - 1.0,
             lambda x: np.concatenate([np.full(M, 1.0 / m_cap), np.zeros(prob.nn + prob.nk)]))]
    best_x, best_t = None, math.inf
    for x0 in _starts(prob):
        x, viol, _ = _augmented_lagrangian(fun_grad, cons, x0, prob.bounds())
        if viol > 1e-6:
            continue
        t = prob.time(x)
        if t < best_t:
            best_x, best_t = x, t
    if best_x is None:
        out.status = "relaxation infeasible"
        return out
    m, n, k = prob.unpack(best_x)
    out.h_relaxed = prob.h_of(best_x)
    out.relaxed_m, out.relaxed_n, out.relaxed_k = list(m), list(n), list(k)
    cfg = _round_config_min_time(spec, m, n, k, epsilon, prob.t_factor)
    if cfg is None:
        out.status = "rounding infeasible"
        return out
    out.config = cfg
    out.h_rounded = objective_h(cfg, spec.vp, spec.alpha).h_value
    out.t_rounded = exec_time(cfg, spec.tp)
    out.feasible = out.h_rounded <= epsilon * (1 + 1e-12)
    out.status = "ok" if out.feasible else "above epsilon"
    return out


def _solve_min_time_star(spec, M, epsilon):
    return _solve_min_time(spec, M, epsilon)


def optimize_min_time(spec: OptimizeSpec, epsilon: float, threads: int = 1) -> OptimizeReport:
    """Minimize the execution time subject to ``h <= epsilon``.

    The time budget in ``spec`` is ignored except as a reference scale.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    Ms = list(range(spec.M_min, spec.M_max + 1))
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_solve_min_time_star, [spec] * len(Ms), Ms,
                                    [epsilon] * len(Ms)))
    else:
        results = [_solve_min_time(spec, M, epsilon) for M in Ms]
    best = _pick(results, lambda r: r.t_rounded)
    if best is None:
        achieved = [r.h_rounded for r in results if math.isfinite(r.h_rounded)]
        raise InfeasibleError(
            f"epsilon={epsilon} unattainable; smallest h reached "
            f"{min(achieved) if achieved else math.nan:.6g}")
    res = objective_h(best.config, spec.vp, spec.alpha)
    return OptimizeReport(best.config, best.M, res.h_value, exec_time(best.config, spec.tp),
                          results, {"m": best.relaxed_m, "n": best.relaxed_n,
                                    "k": best.relaxed_k}, objective="min-time")


# ---------------------------------------------------------------------------
# heuristic families

def family_lengths(family: str, M: int) -> list[int]:
    x = range(1, M + 1)
    if family == "linear":
        return [10 * (i - 1) + 1 for i in x]
    if family == "square":
        return [i * i for i in x]
    if family == "exponential":
        return [2 ** (i - 1) for i in x]
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def heuristic_config(family: str, M: int, spec: OptimizeSpec) -> RBConfig:
    """Heuristic lengths with one common ``n`` sized to the time budget.

    ``n`` is ``T / t(n=1)`` rounded to the nearest integer (at least 1), which
    may overshoot the budget slightly; if that overshoot exceeds 10% the
    count is rounded down instead.
    """
    if M < 4:
        raise ValueError("M >= 4 required")
    m = family_lengths(family, M)
    k = spec.k_fixed
    per_n = exec_time((m, [1] * M, [k] * M), spec.tp)
    ratio = spec.tp.T / per_n
    n = max(1, math.floor(ratio + 0.5))
    if n > 1 and n * per_n > HEURISTIC_SLACK * spec.tp.T:
        n = max(1, math.floor(ratio))
    return RBConfig(tuple(m), (n,) * M, (k,) * M)


def best_heuristic(family: str, spec: OptimizeSpec):
    """Grid search over ``M`` for a heuristic family; returns ``(M, config, h)``.

    Configurations over 110% of the time budget are skipped.
    """
    best = None
    for M in range(spec.M_min, spec.M_max + 1):
        cfg = heuristic_config(family, M, spec)
        if exec_time(cfg, spec.tp) > HEURISTIC_SLACK * spec.tp.T:
            continue
        h = objective_h(cfg, spec.vp, spec.alpha).h_value
        if best is None or h < best[2]:
            best = (M, cfg, h)
    if best is None:
        raise InfeasibleError(f"no {family} configuration fits the time budget")
    return best


def sweep_ci_surface(family: str, spec: OptimizeSpec, p_hat_grid, M_grid, tie_q: bool = True):
    """Predicted ``h`` of heuristic configurations over a (p_hat, M) grid.

    With ``tie_q`` the sequence-scatter base ``q`` follows ``p_hat``.
    Returns a list of ``(p_hat, M, h)`` rows.
    """
    p_hat_grid, M_grid = list(p_hat_grid), list(M_grid)
    if not p_hat_grid or not M_grid:
        raise ValueError("grids must be non-empty")
    rows = []
    for p in p_hat_grid:
        vp = replace(spec.vp, p_hat=p, q=p) if tie_q else replace(spec.vp, p_hat=p)
        for M in M_grid:
            cfg = heuristic_config(family, M, spec)
            rows.append((p, M, objective_h(cfg, vp, spec.alpha).h_value))
    return rows


def spec_to_dict(spec: OptimizeSpec) -> dict:
    d = asdict(spec)
    vp, tp = d.pop("vp"), d.pop("tp")
    return {"q": vp["q"], "beta": vp["beta"], "p_hat": vp["p_hat"], "dim": vp["D"],
            "c1_us": tp["c1"] * 1e6, "c0_us": tp["c0"] * 1e6, "cL_us": tp["cL"] * 1e6,
            "budget_s": tp["T"], **d}
