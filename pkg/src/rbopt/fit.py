"""Weighted least-squares fits of the decay model and of the variance model."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .ci import ci_halfwidth, h_prime_explicit, weights_from_model
from .model import RBConfig, VarianceParams, ideal_mean
from .stats import weighted_s2

MAX_ITER = 1000
STEP_TOL = 1e-12
REL_OBJ_TOL = 1e-14
AMPLITUDE_FLOOR = 1e-10  # survival rates live on [0, 1]


class FitError(RuntimeError):
    """A fit could not produce a usable estimate (e.g. p at the (0, 1) boundary)."""


@dataclass(frozen=True)
class SurvivalData:
    """Average survival rate ``y`` per Clifford length with its ``n`` and ``k``."""

    m: np.ndarray
    y: np.ndarray
    n: np.ndarray
    k: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(x, dtype=float) for x in (self.m, self.y, self.n, self.k)]
        if len({a.size for a in arrs}) != 1 or arrs[0].ndim != 1:
            raise ValueError("m, y, n and k must be 1-D and of equal length")
        order = np.argsort(arrs[0], kind="stable")
        arrs = [a[order] for a in arrs]
        m, y = arrs[0], arrs[1]
        if np.unique(m).size != m.size:
            raise ValueError("Clifford lengths must be distinct")
        if m.size < 4:
            raise ValueError(f"at least 4 distinct lengths required (got {m.size})")
        if np.any(y < 0) or np.any(y > 1):
            raise ValueError("survival rates must lie in [0, 1]")
        for name, a in zip(("m", "y", "n", "k"), arrs):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def M(self) -> int:
        return self.m.size

    def config(self) -> RBConfig:
        return RBConfig(tuple(self.m), tuple(self.n), tuple(self.k))

    @classmethod
    def from_csv(cls, path) -> "SurvivalData":
        cols = _read_columns(path, ("m", "y", "n", "k"))
        return cls(*cols)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["m", "y", "n", "k"])
            for row in zip(self.m, self.y, self.n, self.k):
                wr.writerow([f"{int(row[0])}", f"{row[1]:.17g}", f"{int(row[2])}",
                             f"{int(row[3])}"])


def _read_columns(path, names):
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames is None or any(nm not in rd.fieldnames for nm in names):
            raise ValueError(f"{path}: header must contain {','.join(names)}")
        rows = list(rd)
    return [np.array([float(r[nm]) for r in rows]) for nm in names]


@dataclass(frozen=True)
class DecayEstimate:
    """Fitted ``(p, a, b)``; unlike :class:`DecayParams`, ``a`` and ``b`` are
    not range-checked because noisy fits may leave the physical region."""

    p: float
    a: float
    b: float


@dataclass(frozen=True)
class FitResult:
    params: DecayEstimate
    s2: float
    H_at_fit: float
    ci95: float
    converged: bool
    iterations: int
    alpha: float = 0.05
    p_history: tuple = ()

    @property
    def p(self) -> float:
        return self.params.p

    def to_dict(self) -> dict:
        return {"p": self.params.p, "a": self.params.a, "b": self.params.b,
                "s2": self.s2, "H": self.H_at_fit, "ci_halfwidth": self.ci95,
                "alpha": self.alpha, "converged": self.converged,
                "iterations": self.iterations, "p_history": list(self.p_history)}


def _logit(x):
    return math.log(x / (1.0 - x))


def _expit(u):
    return 1.0 / (1.0 + math.exp(-u)) if u >= 0 else math.exp(u) / (1.0 + math.exp(u))


def _initial_guess(m, y, w, D):
    b0 = 1.0 / D
    a0 = min(max(y[0] - b0, 0.05), 1.0)
    z = np.log(np.maximum(y - b0, 1e-6))
    W = w.sum()
    mbar = (w * m).sum() / W
    zbar = (w * z).sum() / W
    slope = (w * (m - mbar) * (z - zbar)).sum() / (w * (m - mbar) ** 2).sum()
    p0 = min(max(math.exp(slope), 0.5), 0.9999)
    return p0, a0, b0


def _lm(residual_jac, theta0, max_iter=MAX_ITER, trace=None):
    """Levenberg-damped Gauss-Newton on ``r = y - f(theta)``.

    ``residual_jac`` returns ``(r, df/dtheta)``. Returns
    ``(theta, objective, iterations, converged)``. If ``trace`` is a list,
    the objective of every accepted iterate is appended to it.
    """
    theta = np.array(theta0, dtype=float)
    r, J = residual_jac(theta)
    obj = float(r @ r)
    if trace is not None:
        trace.append(obj)
    lam = 1e-3
    for it in range(1, max_iter + 1):
        if obj == 0.0:
            return theta, obj, it - 1, True
        A = J.T @ J
        gvec = J.T @ r
        accepted = False
        while lam < 1e16:
            step_mat = A + lam * np.diag(np.maximum(np.diag(A), 1e-300))
            try:
                step = np.linalg.solve(step_mat, gvec)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = theta + step
            try:
                r_t, J_t = residual_jac(trial)
            except (OverflowError, FloatingPointError, ValueError):
                lam *= 10.0
                continue
            obj_t = float(r_t @ r_t)
            if np.isfinite(obj_t) and obj_t <= obj:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            return theta, obj, it, True
        rel = (obj - obj_t) / obj
        theta, r, J, obj = trial, r_t, J_t, obj_t
        if trace is not None:
            trace.append(obj)
        lam = max(lam / 10.0, 1e-12)
        if np.max(np.abs(step)) < STEP_TOL or rel < REL_OBJ_TOL:
            return theta, obj, it, True
    return theta, obj, max_iter, False


def _profile_start(m, y, w):
    """Best ``(p, a, b)`` over a logit-spaced grid in ``p``, with ``(a, b)``
    solved exactly by weighted linear least squares at each grid point."""
    ps = 1.0 / (1.0 + np.exp(-np.linspace(-4.0, 12.0, 321)))
    F = np.power(ps[:, None], m[None, :])
    Sw = w.sum()
    Sf, Sy = F @ w, (w * y).sum()
    Sff, Sfy = (F * F) @ w, F @ (w * y)
    det = Sw * Sff - Sf * Sf
    with np.errstate(all="ignore"):
        a = (Sw * Sfy - Sf * Sy) / det
        b = (Sy - a * Sf) / Sw
        obj = ((y[None, :] - a[:, None] * F - b[:, None]) ** 2) @ w
    obj[~np.isfinite(obj)] = np.inf
    i = int(np.argmin(obj))
    return float(ps[i]), float(a[i]), float(b[i]), float(obj[i])


def _fit_with_weights(data: SurvivalData, w: np.ndarray, D: int, alpha: float,
                      max_iter=MAX_ITER) -> FitResult:
    m, y = data.m, data.y
    sw = np.sqrt(w)

    def residual_jac(theta):
        u, a, b = theta
        p = _expit(u)
        pm = np.power(p, m)
        r = sw * (y - a * pm - b)
        dp = a * m * np.power(p, m - 1.0) * p * (1.0 - p)
        J = np.column_stack([dp, pm, np.ones_like(m)]) * sw[:, None]
        return r, J

    def solve(p0, a0, b0):
        p0 = min(max(p0, 1e-9), 1.0 - 1e-9)
        theta, obj, iters, conv = _lm(residual_jac, [_logit(p0), a0, b0], max_iter)
        return theta, obj, iters, conv

    theta, obj, iters, converged = solve(*_initial_guess(m, y, w, D))
    # safeguard: restart from the profiled grid optimum when the log-linear
    # start ends in a worse basin or at the boundary
    gp, ga, gb, gobj = _profile_start(m, y, w)
    p = _expit(theta[0])
    if not (1e-12 < p < 1.0 - 1e-12) or obj > gobj * (1.0 + 1e-9) + 1e-300:
        alt = solve(gp, ga, gb)
        if alt[1] < obj or not (1e-12 < p < 1.0 - 1e-12):
            theta, obj, iters2, converged = alt
            iters += iters2
    p = _expit(theta[0])
    a, b = float(theta[1]), float(theta[2])
    if not (1e-12 < p < 1.0 - 1e-12):
        raise FitError(f"decay-rate estimate hit the boundary (p={p!r})")
    resid = y - a * np.power(p, m) - b
    s2 = weighted_s2(resid, w, data.M)
    if abs(a) < AMPLITUDE_FLOOR:
        raise FitError(f"amplitude estimate {a:.3g} is zero; decay rate unidentifiable")
    H = h_prime_explicit(m, w, p) / (a * a)
    return FitResult(DecayEstimate(p, a, b), s2, H, ci_halfwidth(s2, H, data.M, alpha),
                     converged, iters, alpha, (p,))


def wls_fit(data: SurvivalData, vp: VarianceParams, alpha: float = 0.05,
            weights=None) -> FitResult:
    """Fit ``a p^m + b`` with weights from the variance model (or ``weights``)."""
    w = weights_from_model(data.config(), vp).w if weights is None else \
        np.broadcast_to(np.asarray(weights, dtype=float), data.m.shape).copy()
    return _fit_with_weights(data, w, vp.D, alpha)


def irls_fit(data: SurvivalData, vp: VarianceParams, alpha: float = 0.05,
             max_rounds: int = 10, tol: float = 1e-10) -> FitResult:
    """Iteratively reweighted fit: the fitted p replaces the prior in the
    shot-noise mean after every round."""
    if max_rounds < 1:
        raise ValueError("max_rounds >= 1 required")
    fit = wls_fit(data, vp, alpha)
    history = [fit.p]
    for _ in range(max_rounds - 1):
        nxt = wls_fit(data, replace(vp, p_hat=fit.p), alpha)
        history.append(nxt.p)
        done = abs(nxt.p - fit.p) < tol
        fit = nxt
        if done:
            break
    return replace(fit, p_history=tuple(history))


@dataclass(frozen=True)
class VarianceFit:
    q: float
    beta: float
    converged: bool
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"q": self.q, "beta": self.beta, "converged": self.converged,
                "degenerate": self.degenerate}


BETA_SCALE = 1e4


def fit_variance_model(m, sample_variance, k, D: int, p_hat: float) -> VarianceFit:
    """Least-squares fit of ``beta q^m (1 - q^m) + mu (1 - mu) / k`` over ``(q, beta)``.

    ``sample_variance`` is the per-sequence variance of survival rates, i.e.
    ``n`` times the variance of the average.
    """
    m = np.asarray(m, dtype=float)
    v = np.asarray(sample_variance, dtype=float)
    k = np.broadcast_to(np.asarray(k, dtype=float), m.shape)
    if m.size < 3:
        raise ValueError("at least 3 rows required")
    if np.any(v < 0):
        raise ValueError("sample variances must be non-negative")
    mu = ideal_mean(m, p_hat, D)
    shot = mu * (1.0 - mu) / k
    target = v - shot
    if np.all(v == 0):
        warnings.warn("all sample variances are zero; returning beta = 0", RuntimeWarning)
        return VarianceFit(0.5, 0.0, True, True)

    def profile(q):
        g = q ** m * (1 - q ** m)
        gg = g @ g
        beta = max(0.0, (g @ target) / gg) if gg > 0 else 0.0
        r = target - beta * g
        return float(r @ r), beta

    # coarse logit grid, then damped Gauss-Newton from the best point
    grid = 1.0 / (1.0 + np.exp(-np.linspace(-4.0, 12.0, 321)))
    best = min(grid, key=lambda q: profile(q)[0])
    beta0 = profile(best)[1]
    if beta0 == 0.0:
        return VarianceFit(float(best), 0.0, True, False)
    scale = 1.0 / max(np.max(np.abs(target)), 1e-300)

    def residual_jac(theta):
        u, s = theta
        q = _expit(u)
        beta = math.expm1(s) / BETA_SCALE if s > 0 else 0.0
        qm = q ** m
        g = qm * (1 - qm)
        r = (target - beta * g) * scale
        dg_dq = m * q ** (m - 1) * (1 - 2 * qm)
        du = beta * dg_dq * q * (1 - q) * scale
        ds = (math.exp(s) / BETA_SCALE if s > 0 else 0.0) * g * scale
        return r, np.column_stack([du, ds])

    theta, _, _, converged = _lm(residual_jac, [_logit(best), math.log1p(beta0 * BETA_SCALE)])
    q = _expit(theta[0])
    beta = math.expm1(theta[1]) / BETA_SCALE if theta[1] > 0 else 0.0
    return VarianceFit(float(q), float(beta), converged, False)


def read_variance_csv(path):
    """Read ``m,var,k`` rows."""
    return _read_columns(path, ("m", "var", "k"))
