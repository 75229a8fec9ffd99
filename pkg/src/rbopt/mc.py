"""Monte Carlo harness: synthetic RB data, estimator spread, CI coverage,
and the drift-adjusted standard deviation of repeated estimates."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ci import DegenerateDesignError
from .fit import FitError, SurvivalData, wls_fit
from .model import DecayParams, RBConfig, VarianceParams, decay, var_seq
from .stats import RngStream, sample_binomial, sample_sequence_mean

MAX_FAILURE_FRACTION = 0.05


class CampaignError(RuntimeError):
    """Too many runs of a campaign failed to produce a fit."""


@dataclass(frozen=True)
class TruthModel:
    """Ground truth: survival mean ``a p^m + b`` with Beta sequence scatter
    of variance ``beta q^m (1 - q^m)``."""

    decay: DecayParams
    vp: VarianceParams

    def means(self, m) -> np.ndarray:
        return np.asarray(decay(np.asarray(m, dtype=float), self.decay), dtype=float)

    def seq_variance(self, m) -> np.ndarray:
        return np.asarray(var_seq(np.asarray(m, dtype=float), self.vp), dtype=float)

    def check(self, m) -> None:
        mu, v = self.means(m), self.seq_variance(m)
        bad = (v > 0) & (v >= mu * (1.0 - mu))
        if np.any(bad):
            raise ValueError(
                f"sequence variance exceeds mu(1-mu) at m={[int(x) for x in np.asarray(m)[bad]]}; "
                "no Beta distribution has these moments")


def exact_avg_variance(cfg: RBConfig, truth: TruthModel) -> np.ndarray:
    """Exact variance of the simulated per-length average (law of total variance).

    ``Var = (var(mu_ij) + E[mu_ij (1 - mu_ij)] / k) / n`` with
    ``E[mu (1 - mu)] = mu (1 - mu) - var(mu_ij)``.
    """
    m, n, k = cfg.arrays()
    mu, v = truth.means(m), truth.seq_variance(m)
    return (v + (mu * (1.0 - mu) - v) / k) / n


def simulate_run(cfg: RBConfig, truth: TruthModel, rng: RngStream) -> SurvivalData:
    """One synthetic RB experiment: Beta sequence means, binomial shot counts,
    averaged per length."""
    m, n, k = cfg.arrays()
    truth.check(m)
    mu, v = truth.means(m), truth.seq_variance(m)
    y = np.empty(cfg.M)
    for i in range(cfg.M):
        ni, ki = int(n[i]), int(k[i])
        means = sample_sequence_mean(rng, mu[i], v[i], size=ni)
        counts = sample_binomial(rng, ki, np.clip(means, 0.0, 1.0))
        y[i] = counts.sum() / (ni * ki)
    return SurvivalData(m, y, n, k)


@dataclass(frozen=True)
class MCSummary:
    runs: int
    p_hats: tuple
    ci_halfwidths: tuple
    covered: tuple
    failures: int
    empirical_std: float
    coverage: float
    mean_ci: float
    true_p: float

    @property
    def std_error_of_std(self) -> float:
        """Normal-theory standard error of ``empirical_std``."""
        r = len(self.p_hats)
        return self.empirical_std / math.sqrt(2.0 * (r - 1)) if r > 1 else math.nan

    def to_dict(self) -> dict:
        return {"runs": self.runs, "successful": len(self.p_hats), "failures": self.failures,
                "true_p": self.true_p, "empirical_std": self.empirical_std,
                "std_error_of_std": self.std_error_of_std, "coverage": self.coverage,
                "mean_ci": self.mean_ci,
                "mean_p_hat": float(np.mean(self.p_hats)) if self.p_hats else math.nan}

    def write_runs_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["run", "p_hat", "ci_halfwidth", "covered"])
            for i, (p, h, c) in enumerate(zip(self.p_hats, self.ci_halfwidths, self.covered)):
                wr.writerow([i, f"{p:.17g}", f"{h:.17g}", int(c)])


def _one_run(cfg, truth, fit_vp, alpha, seed, stream_id):
    data = simulate_run(cfg, truth, RngStream(seed, stream_id))
    try:
        fit = wls_fit(data, fit_vp, alpha)
    except (FitError, DegenerateDesignError, np.linalg.LinAlgError, ValueError):
        return None
    if not fit.converged or not math.isfinite(fit.ci95):
        return None
    return fit.p, fit.ci95


def _run_chunk(cfg, truth, fit_vp, alpha, seed, ids):
    return [_one_run(cfg, truth, fit_vp, alpha, seed, s) for s in ids]


def mc_campaign(cfg: RBConfig, truth: TruthModel, runs: int, alpha: float = 0.05,
                seed: int = 0, fit_vp: VarianceParams | None = None,
                stream_ids=None, threads: int = 1) -> MCSummary:
    """Repeated simulate-and-fit on independent substreams.

    Run ``r`` uses substream ``stream_ids[r]`` (default ``r``) of ``seed``,
    so results do not depend on ``threads`` or execution order. Fits use the
    weights of ``fit_vp`` (default: the truth's variance model).
    """
    if runs < 2:
        raise ValueError("runs >= 2 required")
    ids = list(range(runs)) if stream_ids is None else [int(s) for s in stream_ids]
    if len(ids) != runs:
        raise ValueError("stream_ids must have one entry per run")
    truth.check(cfg.m)
    fit_vp = truth.vp if fit_vp is None else fit_vp
    if threads and threads > 1:
        chunks = [ids[i::threads] for i in range(threads)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_run_chunk, *zip(*[(cfg, truth, fit_vp, alpha, seed, c)
                                                     for c in chunks])))
        results = [None] * runs
        for t, part in enumerate(parts):
            for j, res in enumerate(part):
                results[t + j * threads] = res
    else:
        results = _run_chunk(cfg, truth, fit_vp, alpha, seed, ids)
    ok = [r for r in results if r is not None]
    failures = runs - len(ok)
    if failures > MAX_FAILURE_FRACTION * runs:
        raise CampaignError(f"{failures} of {runs} fits failed (limit "
                            f"{MAX_FAILURE_FRACTION:.0%})")
    p_true = truth.decay.p
    p_hats = tuple(r[0] for r in ok)
    cis = tuple(r[1] for r in ok)
    covered = tuple(abs(p - p_true) <= h for p, h in zip(p_hats, cis))
    std = float(np.std(p_hats, ddof=1)) if len(ok) > 1 else math.nan
    return MCSummary(runs, p_hats, cis, covered, failures, std,
                     float(np.mean(covered)) if ok else math.nan,
                     float(np.mean(cis)) if ok else math.nan, p_true)


# ---------------------------------------------------------------------------
# drift-adjusted standard deviation

@dataclass(frozen=True)
class AdjustedStd:
    configs: tuple
    adjusted_std: np.ndarray
    raw_std: np.ndarray
    mean_p_hat: np.ndarray

    def write_csv(self, dest) -> None:
        """Write to a path or an open text stream."""
        if hasattr(dest, "write"):
            self._write(dest)
        else:
            with open(dest, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh) -> None:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["config", "adjusted_std", "raw_std", "mean_p_hat"])
        for c, a, r, mn in zip(self.configs, self.adjusted_std, self.raw_std,
                               self.mean_p_hat):
            wr.writerow([c, f"{a:.17g}", f"{r:.17g}", f"{mn:.17g}"])


def adjusted_std(estimates, configs=None) -> AdjustedStd:
    """Per-configuration spread after removing job drift and configuration bias.

    ``estimates[j, c]`` is the decay rate of configuration ``c`` in job ``j``.
    With ``bias_c = grand_mean - mean_j p[j, c]`` the expected value is
    ``row_mean_j - bias_c``; the result is the sample std (ddof 1) over jobs
    of the residuals from it.
    """
    P = np.asarray(estimates, dtype=float)
    if P.ndim != 2 or P.shape[0] < 2 or P.shape[1] < 2:
        raise ValueError("need a (jobs x configs) matrix with >= 2 jobs and >= 2 configs")
    if not np.all(np.isfinite(P)):
        raise ValueError("estimate matrix has missing or non-finite entries")
    grand = P.mean()
    col = P.mean(axis=0)
    row = P.mean(axis=1)
    bias = grand - col
    expected = row[:, None] - bias[None, :]
    resid = P - expected
    configs = tuple(range(P.shape[1])) if configs is None else tuple(configs)
    return AdjustedStd(configs, resid.std(axis=0, ddof=1), P.std(axis=0, ddof=1), col)


def read_estimates_csv(path):
    """Read ``job,config,p_hat`` rows into ``(jobs, configs, matrix)``.

    Jobs and configurations keep their order of first appearance; missing or
    duplicated cells are errors.
    """
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames is None or not {"job", "config", "p_hat"} <= set(rd.fieldnames):
            raise ValueError(f"{path}: header must contain job,config,p_hat")
        rows = list(rd)
    jobs, configs, cells = {}, {}, {}
    for r in rows:
        j = jobs.setdefault(r["job"], len(jobs))
        c = configs.setdefault(r["config"], len(configs))
        if (j, c) in cells:
            raise ValueError(f"duplicate entry for job={r['job']} config={r['config']}")
        cells[(j, c)] = float(r["p_hat"])
    P = np.full((len(jobs), len(configs)), np.nan)
    for (j, c), v in cells.items():
        P[j, c] = v
    if np.isnan(P).any():
        j, c = map(int, np.argwhere(np.isnan(P))[0])
        raise ValueError(f"missing entry for job={list(jobs)[j]} config={list(configs)[c]}")
    return list(jobs), list(configs), P
