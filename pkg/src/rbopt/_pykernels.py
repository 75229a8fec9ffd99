"""Pure-numpy implementation of the hot kernels (fallback for ``_ckernels``).

H' is evaluated as ``num / den`` with

    num = sum w f1^2                 (f = p^m with its weighted mean removed)
    den = num * sum w g2^2           (g = m p^(m-1) projected off span{1, f})

which is algebraically the closed-form block-inverse expression but avoids
its uncentered sums. When the projection cancels too many digits the
Cauchy-Binet expansion (sums of non-negative terms only) is used instead.
All functions work on 2-D batches (one design per row) so a full central
finite-difference stencil costs a handful of numpy calls.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

COND_LIMIT = 1e8


@lru_cache(maxsize=64)
def _pairs(M: int):
    return np.triu_indices(M, 1)


@lru_cache(maxsize=64)
def _triples(M: int):
    return tuple(np.array(list(combinations(range(M), 3)), dtype=np.intp).T)


_SPLIT = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    ca = _SPLIT * a
    ah = ca - (ca - a)
    al = a - ah
    cb = _SPLIT * b
    bh = cb - (cb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _det3(ga, gb, gc, fa, fb, fc):
    """``ga (fb - fc) - gb (fa - fc) + gc (fa - fb)`` with error-free
    transformations; the terms nearly cancel for clustered lengths."""
    total = 0.0
    err = 0.0
    for gx, u, v, sign in ((ga, fb, fc, 1.0), (gb, fa, fc, -1.0), (gc, fa, fb, 1.0)):
        d, dl = _two_sum(u, -v)
        prod, pl = _two_prod(gx, d)
        total, e = _two_sum(total, sign * prod)
        err = err + e + sign * (pl + gx * dl)
    return total + err


def _cauchy_binet(f, g, w):
    M = f.shape[-1]
    i, j = _pairs(M)
    num = np.sum(w[:, i] * w[:, j] * (f[:, i] - f[:, j]) ** 2, axis=1)
    a, b, c = _triples(M)
    det = _det3(g[:, a], g[:, b], g[:, c], f[:, a], f[:, b], f[:, c])
    den = np.sum(w[:, a] * w[:, b] * w[:, c] * det * det, axis=1)
    u = np.sum(w, axis=1)
    return num / u, den / u


def hprime_parts_batch(m, w, p):
    """Numerator and denominator of H' for each row of ``m`` / ``w``."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    w = np.atleast_2d(np.asarray(w, dtype=float))
    if m.shape != w.shape:
        raise ValueError(f"m and w shapes differ: {m.shape} vs {w.shape}")
    with np.errstate(all="ignore"):
        f = np.power(p, m)
        g = m * np.power(p, m - 1.0)
        u = np.sum(w, axis=1, keepdims=True)

        def center(v):
            return v - np.sum(w * v, axis=1, keepdims=True) / u

        f1 = center(center(f))
        ff = np.sum(w * f1 * f1, axis=1, keepdims=True)
        g1 = center(g)
        for _ in range(2):
            g1 = center(g1)
            g1 = g1 - np.sum(w * g1 * f1, axis=1, keepdims=True) / ff * f1
        s = np.sum(w * g1 * g1, axis=1)
        ff = ff[:, 0]
        num = ff
        den = ff * s
        cond = np.maximum(np.sum(w * g * g, axis=1) / s, np.sum(w * f * f, axis=1) / ff)
        bad = ~np.isfinite(cond) | (cond > COND_LIMIT) | ~(s > 0) | ~(ff > 0)
    if np.any(bad):
        cb_num, cb_den = _cauchy_binet(f[bad], g[bad], w[bad])
        num = num.copy()
        den = den.copy()
        num[bad] = cb_num
        den[bad] = cb_den
    return num, den


def hprime_parts(m, w, p):
    num, den = hprime_parts_batch(m, w, p)
    return float(num[0]), float(den[0])


def _aligned(m, n, k):
    m = np.asarray(m, dtype=float)
    return (m, *(np.broadcast_to(np.asarray(x, dtype=float), m.shape) for x in (n, k)))


def design_weights(m, n, k, q, beta, p_hat, D):
    m, n, k = _aligned(m, n, k)
    qm = np.power(q, m)
    mu = (1.0 - 1.0 / D) * np.power(p_hat, m) + 1.0 / D
    return n / (beta * qm * (1.0 - qm) + mu * (1.0 - mu) / k)


def _log_hprime_rows(m, n, k, q, beta, p_hat, D):
    w = design_weights(m, n, k, q, beta, p_hat, D)
    num, den = hprime_parts_batch(m, w, p_hat)
    with np.errstate(all="ignore"):
        out = np.log(num) - np.log(den)
    out[~(den > 1e-300) | ~(num > 0) | ~np.isfinite(out)] = np.inf
    return out


def log_hprime_design(m, n, k, q, beta, p_hat, D):
    """``log H'`` of a (possibly fractional) design; ``inf`` when singular."""
    m, n, k = (x[None, :] for x in _aligned(m, n, k))
    return float(_log_hprime_rows(m, n, k, q, beta, p_hat, D)[0])


def log_hprime_design_grad(m, n, k, q, beta, p_hat, D, rel_step=1e-6, with_k=False):
    """``log H'`` and its central finite-difference gradient.

    Returns ``(value, d/dm, d/dn, d/dk)``; the last is zeros unless
    ``with_k``. Steps are ``rel_step * max(1, |x|)``.
    """
    base = list(_aligned(m, n, k))
    M = base[0].size
    blocks = 3 if with_k else 2
    rows = 1 + 2 * blocks * M
    arrs = [np.repeat(b[None, :], rows, axis=0) for b in base]
    steps = []
    idx = np.arange(M)
    for blk in range(blocks):
        h = rel_step * np.maximum(1.0, np.abs(base[blk]))
        steps.append(h)
        lo = 1 + 2 * blk * M
        arrs[blk][lo + idx, idx] += h
        arrs[blk][lo + M + idx, idx] -= h
    vals = _log_hprime_rows(*arrs, q, beta, p_hat, D)
    grads = []
    for blk in range(3):
        if blk < blocks:
            lo = 1 + 2 * blk * M
            with np.errstate(invalid="ignore"):  # inf - inf at singular designs
                grads.append((vals[lo:lo + M] - vals[lo + M:lo + 2 * M]) / (2 * steps[blk]))
        else:
            grads.append(np.zeros(M))
    return float(vals[0]), grads[0], grads[1], grads[2]
