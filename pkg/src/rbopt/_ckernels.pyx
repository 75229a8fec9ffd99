# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same API and numerics as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, log, fabs, isfinite, fmax, INFINITY

cnp.import_array()

cdef double COND_LIMIT = 1e8


cdef inline void _acc(double *s, double *c, double x) noexcept nogil:
    # Neumaier compensated summation
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


cdef double _wsum(const double *w, const double *v, const double *v2, Py_ssize_t M) noexcept nogil:
    # sum w * v * v2 (v2 may be NULL meaning 1)
    cdef double s = 0.0, c = 0.0
    cdef Py_ssize_t i
    if v2 == NULL:
        for i in range(M):
            _acc(&s, &c, w[i] * v[i])
    else:
        for i in range(M):
            _acc(&s, &c, w[i] * v[i] * v2[i])
    return s + c


cdef double SPLIT = 134217729.0


cdef inline double _two_sum(double a, double b, double *err) noexcept nogil:
    cdef double s = a + b
    cdef double bb = s - a
    err[0] = (a - (s - bb)) + (b - bb)
    return s


cdef inline double _two_prod(double a, double b, double *err) noexcept nogil:
    cdef double p = a * b
    cdef double ca = SPLIT * a, cb = SPLIT * b
    cdef double ah = ca - (ca - a), bh = cb - (cb - b)
    cdef double al = a - ah, bl = b - bh
    err[0] = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p


cdef inline double _det_term(double gx, double u, double v, double sign,
                             double *total, double *err) noexcept nogil:
    cdef double dl, pl, e, d, prod
    d = _two_sum(u, -v, &dl)
    prod = _two_prod(gx, d, &pl)
    total[0] = _two_sum(total[0], sign * prod, &e)
    err[0] += e + sign * (pl + gx * dl)
    return 0.0


cdef inline double _det3(double ga, double gb, double gc, double fa, double fb,
                         double fc) noexcept nogil:
    # near-cancelling 3x3 determinant via error-free transformations
    cdef double total = 0.0, err = 0.0
    _det_term(ga, fb, fc, 1.0, &total, &err)
    _det_term(gb, fa, fc, -1.0, &total, &err)
    _det_term(gc, fa, fb, 1.0, &total, &err)
    return total + err


cdef void _cauchy_binet(const double *f, const double *g, const double *w, Py_ssize_t M,
                        double *num, double *den) noexcept nogil:
    cdef double sn = 0.0, cn = 0.0, sd = 0.0, cd = 0.0, d, fij
    cdef Py_ssize_t i, j, l
    for i in range(M):
        for j in range(i + 1, M):
            fij = f[i] - f[j]
            _acc(&sn, &cn, w[i] * w[j] * fij * fij)
            for l in range(j + 1, M):
                d = _det3(g[i], g[j], g[l], f[i], f[j], f[l])
                _acc(&sd, &cd, w[i] * w[j] * w[l] * d * d)
    cdef double u = 0.0
    for i in range(M):
        u += w[i]
    num[0] = (sn + cn) / u
    den[0] = (sd + cd) / u


cdef void _parts(const double *m, const double *w, double p, Py_ssize_t M,
                 double *f, double *g, double *f1, double *g1,
                 double *num, double *den) noexcept nogil:
    cdef Py_ssize_t i, it
    cdef double u = 0.0, mean, ff, proj, s, cond, gg, fsq
    for i in range(M):
        f[i] = pow(p, m[i])
        g[i] = m[i] * pow(p, m[i] - 1.0)
        u += w[i]
    for i in range(M):
        f1[i] = f[i]
        g1[i] = g[i]
    for it in range(2):
        mean = _wsum(w, f1, NULL, M) / u
        for i in range(M):
            f1[i] -= mean
    ff = _wsum(w, f1, f1, M)
    mean = _wsum(w, g1, NULL, M) / u
    for i in range(M):
        g1[i] -= mean
    for it in range(2):
        mean = _wsum(w, g1, NULL, M) / u
        for i in range(M):
            g1[i] -= mean
        proj = _wsum(w, g1, f1, M) / ff
        for i in range(M):
            g1[i] -= proj * f1[i]
    s = _wsum(w, g1, g1, M)
    gg = _wsum(w, g, g, M)
    fsq = _wsum(w, f, f, M)
    cond = fmax(gg / s, fsq / ff)
    if not (s > 0 and ff > 0 and isfinite(cond) and cond <= COND_LIMIT):
        _cauchy_binet(f, g, w, M, num, den)
    else:
        num[0] = ff
        den[0] = ff * s


def _vec(x, Py_ssize_t M):
    # broadcast scalars; a length mismatch would read past the buffer
    return np.ascontiguousarray(np.broadcast_to(np.asarray(x, dtype=np.float64), (M,)))


def hprime_parts(m, w, double p):
    cdef const double[::1] mv = np.ascontiguousarray(m, dtype=np.float64)
    cdef Py_ssize_t M = mv.shape[0]
    cdef const double[::1] wv = _vec(w, M)
    cdef double[:, ::1] scratch = np.empty((4, M))
    cdef double num, den
    _parts(&mv[0], &wv[0], p, M, &scratch[0, 0], &scratch[1, 0], &scratch[2, 0],
           &scratch[3, 0], &num, &den)
    return num, den


def hprime_parts_batch(m, w, double p):
    cdef const double[:, ::1] mv = np.ascontiguousarray(np.atleast_2d(m), dtype=np.float64)
    cdef const double[:, ::1] wv = np.ascontiguousarray(np.atleast_2d(w), dtype=np.float64)
    cdef Py_ssize_t B = mv.shape[0], M = mv.shape[1], b
    if wv.shape[0] != B or wv.shape[1] != M:
        raise ValueError(f"m and w shapes differ: {(B, M)} vs {(wv.shape[0], wv.shape[1])}")
    cdef double[:, ::1] scratch = np.empty((4, M))
    nums = np.empty(B)
    dens = np.empty(B)
    cdef double[::1] nv = nums, dv = dens
    for b in range(B):
        _parts(&mv[b, 0], &wv[b, 0], p, M, &scratch[0, 0], &scratch[1, 0],
               &scratch[2, 0], &scratch[3, 0], &nv[b], &dv[b])
    return nums, dens


cdef inline void _weights(const double *m, const double *n, const double *k, double q,
                          double beta, double p_hat, double D, Py_ssize_t M,
                          double *w) noexcept nogil:
    cdef Py_ssize_t i
    cdef double qm, mu
    for i in range(M):
        qm = pow(q, m[i])
        mu = (1.0 - 1.0 / D) * pow(p_hat, m[i]) + 1.0 / D
        w[i] = n[i] / (beta * qm * (1.0 - qm) + mu * (1.0 - mu) / k[i])


cdef double _log_hprime(const double *m, const double *n, const double *k, double q,
                        double beta, double p_hat, double D, Py_ssize_t M,
                        double *scratch) noexcept nogil:
    cdef double num, den, out
    _weights(m, n, k, q, beta, p_hat, D, M, scratch)
    _parts(m, scratch, p_hat, M, scratch + M, scratch + 2 * M, scratch + 3 * M,
           scratch + 4 * M, &num, &den)
    if not (den > 1e-300 and num > 0):
        return INFINITY
    out = log(num) - log(den)
    if not isfinite(out):
        return INFINITY
    return out


def design_weights(m, n, k, double q, double beta, double p_hat, double D):
    cdef const double[::1] mv = np.ascontiguousarray(m, dtype=np.float64)
    cdef Py_ssize_t M = mv.shape[0]
    cdef const double[::1] nv = _vec(n, M)
    cdef const double[::1] kv = _vec(k, M)
    w = np.empty(M)
    cdef double[::1] wv = w
    _weights(&mv[0], &nv[0], &kv[0], q, beta, p_hat, D, M, &wv[0])
    return w


def log_hprime_design(m, n, k, double q, double beta, double p_hat, double D):
    cdef const double[::1] mv = np.ascontiguousarray(m, dtype=np.float64)
    cdef Py_ssize_t M = mv.shape[0]
    cdef const double[::1] nv = _vec(n, M)
    cdef const double[::1] kv = _vec(k, M)
    cdef double[::1] scratch = np.empty(5 * M)
    return _log_hprime(&mv[0], &nv[0], &kv[0], q, beta, p_hat, D, M, &scratch[0])


def log_hprime_design_grad(m, n, k, double q, double beta, double p_hat, double D,
                           double rel_step=1e-6, bint with_k=False):
    mm = np.ascontiguousarray(m, dtype=np.float64)
    cdef double[:, ::1] x = np.ascontiguousarray(
        np.vstack([mm, _vec(n, mm.shape[0]), _vec(k, mm.shape[0])]))
    cdef Py_ssize_t M = x.shape[1], blk, i
    cdef int blocks = 3 if with_k else 2
    cdef double[::1] scratch = np.empty(5 * M)
    grads = np.zeros((3, M))
    cdef double[:, ::1] gv = grads
    cdef double h, orig, fp, fm, f0
    with nogil:
        f0 = _log_hprime(&x[0, 0], &x[1, 0], &x[2, 0], q, beta, p_hat, D, M, &scratch[0])
        for blk in range(blocks):
            for i in range(M):
                orig = x[blk, i]
                h = rel_step * fmax(1.0, fabs(orig))
                x[blk, i] = orig + h
                fp = _log_hprime(&x[0, 0], &x[1, 0], &x[2, 0], q, beta, p_hat, D, M,
                                 &scratch[0])
                x[blk, i] = orig - h
                fm = _log_hprime(&x[0, 0], &x[1, 0], &x[2, 0], q, beta, p_hat, D, M,
                                 &scratch[0])
                x[blk, i] = orig
                gv[blk, i] = (fp - fm) / (2.0 * h)
    return f0, grads[0], grads[1], grads[2]
