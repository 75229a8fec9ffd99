"""Independent reference implementations used only by the tests.

None of these call into the package's numerical kernels.
"""
import mpmath
import numpy as np

mpmath.mp.dps = 50


def exec_time_loop(m, n, k, c1, c0):
    total = 0.0
    for mi, ni, ki in zip(m, n, k):
        total += ni * ki * (c1 * mi + c0)
    return total


def h_prime_mp(m, w, p, a=1.0, exact_entries=False):
    """``a^2 [(J^T W J)^{-1}]_pp`` with a 50-digit generic matrix inverse.

    By default the Jacobian entries ``p^m`` and ``m p^(m-1)`` are first rounded
    to doubles the way a double-precision caller forms them, so the comparison
    isolates the inverse; near-singular designs amplify one-ulp input changes
    by their condition number. ``exact_entries`` uses 50-digit powers instead.
    """
    a = mpmath.mpf(a)
    G = mpmath.zeros(3, 3)
    for mi, wi in zip(m, w):
        if exact_entries:
            pm, mm = mpmath.mpf(p), mpmath.mpf(mi)
            fi, gi = pm ** mm, mm * pm ** (mm - 1)
        else:
            fi = mpmath.mpf(float(np.power(p, float(mi))))
            gi = mpmath.mpf(float(float(mi) * np.power(p, float(mi) - 1.0)))
        row = [a * gi, fi, mpmath.mpf(1)]
        for i in range(3):
            for j in range(3):
                G[i, j] += mpmath.mpf(wi) * row[i] * row[j]
    return float(a * a * (G ** -1)[0, 0])


def weights_mp(m, n, k, q, beta, p_hat, D):
    out = []
    for mi, ni, ki in zip(m, n, k):
        mi = mpmath.mpf(mi)
        qm = mpmath.mpf(q) ** mi
        mu = (1 - mpmath.mpf(1) / D) * mpmath.mpf(p_hat) ** mi + mpmath.mpf(1) / D
        out.append(float(ni / (beta * qm * (1 - qm) + mu * (1 - mu) / ki)))
    return out


def objective_h_mp(m, n, k, q, beta, p_hat, D, t_factor):
    w = weights_mp(m, n, k, q, beta, p_hat, D)
    return t_factor * float(mpmath.sqrt(h_prime_mp(m, w, p_hat)))
