import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbopt import _pykernels, kernels

from conftest import BACKENDS
from oracles import h_prime_mp


def _random_design(rng, M):
    m = np.sort(rng.choice(np.arange(1, 513), size=M, replace=False)).astype(float)
    n = rng.uniform(1, 20, M)
    k = rng.uniform(10, 1000, M)
    return m, n, k


def test_selected_backend_is_known():
    assert kernels.BACKEND in ("compiled", "python")
    forced = os.environ.get("RBOPT_PURE_PYTHON", "") not in ("", "0")
    expected = "compiled" if "compiled" in BACKENDS and not forced else "python"
    assert kernels.BACKEND == expected


@pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")
def test_backends_agree():
    ck, pk = BACKENDS["compiled"], BACKENDS["python"]
    rng = np.random.default_rng(5)
    for _ in range(200):
        M = int(rng.integers(4, 41))
        m, n, k = _random_design(rng, M)
        args = (m, n, k, 0.97, 0.0025, float(rng.uniform(0.8, 0.999)), 4.0)
        assert ck.design_weights(*args) == pytest.approx(pk.design_weights(*args), rel=1e-14)
        assert ck.log_hprime_design(*args) == pytest.approx(pk.log_hprime_design(*args),
                                                            rel=1e-11, abs=1e-11)
        fc = ck.log_hprime_design_grad(*args, 1e-6, True)
        fp = pk.log_hprime_design_grad(*args, 1e-6, True)
        for a, b in zip(fc[1:], fp[1:]):
            assert np.allclose(a, b, rtol=1e-4, atol=1e-7)


def test_parts_against_mp_oracle(backend):
    rng = np.random.default_rng(9)
    for _ in range(100):
        M = int(rng.integers(4, 41))
        m, _, _ = _random_design(rng, M)
        w = rng.uniform(1e-3, 1e4, M)
        p = float(rng.uniform(0.8, 0.999))
        num, den = backend.hprime_parts(m, w, p)
        assert num / den == pytest.approx(h_prime_mp(m, w, p), rel=1e-9)


def test_cauchy_binet_branch_matches(backend, monkeypatch):
    # force the fallback everywhere and compare with the projection form
    rng = np.random.default_rng(2)
    m, _, _ = _random_design(rng, 12)
    w = rng.uniform(1, 100, 12)
    num, den = backend.hprime_parts(m, w, 0.97)
    cb_num, cb_den = _pykernels._cauchy_binet(np.power(0.97, m)[None], (m * np.power(0.97, m - 1))[None],
                                              w[None])
    assert cb_num[0] / cb_den[0] == pytest.approx(num / den, rel=1e-11)


def test_cauchy_binet_exact_for_given_entries():
    # same double-precision entries on both sides: only the algorithm differs
    from fractions import Fraction
    m = np.arange(1.0, 5.0)
    for p in (0.97, 0.999, 0.9999, 0.99999):
        f = np.power(p, m)
        g = m * np.power(p, m - 1.0)
        num, den = _pykernels._cauchy_binet(f[None], g[None], np.ones((1, 4)))
        F = [Fraction(float(x)) for x in f]
        G = [Fraction(float(x)) for x in g]
        exact_num = sum((F[i] - F[j]) ** 2 for i in range(4) for j in range(i + 1, 4))
        exact_den = sum((G[i] * (F[j] - F[l]) - G[j] * (F[i] - F[l]) + G[l] * (F[i] - F[j])) ** 2
                        for i in range(4) for j in range(i + 1, 4) for l in range(j + 1, 4))
        assert num[0] / den[0] == pytest.approx(float(exact_num / exact_den), rel=1e-14)


def test_ill_conditioned_design_stays_accurate(backend):
    # consecutive short lengths: condition estimates ~1e4..3e7. Beyond that a
    # one-ulp difference in p^m between libm and vectorized numpy already
    # exceeds the tolerance, whatever the inversion algorithm.
    m = np.arange(1.0, 5.0)
    w = np.ones(4)
    for p in (0.9, 0.97, 0.999):
        num, den = backend.hprime_parts(m, w, p)
        assert num / den == pytest.approx(h_prime_mp(m, w, p), rel=1e-9)


def test_singular_design_is_infinite(backend):
    m = np.array([1.0, 2.0, 3.0, 4.0])
    # p -> 0 underflows every column except the constant
    assert backend.log_hprime_design(m + 2000, np.ones(4), np.full(4, 100.0), 0.97, 0.0025,
                                     0.5, 4.0) == np.inf


def test_grad_matches_independent_difference(backend):
    rng = np.random.default_rng(4)
    m, n, k = _random_design(rng, 8)
    args = (0.97, 0.0025, 0.97, 4.0)
    f, gm, gn, gk = backend.log_hprime_design_grad(m, n, k, *args, 1e-6, True)
    assert f == backend.log_hprime_design(m, n, k, *args)
    for vec, g in ((m, gm), (n, gn), (k, gk)):
        for i in range(8):
            h = 1e-5 * max(1.0, abs(vec[i]))
            orig = vec[i]
            vec[i] = orig + h
            fp = backend.log_hprime_design(m, n, k, *args)
            vec[i] = orig - h
            fm = backend.log_hprime_design(m, n, k, *args)
            vec[i] = orig
            assert g[i] == pytest.approx((fp - fm) / (2 * h), rel=1e-4, abs=1e-7)


def test_grad_without_k_block_is_zero(backend):
    m, n, k = np.array([1.0, 5, 20, 80]), np.full(4, 5.0), np.full(4, 100.0)
    _, _, _, gk = backend.log_hprime_design_grad(m, n, k, 0.97, 0.0025, 0.97, 4.0)
    assert np.all(gk == 0)


def test_readonly_inputs_accepted(backend):
    m = np.array([1.0, 5, 20, 80])
    m.setflags(write=False)
    w = np.ones(4)
    w.setflags(write=False)
    backend.hprime_parts(m, w, 0.97)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 60), min_size=4, max_size=30, unique=True),
       st.floats(0.8, 0.999))
def test_batch_rows_equal_single_calls(gaps, p):
    m = np.cumsum(gaps).astype(float)
    w = np.linspace(1, 10, m.size)
    for mod in BACKENDS.values():
        nb, db = mod.hprime_parts_batch(np.vstack([m, m]), np.vstack([w, 2 * w]), p)
        n1, d1 = mod.hprime_parts(m, w, p)
        assert nb[0] / db[0] == pytest.approx(n1 / d1, rel=1e-13)
        assert nb[1] / db[1] == pytest.approx(n1 / d1 / 2, rel=1e-11)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_length_mismatch_rejected_and_scalars_broadcast(name):
    mod = BACKENDS[name]
    m = np.arange(1.0, 6.0)
    with pytest.raises(ValueError):
        mod.hprime_parts(m, np.ones(3), 0.9)
    with pytest.raises(ValueError):
        mod.hprime_parts_batch(m, np.ones((2, 5)), 0.9)
    with pytest.raises(ValueError):
        mod.design_weights(m, np.ones(2), 100.0, 0.97, 0.0025, 0.97, 4.0)
    args = (0.97, 0.0025, 0.97, 4.0)
    full = mod.log_hprime_design(m, np.full(5, 5.0), np.full(5, 100.0), *args)
    assert mod.log_hprime_design(m, 5.0, 100.0, *args) == full
    assert mod.log_hprime_design_grad(m, 5.0, 100.0, *args)[0] == full
