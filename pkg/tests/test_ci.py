import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbopt.ci import (DegenerateDesignError, WeightVector, ci_halfwidth, h_prime_explicit,
                      h_prime_oracle, jacobian_row, objective_h, weights_from_model)
from rbopt.model import RBConfig, VarianceParams
from rbopt.stats import t_critical

from oracles import h_prime_mp, objective_h_mp
from reference_configs import LINEAR_M

# frozen from the 50-digit oracle in tests/oracles.py
H_PRIME_1234 = 1181.1215110431099  # m=[1,2,3,4], w=1, p=0.97
H_LINEAR_REF = 0.0022435714336693294  # linear 21x5x100 at the planning parameters


def _random_instance(rng):
    M = int(rng.integers(4, 41))
    m = np.sort(rng.choice(np.arange(1, 513), size=M, replace=False)).astype(float)
    w = rng.uniform(0, 1e4, M)
    w[w == 0] = 1.0
    return m, w, float(rng.uniform(0.8, 0.999))


def test_frozen_hprime(backend):
    assert h_prime_explicit([1, 2, 3, 4], np.ones(4), 0.97) == pytest.approx(H_PRIME_1234,
                                                                          rel=1e-12)
    assert h_prime_mp([1, 2, 3, 4], [1] * 4, 0.97) == pytest.approx(H_PRIME_1234, rel=1e-15)


def test_frozen_objective_linear(backend, vp):
    cfg = RBConfig(LINEAR_M, [5] * 21, [100] * 21)
    res = objective_h(cfg, vp, 0.05)
    assert res.h_value == pytest.approx(H_LINEAR_REF, rel=1e-12)
    assert res.h_value == pytest.approx(res.t_factor * math.sqrt(res.H_prime), rel=1e-15)
    assert res.M == 21 and res.t_factor == t_critical(21, 0.05)


def test_explicit_matches_oracles(backend):
    rng = np.random.default_rng(123)
    for _ in range(300):
        m, w, p = _random_instance(rng)
        ref = h_prime_oracle(m, w, p)
        assert h_prime_explicit(m, w, p) == pytest.approx(ref, rel=1e-9)
    for _ in range(20):
        m, w, p = _random_instance(rng)
        assert h_prime_oracle(m, w, p) == pytest.approx(h_prime_mp(m, w, p), rel=1e-12)


def test_oracle_independent_of_a():
    rng = np.random.default_rng(7)
    for _ in range(50):
        m, w, p = _random_instance(rng)
        vals = [h_prime_oracle(m, w, p, a) for a in (0.1, 0.3, 0.5, 0.75, 0.9, 1.0)]
        assert max(vals) - min(vals) <= 1e-12 * abs(vals[0])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 40), min_size=4, max_size=25),
       st.floats(0.85, 0.995), st.sampled_from([0.5, 2.0, 10.0]), st.randoms())
def test_hprime_weight_scaling_and_permutation(gaps, p, c, rnd):
    m = np.cumsum(gaps).astype(float)
    w = np.linspace(10, 1000, m.size)
    base = h_prime_explicit(m, w, p)
    assert h_prime_explicit(m, c * w, p) == pytest.approx(base / c, rel=1e-10)
    order = list(range(m.size))
    rnd.shuffle(order)
    assert h_prime_explicit(m[order], w[order], p) == pytest.approx(base, rel=1e-10)


def test_degenerate_design_rejected():
    with pytest.raises(DegenerateDesignError, match="m="):
        h_prime_explicit([5, 5, 5, 5], np.ones(4), 0.97)
    with pytest.raises(DegenerateDesignError):
        h_prime_oracle([5, 5, 5, 5], np.ones(4), 0.97)
    with pytest.raises(ValueError):
        h_prime_explicit([1, 2, 3], np.ones(3), 0.97)


def test_jacobian_row():
    assert np.array_equal(jacobian_row(1, 0.97, 0.75), [0.75, 0.97, 1.0])
    assert np.allclose(jacobian_row(2, 0.5, 1.0), [1.0, 0.25, 1.0], rtol=0, atol=0)


def test_weights_examples(vp):
    cfg = RBConfig((1, 2, 3, 4), (1, 1, 1, 1), (100,) * 4)
    w = weights_from_model(cfg, vp)
    assert w.w[0] == pytest.approx(1 / 2.92688e-4, rel=1e-5)
    assert w.provenance["q"] == 0.97
    cfg2 = RBConfig((1, 2, 3, 4), (2, 2, 2, 2), (100,) * 4)
    assert np.allclose(weights_from_model(cfg2, vp).w, 2 * w.w, rtol=1e-15)
    assert np.allclose(w.scaled(3.0).w, 3 * w.w)
    with pytest.raises(ValueError):
        WeightVector([1.0, 0.0, 1.0, 1.0])


def test_zero_variance_weights_rejected():
    vp0 = VarianceParams(0.97, 0.0, 1.0)
    with pytest.raises(DegenerateDesignError, match="beta"):
        weights_from_model(RBConfig((1, 2, 3, 4), (1,) * 4, (100,) * 4), vp0)


def test_objective_scaling_and_monotonicity(backend, vp):
    cfg = RBConfig(LINEAR_M, [5] * 21, [100] * 21)
    cfg2 = RBConfig(LINEAR_M, [10] * 21, [100] * 21)
    a, b = objective_h(cfg, vp), objective_h(cfg2, vp)
    assert b.H_prime == pytest.approx(a.H_prime / 2, rel=1e-12)
    assert b.h_value == pytest.approx(a.h_value / math.sqrt(2), rel=1e-12)
    for i in range(21):
        n = [5] * 21
        n[i] = 6
        assert objective_h(RBConfig(LINEAR_M, n, [100] * 21), vp).h_value <= a.h_value


def test_objective_against_mp_pipeline(vp):
    rng = np.random.default_rng(3)
    for _ in range(10):
        M = int(rng.integers(4, 30))
        m = [int(x) for x in np.sort(rng.choice(np.arange(1, 400), size=M, replace=False))]
        n = [int(x) for x in rng.integers(1, 12, M)]
        cfg = RBConfig(m, n, [100] * M)
        ref = objective_h_mp(m, n, [100] * M, 0.97, 0.0025, 0.97, 4, t_critical(M, 0.05))
        assert objective_h(cfg, vp).h_value == pytest.approx(ref, rel=1e-9)


def test_objective_exponential_interior_minimum(vp, tp):
    from rbopt.optimizer import OptimizeSpec, heuristic_config
    spec = OptimizeSpec(vp, tp)
    hs = [objective_h(heuristic_config("exponential", M, spec), vp).h_value
          for M in range(4, 15)]
    best = int(np.argmin(hs))
    assert 0 < best < len(hs) - 1


def test_objective_custom_p_hat(vp):
    cfg = RBConfig(LINEAR_M, [5] * 21, [100] * 21)
    assert objective_h(cfg, vp, p_hat=0.97).h_value == objective_h(cfg, vp).h_value
    assert objective_h(cfg, vp, p_hat=0.98).h_value != objective_h(cfg, vp).h_value


def test_ci_halfwidth_examples():
    assert ci_halfwidth(0.0, 1.0, 21) == 0.0
    assert ci_halfwidth(1.0, 1.0, 21, 0.05) == pytest.approx(2.10092204024096, abs=1e-8)
    assert ci_halfwidth(4.0, 0.3, 10) == pytest.approx(2 * ci_halfwidth(1.0, 0.3, 10),
                                                       rel=1e-15)
    with pytest.raises(ValueError):
        ci_halfwidth(1.0, 1.0, 3)
