import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbopt.model import (DecayParams, RBConfig, TimeParams, ValidationError, VarianceParams,
                         avg_gate_fidelity, decay, exec_time, var_avg_survival, var_seq,
                         var_shot)

from oracles import exec_time_loop
from reference_configs import TIME_ROWS


# --- RBConfig ---------------------------------------------------------------

def test_config_rejects_three_lengths():
    with pytest.raises(ValidationError, match="M >= 4 required"):
        RBConfig((1, 2, 3), (1, 1, 1), (1, 1, 1))


@pytest.mark.parametrize("m", [(1, 1, 2, 3), (0, 1, 2, 3), (1, 3, 2, 4)])
def test_config_rejects_bad_lengths(m):
    with pytest.raises(ValidationError) as exc:
        RBConfig(m, (1,) * 4, (1,) * 4)
    assert exc.value.field == "m"


def test_config_rejects_nonpositive_counts():
    with pytest.raises(ValidationError):
        RBConfig((1, 2, 3, 4), (1, 0, 1, 1), (1,) * 4)
    with pytest.raises(ValidationError):
        RBConfig((1, 2, 3, 4), (1,) * 4, (1, 1, 0, 1))
    with pytest.raises(ValidationError):
        RBConfig((1, 2, 3, 4), (1.5, 1, 1, 1), (1,) * 4)


def test_config_json_round_trip():
    cfg = RBConfig((1, 5, 9, 30), (5, 6, 7, 8), (100,) * 4)
    assert RBConfig.from_json(cfg.to_json()) == cfg
    assert RBConfig.from_dict({"m": [1, 5, 9, 30], "n": 5, "k": 100}).n == (5,) * 4
    assert json.loads(cfg.to_json()) == {"m": [1, 5, 9, 30], "n": [5, 6, 7, 8],
                                         "k": [100] * 4}


# --- parameter types ---------------------------------------------------------

@pytest.mark.parametrize("kw,field", [
    (dict(p=0.0, a=0.5, b=0.1), "p"),
    (dict(p=0.9, a=0.0, b=0.1), "a"),
    (dict(p=0.9, a=0.5, b=-0.1), "b"),
    (dict(p=0.9, a=0.8, b=0.3), "a"),
])
def test_decay_params_invariants(kw, field):
    with pytest.raises(ValidationError) as exc:
        DecayParams(**kw)
    assert exc.value.field == field


@pytest.mark.parametrize("kw,field", [
    (dict(q=1.0, beta=0.1, p_hat=0.9), "q"),
    (dict(q=0.9, beta=-1e-9, p_hat=0.9), "beta"),
    (dict(q=0.9, beta=0.1, p_hat=0.0), "p_hat"),
    (dict(q=0.9, beta=0.1, p_hat=0.9, D=3), "dim"),
    (dict(q=0.9, beta=0.1, p_hat=0.9, D=1), "dim"),
])
def test_variance_params_invariants(kw, field):
    with pytest.raises(ValidationError) as exc:
        VarianceParams(**kw)
    assert exc.value.field == field


def test_time_params_invariants():
    for args in [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0)]:
        with pytest.raises(ValidationError):
            TimeParams(*args)
    tp = TimeParams.from_microseconds(0.6, 250, 3.0)
    assert tp.c1 == pytest.approx(6e-7, rel=1e-15)
    assert tp.c0 == pytest.approx(2.5e-4, rel=1e-15)


# --- decay / fidelity --------------------------------------------------------

def test_decay_examples(truth_decay):
    assert decay(0, DecayParams(0.5, 0.3, 0.2)) == pytest.approx(0.5)
    assert decay(1, truth_decay) == pytest.approx(0.9775, rel=1e-15)
    # 50-digit reference: 0.75 * 0.97**100 + 0.25
    assert decay(100, truth_decay) == pytest.approx(0.28566438094405432, rel=1e-13)


@given(st.floats(0.01, 0.999), st.floats(0.01, 0.7), st.floats(0.0, 0.29),
       st.integers(0, 2000))
def test_decay_monotone(p, a, b, m):
    params = DecayParams(p, a, b)
    assert decay(m + 1, params) <= decay(m, params)


def test_avg_gate_fidelity():
    assert avg_gate_fidelity(1.0, 4) == 1.0
    assert avg_gate_fidelity(0.0, 4) == 0.25
    assert avg_gate_fidelity(0.97, 4) == pytest.approx(0.9775, rel=1e-15)


# --- variance model ----------------------------------------------------------

def test_variance_examples(vp):
    assert var_seq(1, vp) == pytest.approx(7.275e-5, rel=1e-12)
    assert var_shot(1, 100, vp) == pytest.approx(0.9775 * 0.0225 / 100, rel=1e-12)
    assert var_shot(1, 100, vp) == pytest.approx(2.19938e-4, rel=1e-5)
    assert var_avg_survival(1, 1, 100, vp) == pytest.approx(2.92688e-4, rel=1e-5)
    assert var_seq(1, VarianceParams(0.97, 0.0, 0.97)) == 0.0
    assert var_seq(1e5, vp) == pytest.approx(0.0, abs=1e-300)
    assert var_shot(7, 100, VarianceParams(0.97, 0.0025, 1.0)) == 0.0
    assert var_shot(10 ** 5, 100, vp) == pytest.approx(0.1875 / 100, rel=1e-12)


def test_var_seq_peak_at_half(vp):
    grid = np.linspace(1, 200, 200001)
    peak = grid[np.argmax(var_seq(grid, vp))]
    assert peak == pytest.approx(math.log(0.5) / math.log(vp.q), abs=2e-3)


@given(st.floats(1, 1000), st.floats(0.5, 100), st.integers(1, 10 ** 4),
       st.integers(1, 10 ** 4))
def test_variance_monotone_in_n_and_k(m, n, k1, k2, ):
    vp = VarianceParams(0.97, 0.0025, 0.97)
    v = var_avg_survival(m, n, k1, vp)
    assert var_avg_survival(m, 2 * n, k1, vp) == pytest.approx(v / 2, rel=1e-14)
    lo, hi = sorted((k1, k2))
    assert var_avg_survival(m, n, hi, vp) <= var_avg_survival(m, n, lo, vp)


# --- execution time ----------------------------------------------------------

@pytest.mark.parametrize("name,m,n,expected", TIME_ROWS, ids=[r[0] for r in TIME_ROWS])
def test_exec_time_reference_rows(name, m, n, expected, tp):
    cfg = RBConfig(m, n, [100] * len(m))
    assert abs(exec_time(cfg, tp) - expected) <= 0.0005
    assert exec_time(cfg, tp) == pytest.approx(
        exec_time_loop(m, n, [100] * len(m), 0.6e-6, 250e-6), rel=1e-13)


@settings(max_examples=50)
@given(st.lists(st.integers(1, 50), min_size=4, max_size=12), st.floats(0.1, 10))
def test_exec_time_linear_in_n(gaps, c):
    tp = TimeParams.from_microseconds(0.6, 250, 3.0)
    m = np.cumsum(gaps)
    n = np.arange(1, len(m) + 1, dtype=float)
    k = np.full(len(m), 100.0)
    assert exec_time((m, c * n, k), tp) == pytest.approx(c * exec_time((m, n, k), tp),
                                                         rel=1e-13)


def test_exec_time_general_model():
    tp = TimeParams.from_microseconds(0.6, 250, 3.0, cL_us=1000)
    cfg = RBConfig((1, 2, 3, 4), (2, 2, 2, 2), (10,) * 4)
    base = exec_time(cfg, tp)
    assert exec_time(cfg, tp, general=True) == pytest.approx(base + 8 * 1e-3, rel=1e-13)
