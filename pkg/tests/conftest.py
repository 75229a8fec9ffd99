import importlib

import pytest

from rbopt import _pykernels
from rbopt.model import DecayParams, TimeParams, VarianceParams

try:
    _ck = importlib.import_module("rbopt._ckernels")
except ImportError:  # extension not built
    _ck = None

BACKENDS = {"python": _pykernels}
if _ck is not None:
    BACKENDS["compiled"] = _ck


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Route every kernel call in the package through one backend."""
    from rbopt import kernels
    mod = BACKENDS[request.param]
    for name in ("hprime_parts", "hprime_parts_batch", "design_weights",
                 "log_hprime_design", "log_hprime_design_grad"):
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return mod


@pytest.fixture
def vp():
    return VarianceParams(q=0.97, beta=0.0025, p_hat=0.97, D=4)


@pytest.fixture
def tp():
    return TimeParams.from_microseconds(0.6, 250.0, 3.0)


@pytest.fixture
def truth_decay():
    return DecayParams(0.97, 0.75, 0.25)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
