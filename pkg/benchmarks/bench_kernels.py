"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--skip-optimize]

Kernel timings call both backend modules directly. The end-to-end optimize
timing runs in subprocesses with ``RBOPT_PURE_PYTHON`` set or unset, since
the backend is chosen at import.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from rbopt import _pykernels

try:
    from rbopt import _ckernels
except ImportError:  # extension not built
    _ckernels = None

VP = dict(q=0.97, beta=0.0025, p_hat=0.97, D=4.0)

OPTIMIZE_SNIPPET = """
import time
from rbopt import kernels
from rbopt.model import TimeParams, VarianceParams
from rbopt.optimizer import OptimizeSpec, optimize
spec = OptimizeSpec(VarianceParams(0.97, 0.0025, 0.97, 4),
                    TimeParams.from_microseconds(0.6, 250.0, 3.0), M_min={lo}, M_max={hi})
t0 = time.perf_counter()
rep = optimize(spec)
print(kernels.BACKEND, time.perf_counter() - t0, repr(rep.h_best))
"""


def _design(M, rng):
    m = np.sort(rng.choice(np.arange(1, 513), size=M, replace=False)).astype(float)
    n = rng.uniform(5, 12, M)
    k = np.full(M, 100.0)
    return m, n, k


def _cases(rng):
    m18, n18, k18 = _design(18, rng)
    m40, n40, k40 = _design(40, rng)
    w40 = rng.uniform(1, 1e4, 40)
    W = rng.uniform(1, 1e4, (256, 40))
    Mb = np.tile(m40, (256, 1))
    args18 = (m18, n18, k18, VP["q"], VP["beta"], VP["p_hat"], VP["D"])
    return [
        ("hprime_parts M=40", lambda mod: mod.hprime_parts(m40, w40, 0.97)),
        ("hprime_parts_batch 256x40", lambda mod: mod.hprime_parts_batch(Mb, W, 0.97)),
        ("log_hprime_design M=18", lambda mod: mod.log_hprime_design(*args18)),
        ("log_hprime_design_grad M=18", lambda mod: mod.log_hprime_design_grad(*args18)),
    ]


def _flat(result):
    parts = result if isinstance(result, tuple) else (result,)
    return np.hstack([np.ravel(np.asarray(x, dtype=float)) for x in parts])


def _time(fn, repeat):
    number = max(1, int(0.2 / max(min(timeit.repeat(fn, number=1, repeat=3)), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def bench_kernels(repeat):
    mods = {"python": _pykernels}
    if _ckernels is not None:
        mods["compiled"] = _ckernels
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s}" + "".join(f"{name:>14s}" for name in mods) + f"{'speedup':>10s}")
    for label, call in _cases(rng):
        ref = call(_pykernels)
        times = {}
        for name, mod in mods.items():
            np.testing.assert_allclose(_flat(call(mod)), _flat(ref), rtol=1e-6, atol=1e-7)
            times[name] = _time(lambda: call(mod), repeat)
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{label:32s}" + "".join(f"{t * 1e6:12.1f}us" for t in times.values())
              + f"{speed:9.1f}x")


def bench_optimize(lo, hi):
    print(f"\nend-to-end optimize, reference parameters, M in [{lo}, {hi}], one thread")
    for force_python in (False, True):
        env = dict(os.environ)
        env.pop("RBOPT_PURE_PYTHON", None)
        if force_python:
            env["RBOPT_PURE_PYTHON"] = "1"
        out = subprocess.run([sys.executable, "-c", OPTIMIZE_SNIPPET.format(lo=lo, hi=hi)],
                             env=env, capture_output=True, text=True, check=True).stdout
        backend, seconds, h = out.split()
        print(f"  {backend:9s} {float(seconds):8.2f} s   h_best={h}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-optimize", action="store_true")
    ap.add_argument("--M-range", default="16:20", help="LO:HI for the optimize timing")
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; timing the fallback only")
    bench_kernels(args.repeat)
    if not args.skip_optimize:
        lo, hi = (int(x) for x in args.M_range.split(":"))
        bench_optimize(lo, hi)


if __name__ == "__main__":
    main()
