"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
numpy implementation in ``_pykernels`` is loaded. Set ``RBOPT_PURE_PYTHON=1``
to force the fallback.
"""
import os

if os.environ.get("RBOPT_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        from . import _pykernels as _impl
        BACKEND = "python"

hprime_parts = _impl.hprime_parts
hprime_parts_batch = _impl.hprime_parts_batch
design_weights = _impl.design_weights
log_hprime_design = _impl.log_hprime_design
log_hprime_design_grad = _impl.log_hprime_design_grad

__all__ = ["BACKEND", "hprime_parts", "hprime_parts_batch", "design_weights",
           "log_hprime_design", "log_hprime_design_grad"]
