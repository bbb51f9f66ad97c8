"""Backend selection for the hot kernels.

The compiled extension supplies the propagator symbols and the Duhamel
update when it imports; otherwise the numpy fallback is used throughout.  Set ``SIGMAEVO_BACKEND=python`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("SIGMAEVO_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

# numpy's SIMD pow outruns the scalar exp/log loop of the extension (see
# benchmarks/bench_kernels.py), so the power kernels always use numpy
abs_pow = _kernels_py.abs_pow
abs_pow_sum = _kernels_py.abs_pow_sum
damped_symbols = _impl.damped_symbols
duhamel_update = _impl.duhamel_update


def available_backends():
    """Return a mapping of backend name to kernel module for every importable backend."""
    backends = {"python": _kernels_py}
    try:
        from . import _kernels as compiled
    except ImportError:
        pass
    else:
        backends["cython"] = compiled
    return backends
