"""Backend selection for the 2D hot kernels.

The compiled extension (gcell._stepcore, Cython) is used when available;
otherwise the numpy reference implementation runs.  Set GCELL_DISABLE_COMPILED
to force the fallback.  Both backends are bit-identical by construction; see
benchmarks/bench_kernels.py for the throughput comparison.
"""

import os

import numpy as np

from . import _kernels_py

try:
    from . import _stepcore
except ImportError:  # pragma: no cover - build without the extension
    _stepcore = None

HAVE_COMPILED = _stepcore is not None
_USE_COMPILED = HAVE_COMPILED and not os.environ.get("GCELL_DISABLE_COMPILED")


def active_backend():
    return "compiled" if _USE_COMPILED else "numpy"


def explicit_rhs(w, v1, v2, p1, p2, sl, d, h, out=None, backend=None):
    use = _resolve(backend)
    if use == "compiled":
        if out is None:
            out = np.empty_like(w)
        _stepcore.explicit_rhs(w, v1, v2, float(p1), float(p2), float(sl),
                               float(d), float(h), out)
        return out
    return _kernels_py.explicit_rhs(w, v1, v2, p1, p2, sl, d, h, out=out)


def godunov_offset(w, p1, p2, h, out=None, backend=None):
    use = _resolve(backend)
    if use == "compiled":
        if out is None:
            out = np.empty_like(w)
        _stepcore.godunov_offset(w, float(p1), float(p2), float(h), out)
        return out
    return _kernels_py.godunov_offset(w, p1, p2, h, out=out)


def _resolve(backend):
    if backend is None:
        return active_backend()
    if backend == "compiled" and not HAVE_COMPILED:
        raise RuntimeError("compiled kernel backend is not available")
    if backend not in ("compiled", "numpy"):
        raise ValueError(f"unknown backend '{backend}'")
    return backend
