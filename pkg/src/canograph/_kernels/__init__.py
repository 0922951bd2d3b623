"""Hot-loop kernels: compiled extension when built, NumPy fallback otherwise.

Set ``CANOGRAPH_PURE_PYTHON=1`` to force the fallback (used by the
benchmark to compare both backends).

``const_transfers`` always uses the NumPy implementation: its batched
eigendecomposition path amortizes into BLAS calls and beats per-element
compiled loops at every order (see benchmarks/bench_kernels.py). The
compiled extension carries the closed-form Schrodinger kernels, whose
scalar-heavy inner loops do profit from compilation.
"""

import os

from . import fallback

if os.environ.get("CANOGRAPH_PURE_PYTHON"):
    _impl = fallback
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = fallback

BACKEND = _impl.BACKEND
const_transfers = fallback.const_transfers
schrodinger_transfer = _impl.schrodinger_transfer
schrodinger_core = _impl.schrodinger_core

__all__ = [
    "BACKEND",
    "const_transfers",
    "schrodinger_transfer",
    "schrodinger_core",
    "fallback",
]
