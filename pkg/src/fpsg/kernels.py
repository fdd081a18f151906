"""Kernel backend selection.

The compiled extension is used when importable; set ``FPSG_PURE_PYTHON=1``
to force the numpy fallback.
"""
import os

from . import _core_py

BACKEND = "python"
_impl = _core_py
if os.environ.get("FPSG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _core_py

fp_apply = _impl.fp_apply
fp_tridiag = _impl.fp_tridiag
block_tridiag_factor = _impl.block_tridiag_factor
block_tridiag_solve = _impl.block_tridiag_solve
bc_drift_sharp = _impl.bc_drift_sharp

__all__ = [
    "BACKEND",
    "fp_apply",
    "fp_tridiag",
    "block_tridiag_factor",
    "block_tridiag_solve",
    "bc_drift_sharp",
]
