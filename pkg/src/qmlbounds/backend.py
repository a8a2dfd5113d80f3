"""Kernel backend selection.

``QMLBOUNDS_BACKEND`` picks the statevector kernel implementation:

* ``auto`` (default) - numba if importable, else pure numpy
* ``numba``          - require the compiled kernels
* ``numpy``          - force the vectorized fallback

The choice is resolved once at import; tests that need a specific backend
import the kernel modules directly instead of flipping the flag.
"""

from __future__ import annotations

import os
import warnings

BACKEND_ENV = "QMLBOUNDS_BACKEND"


def _resolve():
    choice = os.environ.get(BACKEND_ENV, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be auto, numba, or numpy (got {choice!r})")
    if choice == "numpy":
        from . import kernels_numpy as mod
        return "numpy", mod
    try:
        from . import kernels_numba as mod
        return "numba", mod
    except ImportError:
        if choice == "numba":
            raise
        warnings.warn("numba unavailable; falling back to pure-numpy kernels")
        from . import kernels_numpy as mod
        return "numpy", mod


_NAME, _KERNELS = _resolve()


def backend_name() -> str:
    return _NAME


def kernels():
    """Active kernel module (run_program / apply_pauli / adjoint_gradient / ...)."""
    return _KERNELS
