"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``HYBRIDOPTO_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy implementations are used.  Both expose
``cubic_roots`` and ``rodas4_lyapunov`` with identical signatures.
"""

import os

from . import _purepy

_forced_pure = os.environ.get("HYBRIDOPTO_PURE_PYTHON", "") not in ("", "0")

try:
    if _forced_pure:
        raise ImportError("pure-Python backend forced")
    from . import _kernels as _backend

    BACKEND = "compiled"
except ImportError:
    _backend = _purepy
    BACKEND = "python"

cubic_roots = _backend.cubic_roots
rodas4_lyapunov = _backend.rodas4_lyapunov


def get_backend(name=None):
    """Return the kernel module for ``name`` ("compiled", "python" or None for the active one)."""
    if name is None:
        return _backend
    if name == "python":
        return _purepy
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
