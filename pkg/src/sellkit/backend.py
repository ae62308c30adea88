"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
always available.  Set SELLKIT_BACKEND=python to force the fallback or
SELLKIT_BACKEND=compiled to require the extension.
"""

import os

from . import _kernels_py

_requested = os.environ.get("SELLKIT_BACKEND", "auto").strip().lower()

_compiled = None
if _requested in ("auto", "", "compiled"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
if _requested == "compiled" and _compiled is None:
    raise ImportError(
        "SELLKIT_BACKEND=compiled but the compiled kernels are not installed"
    )
if _requested not in ("auto", "", "compiled", "python", "pure"):
    raise ImportError(f"unknown SELLKIT_BACKEND value: {_requested!r}")

kernels = _compiled if _compiled is not None else _kernels_py
HAS_COMPILED = _compiled is not None
BACKEND_NAME = kernels.NAME


def get_kernels(name=None):
    """Return a kernel module by name: None/'auto' for the default selection,
    'compiled' for the extension (error if missing), 'python' for the fallback."""
    if name in (None, "auto"):
        return kernels
    if name in ("python", "pure"):
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            from .errors import ResourceError

            raise ResourceError("compiled kernels are not installed")
        return _compiled
    from .errors import ParameterError

    raise ParameterError(f"unknown backend name: {name!r}")
