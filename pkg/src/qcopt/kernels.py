"""Backend selection for the cancellation kernels.

The compiled module is used when it imports; set QCOPT_PURE_PYTHON=1 to
force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("QCOPT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels


def get_backend(name: str | None = None):
    """Return the kernel module by name ('python', 'cython') or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


cancel_single_qubit = _impl.cancel_single_qubit
cancel_two_qubit = _impl.cancel_two_qubit
