"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``DONORREG_PURE_PYTHON`` is set to a non-empty value,
the pure-Python module is used. ``BACKEND`` names the active choice.
"""
import importlib
import os

__all__ = ["BACKEND", "jacobi_eigh", "rk4_precession", "load_backend"]


def load_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "cython":
        return importlib.import_module("donorreg._kernels")
    if name == "python":
        return importlib.import_module("donorreg._kernels_py")
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    if os.environ.get("DONORREG_PURE_PYTHON"):
        return "python", load_backend("python")
    try:
        return "cython", load_backend("cython")
    except ImportError:
        return "python", load_backend("python")


BACKEND, _impl = _select()
rk4_precession = _impl.rk4_precession
jacobi_eigh = _impl.jacobi_eigh
