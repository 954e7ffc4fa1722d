"""Kernel backend selection.

The compiled extension is preferred; the pure-Python twin is used when it is
missing or when ``SSNPMM_PURE_PYTHON`` is set to a non-empty value other
than ``0``.
"""
import importlib
import logging
import os

logger = logging.getLogger(__name__)

_MODULES = {
    "compiled": "ssnpmm.linalg._kernels",
    "python": "ssnpmm.linalg._kernels_py",
}


def get_kernels(name):
    """Import a kernel module by backend name (``"compiled"`` or ``"python"``)."""
    return importlib.import_module(_MODULES[name])


def compiled_available():
    try:
        get_kernels("compiled")
    except ImportError:
        return False
    return True


def _select():
    if os.environ.get("SSNPMM_PURE_PYTHON", "0") not in ("", "0"):
        return "python", get_kernels("python")
    try:
        return "compiled", get_kernels("compiled")
    except ImportError:
        logger.info("compiled kernels unavailable; using pure-Python fallback")
        return "python", get_kernels("python")


BACKEND, kernels = _select()
