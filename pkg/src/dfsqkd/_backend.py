"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy fallback. ``DFSQKD_BACKEND=python`` forces the fallback.
"""

import logging
import os

from dfsqkd import _kernels_py

logger = logging.getLogger(__name__)

kernels = _kernels_py
name = "python"

if os.environ.get("DFSQKD_BACKEND", "").lower() != "python":
    try:
        from dfsqkd import _ckernels
    except ImportError:  # extension not built
        logger.debug("compiled kernels unavailable, using numpy fallback")
    else:
        kernels = _ckernels
        name = "cython"


def use(backend):
    """Switch the active backend (``"cython"`` or ``"python"``). Returns the previous name."""
    global kernels, name
    previous = name
    if backend == "python":
        kernels, name = _kernels_py, "python"
    elif backend == "cython":
        from dfsqkd import _ckernels

        kernels, name = _ckernels, "cython"
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return previous


def available():
    try:
        from dfsqkd import _ckernels  # noqa: F401
    except ImportError:
        return ["python"]
    return ["cython", "python"]
