"""Kernel selection.

The compiled ``_kernels`` extension is used when importable; otherwise the
numpy fallback. ``PHOTON_BACKEND=python`` forces the fallback and
``PHOTON_THREADS`` caps the OpenMP thread count of the compiled kernels.
"""
import logging
import os

import numpy as np

from . import _fallback

logger = logging.getLogger(__name__)

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on build
    _compiled = None

_NAMES = ("fourier_sum", "stencil_derivative")


def threads():
    """Thread cap from ``PHOTON_THREADS`` (default: all available cores)."""
    raw = os.environ.get("PHOTON_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning("ignoring non-integer PHOTON_THREADS=%r", raw)
    return os.cpu_count() or 1


def available():
    """Backends that can be selected in this process."""
    return ("compiled", "python") if _compiled is not None else ("python",)


def get(name=None):
    """Return the kernel module for ``name`` ('compiled' or 'python')."""
    if name is None:
        name = os.environ.get("PHOTON_BACKEND", "compiled" if _compiled else "python")
    if name == "compiled":
        if _compiled is None:
            logger.warning("compiled kernels unavailable; using numpy fallback")
            return _fallback
        return _compiled
    if name == "python":
        return _fallback
    raise ValueError(f"unknown backend {name!r}")


def fourier_sum(kvec, omega, amps, points, t, backend=None):
    return get(backend).fourier_sum(kvec, omega, amps, points, float(t), threads())


def stencil_derivative(f, valid, h, backend=None):
    f = np.ascontiguousarray(f, dtype=np.complex128)
    valid = np.ascontiguousarray(valid, dtype=np.uint8)
    d, ok = get(backend).stencil_derivative(f, valid, float(h), threads())
    return np.asarray(d), np.asarray(ok, dtype=bool)
