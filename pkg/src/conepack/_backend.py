"""Kernel backend selection.

Prefers the compiled Cython extension; falls back to the NumPy reference
implementation when the extension is missing or `CONEPACK_NO_EXT` is set.
`BACKEND` names the active implementation and is recorded in run manifests.
"""

from __future__ import annotations

import os

import numpy as np

from . import _ref

if os.environ.get("CONEPACK_NO_EXT"):
    _impl = _ref
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _ref
        BACKEND = "numpy"


def detect(y: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Nearest-point indices for a batch of received vectors."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    points = np.ascontiguousarray(points, dtype=np.float64)
    if y.ndim != 2 or points.ndim != 2 or y.shape[1] != points.shape[1]:
        raise ValueError(f"dimension mismatch: y {y.shape} vs points {points.shape}")
    return _impl.detect(y, points)


def penalty_value_grad(x: np.ndarray, m: int, mu: float, objective_code: int,
                       dmin_sq: float) -> tuple[float, np.ndarray]:
    """Penalized packing objective and gradient at flat variables `x`."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    return _impl.penalty_value_grad(x, m, mu, objective_code, dmin_sq)
