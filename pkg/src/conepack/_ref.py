"""Pure-NumPy kernels: fallback used when the compiled extension is absent.

Kept numerically in lock-step with `_core.pyx`: the detector accumulates
squared differences dimension by dimension in the same order, so both
backends resolve argmin ties (first index wins) identically.
"""

from __future__ import annotations

import numpy as np


def detect(y: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Minimum-distance detection of each row of `y` against `points`.

    Returns the int64 index of the nearest constellation point per row;
    exact ties go to the smallest index.
    """
    d2 = (y[:, None, 0] - points[None, :, 0]) ** 2
    for k in range(1, points.shape[1]):
        d2 += (y[:, None, k] - points[None, :, k]) ** 2
    return np.argmin(d2, axis=1).astype(np.int64)


def penalty_value_grad(x: np.ndarray, m: int, mu: float, objective_code: int,
                       dmin_sq: float) -> tuple[float, np.ndarray]:
    """Quadratic-penalty objective and its analytic gradient.

    Variables are the flattened (m, 3) point array. The penalized function is

        f(X) + mu * [ sum_{i<j} max(0, d^2 - |x_i - x_j|^2)^2
                      + sum_i max(0, 2(x_{i,2}^2 + x_{i,3}^2) - x_{i,1}^2)^2
                      + sum_i max(0, -x_{i,1})^2 ]

    with f the mean squared norm (objective_code 0) or the mean DC
    coordinate (objective_code 1).
    """
    pts = x.reshape(m, 3)
    grad = np.zeros_like(pts)

    if objective_code == 0:
        value = float(np.sum(pts * pts)) / m
        grad += 2.0 / m * pts
    else:
        value = float(np.sum(pts[:, 0])) / m
        grad[:, 0] += 1.0 / m

    iu, ju = np.triu_indices(m, k=1)
    delta = pts[iu] - pts[ju]
    hinge = dmin_sq - np.sum(delta * delta, axis=1)
    np.maximum(hinge, 0.0, out=hinge)
    value += mu * float(np.sum(hinge * hinge))
    coef = (-4.0 * mu) * hinge
    np.add.at(grad, iu, coef[:, None] * delta)
    np.add.at(grad, ju, -coef[:, None] * delta)

    cone = 2.0 * (pts[:, 1] ** 2 + pts[:, 2] ** 2) - pts[:, 0] ** 2
    np.maximum(cone, 0.0, out=cone)
    value += mu * float(np.sum(cone * cone))
    grad[:, 0] += (-4.0 * mu) * cone * pts[:, 0]
    grad[:, 1] += (8.0 * mu) * cone * pts[:, 1]
    grad[:, 2] += (8.0 * mu) * cone * pts[:, 2]

    neg = np.maximum(-pts[:, 0], 0.0)
    value += mu * float(np.sum(neg * neg))
    grad[:, 0] += (-2.0 * mu) * neg

    return value, grad.ravel()
