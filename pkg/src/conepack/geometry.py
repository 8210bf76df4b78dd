"""Signal-space geometry and power metrics for IM/DD constellations.

A constellation lives in an N-dimensional signal space with N <= 3. The
first coordinate is the DC component (the bias that makes the transmitted
waveform nonnegative); coordinates 2 and 3 are the in-phase and quadrature
subcarrier amplitudes. Nonnegativity of the waveform translates into the
admissible cone

    s1 >= 0  and  s1**2 >= 2 * (s2**2 + s3**2),

a circular cone of apex angle acos(1/3) about the DC axis.

All functions are pure; `Constellation` is immutable after construction.
Coordinates are dimensionless (symbol period, responsivity and the
electro-optical conversion factor are normalized to 1; the bit-rate
dependence reappears only in the SNR definitions of the analysis module).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from .errors import InvalidConstellationError, NotAdmissibleError

BASEBAND = "baseband"      # W = R_s (OOK-style formats)
SUBCARRIER = "subcarrier"  # W = 2 R_s (single-subcarrier I/Q formats)

#: pairs closer than (1 + rel_tol) * d_min count as minimum-distance pairs
DEFAULT_KISSING_REL_TOL = 1e-6

#: membership slack for constellations given in closed form
DEFAULT_CONE_TOL = 1e-9


@dataclass(frozen=True)
class Constellation:
    """An ordered set of M distinct signal-space points plus metadata.

    `points` is an (M, N) float array with N in {1, 2, 3}; row i is the
    vector representation of symbol i and column 0 is the DC coordinate.
    Subcarrier constellations are padded to N = 3 at construction.
    """

    name: str
    points: np.ndarray
    bandwidth_model: str = SUBCARRIER

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] not in (1, 2, 3):
            raise InvalidConstellationError(
                f"points must be (M, N) with N in 1..3, got shape {pts.shape}")
        if pts.shape[0] < 2:
            raise InvalidConstellationError("a constellation needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise InvalidConstellationError("all coordinates must be finite")
        if self.bandwidth_model not in (BASEBAND, SUBCARRIER):
            raise InvalidConstellationError(
                f"unknown bandwidth model {self.bandwidth_model!r}")
        if self.bandwidth_model == SUBCARRIER and pts.shape[1] < 3:
            pts = np.pad(pts, ((0, 0), (0, 3 - pts.shape[1])))
        if np.min(pdist(pts)) == 0.0:
            raise InvalidConstellationError("points must be distinct")
        pts = np.ascontiguousarray(pts)
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def points_3d(self) -> np.ndarray:
        """Points zero-padded to three dimensions."""
        if self.dim == 3:
            return self.points
        return np.pad(self.points, ((0, 0), (0, 3 - self.dim)))

    def scaled(self, alpha: float, name: str | None = None) -> "Constellation":
        return Constellation(name if name is not None else self.name,
                             self.points * alpha, self.bandwidth_model)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "bandwidth_model": self.bandwidth_model,
            "points": [[float(x) for x in row] for row in self.points],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Constellation":
        try:
            return cls(str(data["name"]), np.asarray(data["points"], dtype=float),
                       str(data["bandwidth_model"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConstellationError(f"bad constellation JSON: {exc}") from exc

    def save(self, path) -> None:
        # json round-trips Python floats exactly (shortest repr), so the
        # serialized coordinates carry full double precision
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Constellation":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class ConeReport:
    """Outcome of an admissibility check, with per-point diagnostics."""

    ok: bool
    tol: float
    violating_indices: tuple = ()
    violations: tuple = ()  # positive magnitudes, aligned with indices

    def __bool__(self) -> bool:
        return self.ok


def cone_violations(points: np.ndarray) -> np.ndarray:
    """Signed cone-constraint residual per point (positive = outside).

    For a point (s1, s2, s3) the residual is
    max(2*(s2**2 + s3**2) - s1**2, -s1): the first term is the quadratic
    cone defect, the second catches negative DC, and a point is inside
    exactly when the residual is <= 0.
    """
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if p.shape[1] < 3:
        p = np.pad(p, ((0, 0), (0, 3 - p.shape[1])))
    quad = 2.0 * (p[:, 1] ** 2 + p[:, 2] ** 2) - p[:, 0] ** 2
    return np.maximum(quad, -p[:, 0])


def cone_contains(c: Constellation, tol: float = DEFAULT_CONE_TOL) -> ConeReport:
    """Check every point against the admissible cone at relative tolerance `tol`.

    The quadratic defect is compared against tol * max(1, s1**2) so that the
    test is meaningful both near the apex and far up the cone.
    """
    p = c.points_3d()
    quad = 2.0 * (p[:, 1] ** 2 + p[:, 2] ** 2) - p[:, 0] ** 2
    scale = np.maximum(1.0, p[:, 0] ** 2)
    bad = (quad > tol * scale) | (p[:, 0] < -tol)
    idx = np.flatnonzero(bad)
    mags = np.maximum(quad[idx] / scale[idx], -p[idx, 0])
    return ConeReport(ok=not idx.size, tol=tol,
                      violating_indices=tuple(int(i) for i in idx),
                      violations=tuple(float(v) for v in mags))


def pairwise_distances(c: Constellation) -> np.ndarray:
    """Condensed vector of the M*(M-1)/2 pairwise Euclidean distances."""
    return pdist(c.points)


def min_distance(c: Constellation) -> float:
    """Minimum distance over all unordered point pairs."""
    return float(np.min(pairwise_distances(c)))


def kissing_count(c: Constellation, rel_tol: float = DEFAULT_KISSING_REL_TOL) -> int:
    """Number of unordered pairs at (or within rel_tol of) the minimum distance.

    This is the multiplicity K that multiplies the dominant Q-function term
    of the union-bound SER approximation.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    d = pairwise_distances(c)
    return int(np.count_nonzero(d <= (1.0 + rel_tol) * np.min(d)))


def avg_electrical_energy(c: Constellation) -> float:
    """Mean squared norm E[||s||^2] over equiprobable symbols.

    The average electrical power is this energy divided by the symbol
    period, which is normalized to 1 here.
    """
    return float(np.mean(np.sum(c.points ** 2, axis=1)))


def avg_optical_amplitude(c: Constellation, tol: float = DEFAULT_CONE_TOL) -> float:
    """Mean DC coordinate E[s1]; proportional to the average optical power.

    Raises NotAdmissibleError if any point has a meaningfully negative DC
    coordinate, since optical power is only defined for admissible signals.
    """
    dc = c.points[:, 0]
    if np.any(dc < -tol):
        raise NotAdmissibleError(
            f"negative DC coordinate (min s1 = {dc.min():g}) in {c.name!r}")
    return float(np.mean(dc))


def spectral_efficiency(c: Constellation) -> float:
    """Bits/s/Hz: log2(M) for baseband formats, log2(M)/2 for subcarrier.

    Subcarrier formats pay a factor-2 bandwidth for the intermediate
    electrical carrier. Non-power-of-two M is allowed but flagged.
    """
    bits = np.log2(c.size)
    if 2 ** round(bits) != c.size:
        warnings.warn(f"M={c.size} is not a power of two; "
                      "spectral efficiency uses real-valued log2(M)")
    return float(bits) if c.bandwidth_model == BASEBAND else float(bits) / 2.0


def normalize_to_unit_dmin(c: Constellation) -> Constellation:
    """Rescale so the minimum distance is exactly 1.

    Scaling is the natural normalization here because the admissible cone
    is scale-invariant: membership is unaffected.
    """
    d = min_distance(c)
    if d <= 0.0:
        raise InvalidConstellationError("zero minimum distance; cannot normalize")
    return c.scaled(1.0 / d)


def rotate_about_axis(points: np.ndarray, angle: float,
                      reflect: bool = False) -> np.ndarray:
    """Rotate 3-d points about the DC axis; optionally reflect s3 -> -s3 first.

    These are exactly the isometries of the admissible cone, so they leave
    every metric of this module unchanged.
    """
    p = np.array(points, dtype=float)
    if reflect:
        p[:, 2] = -p[:, 2]
    ca, sa = np.cos(angle), np.sin(angle)
    s2 = ca * p[:, 1] - sa * p[:, 2]
    s3 = sa * p[:, 1] + ca * p[:, 2]
    p[:, 1] = s2
    p[:, 2] = s3
    return p
