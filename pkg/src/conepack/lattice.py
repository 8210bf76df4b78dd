"""Face-centered-cubic (A3) lattice constellations inside the admissible cone.

The lattice is realized on the integer model {(x, y, z) in Z^3 : x+y+z even},
scaled by 1/sqrt(2) so the minimum distance is exactly 1, then oriented by a
frame (rotation + offset). The default frame maps one lattice tetrahedron
onto the catalog's four-point constellation: apex at the origin and the
tetrahedron axis along the DC axis, which is the orientation in which the
cone and the lattice packing cooperate best.

Because any two lattice points are at least the minimum distance apart, an
M-point subset of cone lattice points is automatically a valid packing; the
search below therefore minimizes a per-point sum (energy or DC) over
subsets, exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import InfeasibleError, InvalidConstellationError, ResourceCapError
from .geometry import SUBCARRIER, Constellation
from .optimizer import canonical_lex_less, canonicalize

ELECTRICAL = "electrical"
OPTICAL = "optical"

#: generator rows of A3 at unit minimum distance (integer model / sqrt(2))
_GENERATOR = np.array([[1.0, 1.0, 0.0],
                       [1.0, 0.0, 1.0],
                       [0.0, 1.0, 1.0]]) / math.sqrt(2.0)

#: rotation taking the integer model into cone coordinates: rows are the
#: tetrahedron axis (1,1,1)/sqrt(3) and two transverse directions chosen so
#: the first lattice shell lands exactly on the catalog tetrahedron
_DEFAULT_ROTATION = np.array([
    [1.0, 1.0, 1.0],
    [1.0, -1.0, 0.0],
    [1.0, 1.0, -2.0],
]) / np.sqrt([[3.0], [2.0], [6.0]])


@dataclass(frozen=True)
class LatticeFrame:
    """Orientation and translation of the A3 lattice relative to the cone."""

    rotation: np.ndarray = field(default_factory=lambda: _DEFAULT_ROTATION.copy())
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    generator: np.ndarray = field(default_factory=lambda: _GENERATOR.copy())

    def __post_init__(self):
        rot = np.array(self.rotation, dtype=float).reshape(3, 3)
        off = np.array(self.offset, dtype=float).reshape(3)
        gen = np.array(self.generator, dtype=float).reshape(3, 3)
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-12):
            raise ValueError("rotation must be orthogonal")
        if abs(np.linalg.det(rot) - 1.0) > 1e-12:
            raise ValueError("rotation must have determinant +1")
        if abs(_shortest_vector(gen) - 1.0) > 1e-12:
            raise ValueError("generator must have shortest nonzero vector 1")
        for name, arr in (("rotation", rot), ("offset", off), ("generator", gen)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def lattice_to_world(self, model_points: np.ndarray) -> np.ndarray:
        return model_points @ self.rotation.T + self.offset


def _shortest_vector(gen: np.ndarray) -> float:
    coeffs = np.array(list(itertools.product((-2, -1, 0, 1, 2), repeat=3)))
    coeffs = coeffs[np.any(coeffs != 0, axis=1)]
    return float(np.min(np.linalg.norm(coeffs @ gen, axis=1)))


def default_frame() -> LatticeFrame:
    return LatticeFrame()


@dataclass(frozen=True)
class LatticeCandidateSet:
    """Cone lattice points with DC coordinate at most h_max, sorted."""

    points: np.ndarray
    frame: LatticeFrame
    h_max: float

    def __len__(self) -> int:
        return self.points.shape[0]


def enumerate_cone_lattice(frame: LatticeFrame, h_max: float,
                           cap: int = 100_000,
                           cone_tol: float = 1e-9) -> LatticeCandidateSet:
    """All lattice points inside the cone with DC coordinate <= h_max.

    Completeness: a cone point with s1 <= h has norm at most sqrt(3/2)*h,
    so it is enough to scan the integer box of that radius (in model
    coordinates, inflated by the offset).
    """
    if h_max < 0:
        raise ValueError("h_max must be nonnegative")
    slack = cone_tol * max(1.0, h_max)
    radius = math.sqrt(1.5) * (h_max + slack) + float(np.linalg.norm(frame.offset))
    bound = int(math.ceil(radius * math.sqrt(2.0) + 1e-9))
    if (2 * bound + 1) ** 3 > 64 * max(cap, 1):
        raise ResourceCapError(
            f"h_max={h_max:g} needs an integer scan of {(2 * bound + 1) ** 3} "
            f"points, beyond the cap of {cap}")

    axis = np.arange(-bound, bound + 1)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    grid = grid[(grid.sum(axis=1) % 2) == 0]
    world = frame.lattice_to_world(grid / math.sqrt(2.0))

    inside = (geometry.cone_violations(world)
              <= cone_tol * np.maximum(1.0, world[:, 0] ** 2))
    inside &= world[:, 0] <= h_max + slack
    pts = world[inside]
    if pts.shape[0] > cap:
        raise ResourceCapError(
            f"{pts.shape[0]} candidates exceed the cap of {cap}")
    order = np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0]))
    return LatticeCandidateSet(np.ascontiguousarray(pts[order]), frame, float(h_max))


def _contributions(points: np.ndarray, objective: str) -> np.ndarray:
    if objective == ELECTRICAL:
        return np.sum(points ** 2, axis=1)
    if objective == OPTICAL:
        return points[:, 0].copy()
    raise ValueError(f"unknown objective {objective!r}")


def _branch_and_bound_value(contrib_sorted: np.ndarray, m: int) -> float:
    """Exact minimum subset sum via include/exclude DFS with the
    partial-sum lower bound (candidates pre-sorted by contribution)."""
    n = contrib_sorted.size
    prefix = np.concatenate(([0.0], np.cumsum(contrib_sorted)))
    best = math.inf
    stack = [(0, 0, 0.0)]  # (next index, chosen count, cost so far)
    while stack:
        i, k, cost = stack.pop()
        need = m - k
        if need == 0:
            best = min(best, cost)
            continue
        if n - i < need:
            continue
        bound = cost + (prefix[i + need] - prefix[i])
        if bound >= best - 1e-15:
            continue
        stack.append((i + 1, k, cost))  # exclude (explored after include)
        stack.append((i + 1, k + 1, cost + contrib_sorted[i]))
    return best


def _tied_subsets(contrib: np.ndarray, m: int, best_sum: float,
                  tie_tol: float, max_ties: int = 10_000):
    """Index subsets achieving `best_sum` within tie_tol (separable case:
    mandatory cheap points plus a choice among threshold-tied ones)."""
    order = np.argsort(contrib, kind="stable")
    thr = contrib[order[m - 1]]
    mandatory = [int(i) for i in order if contrib[i] < thr - tie_tol][:m]
    border = [int(i) for i in order if abs(contrib[i] - thr) <= tie_tol]
    pick = m - len(mandatory)
    subsets = []
    for combo in itertools.combinations(border, pick):
        idx = mandatory + list(combo)
        if abs(float(contrib[idx].sum()) - best_sum) <= tie_tol * max(1, m):
            subsets.append(idx)
        if len(subsets) >= max_ties:
            break
    return subsets


def search_lattice_constellation(candidates: LatticeCandidateSet, m: int,
                                 objective: str,
                                 exhaustive_cap: int = 200_000) -> Constellation:
    """Best M-point subset of the candidates for the given power objective.

    Exhaustive when the number of subsets is small, otherwise
    branch-and-bound. Ties between equal-objective subsets are broken by
    the other power objective and then by the lexicographically smallest
    canonicalized coordinate list, so the result is deterministic,
    orientation-independent, and identical for the two objectives whenever
    a subset optimizes both (as the 8-point lattice optimum does).
    """
    pts = candidates.points
    n = pts.shape[0]
    if n < m:
        raise InfeasibleError(f"only {n} lattice candidates for M={m}")
    contrib = _contributions(pts, objective)
    secondary = _contributions(
        pts, OPTICAL if objective == ELECTRICAL else ELECTRICAL)
    tie_tol = 1e-12 * max(1.0, float(np.max(np.abs(contrib))))

    max_ties = 5000  # tie-break pool; enumeration order keeps this deterministic
    if math.comb(n, m) <= exhaustive_cap:
        best_sum = math.inf
        ties: list[list[int]] = []
        for combo in itertools.combinations(range(n), m):
            s = float(contrib[list(combo)].sum())
            if s < best_sum - tie_tol:
                best_sum = s
                ties = [list(combo)]
            elif s <= best_sum + tie_tol and len(ties) < max_ties:
                ties.append(list(combo))
    else:
        order = np.argsort(contrib, kind="stable")
        best_sum = _branch_and_bound_value(contrib[order], m)
        ties = _tied_subsets(contrib, m, best_sum, tie_tol)

    sec_tol = 1e-12 * max(1.0, float(np.max(np.abs(secondary))))
    sec_sums = [float(secondary[idx].sum()) for idx in ties]
    sec_best = min(sec_sums)
    ties = [idx for idx, s in zip(ties, sec_sums) if s <= sec_best + sec_tol]

    best = None
    for idx in ties:
        cand = canonicalize(Constellation("lattice", pts[idx], SUBCARRIER))
        if best is None or canonical_lex_less(cand.points.ravel(),
                                              best.points.ravel()):
            best = cand
    name = f"lattice-{objective}-{m}"
    return Constellation(name, best.points, SUBCARRIER)


@dataclass(frozen=True)
class FrameSearchResult:
    frame: LatticeFrame
    constellation: Constellation
    objective_value: float
    frame_label: str


def _grid_frames(rotation_steps: int = 12, offset_steps: int = 3):
    """24 tilts of the default orientation x 27 fractional offsets."""
    base = _DEFAULT_ROTATION
    angles = np.linspace(0.0, 2.0 * math.pi, rotation_steps, endpoint=False)
    fracs = np.linspace(0.0, 1.0, offset_steps, endpoint=False)
    for axis in (1, 2):
        i, j = (k for k in range(3) if k != axis)  # rotating plane
        for ang in angles:
            ca, sa = math.cos(ang), math.sin(ang)
            rot = np.eye(3)
            rot[i, i] = ca
            rot[j, j] = ca
            rot[i, j] = -sa
            rot[j, i] = sa
            rotation = rot @ base
            for fx, fy, fz in itertools.product(fracs, repeat=3):
                offset = rotation @ (np.array([fx, fy, fz]) @ _GENERATOR)
                yield LatticeFrame(rotation=rotation, offset=offset)


def objective_value(c: Constellation, objective: str) -> float:
    if objective == ELECTRICAL:
        return geometry.avg_electrical_energy(c)
    if objective == OPTICAL:
        return geometry.avg_optical_amplitude(c)
    raise ValueError(f"unknown objective {objective!r}")


def optimize_frame(m: int, objective: str, h_max: float = 3.0,
                   use_grid: bool = True,
                   exhaustive_cap: int = 200_000) -> FrameSearchResult:
    """Search lattice orientations/offsets for the best M-point subset.

    The default frame is always evaluated first and wins ties, so the
    search can only improve on the catalog orientation.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    frames = [("default", default_frame())]
    if use_grid:
        frames += [(f"grid[{i}]", f) for i, f in enumerate(_grid_frames())]

    best: FrameSearchResult | None = None
    for label, frame in frames:
        try:
            cands = enumerate_cone_lattice(frame, h_max)
            c = search_lattice_constellation(cands, m, objective, exhaustive_cap)
        except (InfeasibleError, ResourceCapError, InvalidConstellationError):
            if label == "default":
                raise
            continue
        val = objective_value(c, objective)
        if best is None or val < best.objective_value - 1e-12:
            best = FrameSearchResult(frame, c, val, label)
    assert best is not None
    return best
