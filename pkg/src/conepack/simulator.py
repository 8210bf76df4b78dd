"""Monte Carlo symbol-error-rate estimation on the vector AWGN channel.

The channel adds independent zero-mean Gaussian noise of variance n0/2 per
signal-space dimension (the vector equivalent of double-sided noise PSD
N0/2 under an orthonormal basis), and the receiver is the minimum-distance
detector, which is maximum likelihood here.

Reproducibility: every batch draws from its own counter-based Philox
stream keyed by (seed, point_index, batch_index), and the stopping rule is
evaluated only on batch boundaries, so estimates are bit-identical across
runs, thread counts, and execution orders. Gaussians come from NumPy's
ziggurat sampler on those streams.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend, analysis, geometry
from .analysis import ELECTRICAL, SnrPoint
from .geometry import Constellation

#: recorded in run manifests next to the backend name
RNG_DESCRIPTION = "philox4x64 streams keyed (seed, point, batch); ziggurat normals"


@dataclass(frozen=True)
class SimConfig:
    constellation: Constellation
    snr_grid_db: tuple
    definition: str = ELECTRICAL
    min_errors: int = 200
    max_symbols: int = 10 ** 9
    seed: int = 0
    batch_size: int = 1_000_000

    def __post_init__(self):
        if self.min_errors < 1:
            raise ValueError("min_errors must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_symbols < self.batch_size:
            raise ValueError("max_symbols must be >= batch_size")
        object.__setattr__(self, "snr_grid_db",
                           tuple(float(s) for s in np.atleast_1d(self.snr_grid_db)))


@dataclass(frozen=True)
class SerEstimate:
    snr: SnrPoint
    n0: float
    errors: int
    trials: int
    ser: float
    ci95_halfwidth: float
    reliable: bool  # False when the symbol budget ran out with zero errors


def ml_detect(y, c: Constellation) -> int:
    """Index of the constellation point nearest to `y` (ties: lowest index)."""
    y = np.asarray(y, dtype=float).reshape(1, -1)
    return int(_backend.detect(y, c.points)[0])


def detect_batch(y: np.ndarray, c: Constellation) -> np.ndarray:
    """Vectorized minimum-distance detection for an (n, N) batch."""
    return _backend.detect(np.asarray(y, dtype=float), c.points)


def _stream(seed: int, point_index: int, batch_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed=[seed, point_index, batch_index]))


def simulate_point(c: Constellation, n0: float, min_errors: int = 200,
                   max_symbols: int = 10 ** 9, seed: int = 0,
                   point_index: int = 0, batch_size: int = 1_000_000,
                   definition: str = ELECTRICAL) -> SerEstimate:
    """Estimate the SER at one noise level with an error-count stopping rule.

    Draws equiprobable symbols, adds Gaussian noise (variance n0/2 per
    dimension), detects, and accumulates until min_errors errors or
    max_symbols symbols, whichever comes first on a batch boundary.
    """
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    pts = c.points
    sigma = math.sqrt(n0 / 2.0)
    errors = 0
    trials = 0
    batch_index = 0
    while errors < min_errors and trials < max_symbols:
        b = int(min(batch_size, max_symbols - trials))
        rng = _stream(seed, point_index, batch_index)
        labels = rng.integers(0, c.size, b)
        y = pts[labels] + sigma * rng.standard_normal((b, c.dim))
        detected = _backend.detect(y, pts)
        errors += int(np.count_nonzero(detected != labels))
        trials += b
        batch_index += 1
    ser = errors / trials
    ci = 1.96 * math.sqrt(max(ser * (1.0 - ser), 0.0) / trials)
    return SerEstimate(analysis.snr_from_n0(c, n0, definition), n0,
                       errors, trials, ser, ci, reliable=errors > 0)


def simulate_curve(cfg: SimConfig, threads: int = 1) -> list[SerEstimate]:
    """One SER estimate per grid SNR; deterministic for a fixed config.

    Grid points use independent RNG streams (their grid position is the
    stream key), so a thread pool changes nothing but wall time.
    """
    c = cfg.constellation

    def run(i_snr):
        i, snr_db = i_snr
        n0 = analysis.n0_from_snr(c, snr_db, cfg.definition)
        return simulate_point(c, n0, cfg.min_errors, cfg.max_symbols,
                              cfg.seed, i, cfg.batch_size, cfg.definition)

    jobs = list(enumerate(cfg.snr_grid_db))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, jobs))
    return [run(j) for j in jobs]


@dataclass(frozen=True)
class CrossingEstimate:
    """Monte Carlo estimate of the noise level where SER hits a target."""

    n0: float
    target_ser: float
    points: tuple  # SerEstimate per probed noise level

    def snr(self, c: Constellation, definition: str) -> SnrPoint:
        return analysis.snr_from_n0(c, self.n0, definition)


def estimate_crossing(c: Constellation, target_ser: float, seed: int = 0,
                      min_errors: int = 200, max_symbols: int = 10 ** 9,
                      batch_size: int = 1_000_000, span_db: float = 0.25,
                      n_probes: int = 3,
                      kissing_rel_tol: float = geometry.DEFAULT_KISSING_REL_TOL
                      ) -> CrossingEstimate:
    """Locate the n0 where the simulated SER crosses `target_ser`.

    Probes a few noise levels spaced in dB around the union-bound
    prediction, fits log10(SER) linearly against the dB offset (the curve
    is locally straight on that scale), and solves for the crossing.
    """
    center = analysis.required_snr(c, target_ser, ELECTRICAL,
                                   kissing_rel_tol=kissing_rel_tol)
    n0_center = analysis.n0_from_snr(c, center.value_db, ELECTRICAL)
    offsets = np.linspace(-span_db, span_db, n_probes)
    estimates = []
    for i, off in enumerate(offsets):
        n0 = n0_center * 10.0 ** (-off / 10.0)
        estimates.append(simulate_point(c, n0, min_errors, max_symbols,
                                        seed, i, batch_size))
    usable = [(off, e) for off, e in zip(offsets, estimates) if e.errors > 0]
    if len(usable) < 2:
        raise RuntimeError(
            f"not enough reliable probes to locate the {target_ser:g} "
            f"crossing of {c.name!r}; raise max_symbols")
    xs = np.array([off for off, _ in usable])
    ys = np.log10([e.ser for _, e in usable])
    slope, intercept = np.polyfit(xs, ys, 1)
    off_star = (math.log10(target_ser) - intercept) / slope
    return CrossingEstimate(n0_center * 10.0 ** (-off_star / 10.0),
                            target_ser, tuple(estimates))
