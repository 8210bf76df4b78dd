"""Closed-form SER analysis: union bounds, SNR definitions, gain tables.

SNR definitions (normalized units, T_s = c = r = 1, R_b = log2(M)/T_s):

* electrical: 10*log10(Eb/N0) with Eb = E[||s||^2]/log2(M). The per-bit
  energy is not spelled out in the usual references for these formats but
  is forced by equiprobable symbols.
* optical: 10*log10(Po / (c*sqrt(Rb*N0))) with Po = (c/sqrt(Ts))*E[s1].
  Substituting Rb*Ts = log2(M) cancels c and Ts, leaving
  10*log10(E[s1]/sqrt(log2(M)*N0)), computable from geometry alone. Note
  the optical SNR is amplitude-like: halving N0 raises it by 5 dB.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcinv

from . import catalog, geometry
from .errors import BracketingError
from .geometry import Constellation

ELECTRICAL = "electrical"
OPTICAL = "optical"
NEAREST_NEIGHBOR = "nearest_neighbor"
FULL = "full"

#: published gains (dB) of the cone-packing formats over the alternatives
#: at symbol error rate 1e-6, by (winner, baseline, definition)
REFERENCE_GAINS_DB = (
    ("c4", "ook", ELECTRICAL, 0.86),
    ("c4", "qpsk", ELECTRICAL, 2.87),
    ("c-pe-8", "c-po-8", ELECTRICAL, 0.30),
    ("c-pe-8", "l8", ELECTRICAL, 0.58),
    ("c-pe-8", "8qam-varbias", ELECTRICAL, 2.55),
    ("c-pe-8", "8qam", ELECTRICAL, 4.35),
    ("c-pe-8", "8psk", ELECTRICAL, 4.39),
    ("c4", "ook", OPTICAL, 0.43),
    ("c4", "qpsk", OPTICAL, 2.06),
    ("c-po-8", "c-pe-8", OPTICAL, 0.04),
    ("c-po-8", "l8", OPTICAL, 0.46),
    ("c-po-8", "8qam-varbias", OPTICAL, 1.35),
    ("c-po-8", "8psk", OPTICAL, 2.48),
    ("c-po-8", "8qam", OPTICAL, 2.75),
)


@dataclass(frozen=True)
class SnrPoint:
    value_db: float
    definition: str  # ELECTRICAL or OPTICAL


def q_function(x):
    """Gaussian tail probability Q(x) = P(Z > x), via erfc."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def q_inverse(p):
    """Inverse of q_function on (0, 1)."""
    return math.sqrt(2.0) * erfcinv(2.0 * np.asarray(p, dtype=float))


def _check_definition(definition: str) -> None:
    if definition not in (ELECTRICAL, OPTICAL):
        raise ValueError(f"unknown SNR definition {definition!r}")


def ser_union_bound(c: Constellation, n0: float, mode: str = NEAREST_NEIGHBOR,
                    kissing_rel_tol: float = geometry.DEFAULT_KISSING_REL_TOL) -> float:
    """Union-bound SER at noise level `n0` (variance n0/2 per dimension).

    nearest_neighbor truncates the union bound to the K minimum-distance
    pairs, i.e. (2K/M) * Q(sqrt(d_min^2 / (2 n0))); pairs within
    kissing_rel_tol of d_min count and enter at their exact distances, so
    constellations stored with rounded coordinates keep full >= nn.
    full sums Q over all ordered pairs. Both are clipped to 1.
    """
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    dists = geometry.pairwise_distances(c)
    if mode == NEAREST_NEIGHBOR:
        dists = dists[dists <= (1.0 + kissing_rel_tol) * np.min(dists)]
    elif mode != FULL:
        raise ValueError(f"unknown bound mode {mode!r}")
    ser = 2.0 / c.size * float(np.sum(q_function(dists / math.sqrt(2.0 * n0))))
    return min(ser, 1.0)


def snr_from_n0(c: Constellation, n0: float, definition: str) -> SnrPoint:
    """Map a noise level to the SNR of the given definition."""
    _check_definition(definition)
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    bits = math.log2(c.size)
    if definition == ELECTRICAL:
        eb = geometry.avg_electrical_energy(c) / bits
        return SnrPoint(10.0 * math.log10(eb / n0), definition)
    dc = geometry.avg_optical_amplitude(c)  # raises if not admissible
    return SnrPoint(10.0 * math.log10(dc / math.sqrt(bits * n0)), definition)


def n0_from_snr(c: Constellation, snr_db: float, definition: str) -> float:
    """Inverse of snr_from_n0 (used by the simulator to set noise levels)."""
    _check_definition(definition)
    bits = math.log2(c.size)
    if definition == ELECTRICAL:
        eb = geometry.avg_electrical_energy(c) / bits
        return eb * 10.0 ** (-snr_db / 10.0)
    dc = geometry.avg_optical_amplitude(c)
    return dc * dc * 10.0 ** (-snr_db / 5.0) / bits


def required_snr(c: Constellation, target_ser: float, definition: str,
                 mode: str = NEAREST_NEIGHBOR, tol_db: float = 1e-4,
                 kissing_rel_tol: float = geometry.DEFAULT_KISSING_REL_TOL) -> SnrPoint:
    """SNR at which the union-bound SER equals `target_ser`.

    Bisection on the SNR axis (the bound is strictly decreasing in SNR);
    the initial bracket is widened by doubling until it straddles the
    target or gives up.
    """
    if not 0.0 < target_ser < 1.0:
        raise ValueError("target_ser must be in (0, 1)")

    def ser_at(snr_db: float) -> float:
        return ser_union_bound(c, n0_from_snr(c, snr_db, definition), mode,
                               kissing_rel_tol)

    lo, hi = -10.0, 30.0
    width = 40.0
    for _ in range(20):
        if ser_at(lo) > target_ser >= ser_at(hi):
            break
        if ser_at(lo) <= target_ser:
            lo -= width
        if ser_at(hi) > target_ser:
            hi += width
        width *= 2.0
    else:
        raise BracketingError(
            f"could not bracket SER {target_ser:g} for {c.name!r}")
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if ser_at(mid) > target_ser:
            lo = mid
        else:
            hi = mid
    return SnrPoint(0.5 * (lo + hi), definition)


@dataclass(frozen=True)
class BoundPoint:
    snr: SnrPoint
    ser_nn: float
    ser_full: float


def bound_curve(c: Constellation, snr_grid_db, definition: str,
                kissing_rel_tol: float = geometry.DEFAULT_KISSING_REL_TOL
                ) -> list[BoundPoint]:
    """Both union-bound flavors on a dB grid."""
    out = []
    for snr_db in np.asarray(snr_grid_db, dtype=float):
        n0 = n0_from_snr(c, float(snr_db), definition)
        out.append(BoundPoint(SnrPoint(float(snr_db), definition),
                              ser_union_bound(c, n0, NEAREST_NEIGHBOR, kissing_rel_tol),
                              ser_union_bound(c, n0, FULL)))
    return out


@dataclass(frozen=True)
class GainTable:
    """Pairwise required-SNR differences at a common target SER."""

    definition: str
    target_ser: float
    mode: str
    required_db: dict  # id -> required SNR in dB
    mixed_efficiency: bool

    def gain_db(self, winner: str, baseline: str) -> float:
        """Positive when `winner` needs less SNR than `baseline`."""
        return self.required_db[baseline] - self.required_db[winner]


def _resolve(entry) -> tuple[str, Constellation, float]:
    """Accept catalog ids or Constellation objects; return kissing rel_tol too."""
    if isinstance(entry, Constellation):
        return entry.name, entry, geometry.DEFAULT_KISSING_REL_TOL
    ce = catalog.get(entry)
    return ce.id, ce.constellation, ce.kissing_rel_tol


def gain_table(entries, target_ser: float, definition: str,
               mode: str = NEAREST_NEIGHBOR) -> GainTable:
    """Required SNR per constellation and the implied pairwise gains.

    Comparisons are meaningful within one spectral-efficiency class; a
    mixed list is allowed but flagged with a warning.
    """
    resolved = [_resolve(e) for e in entries]
    etas = {round(geometry.spectral_efficiency(c), 12) for _, c, _ in resolved}
    mixed = len(etas) > 1
    if mixed:
        warnings.warn("gain table mixes spectral efficiencies "
                      f"{sorted(etas)}; gains compare unlike formats")
    required = {name: required_snr(c, target_ser, definition, mode,
                                   kissing_rel_tol=rtol).value_db
                for name, c, rtol in resolved}
    return GainTable(definition, target_ser, mode, required, mixed)
