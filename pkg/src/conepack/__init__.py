"""conepack: constellation design and link analysis for IM/DD channels.

Sphere packing inside the signal-space nonnegativity cone (free-form and
A3-lattice-constrained), power metrics, union-bound SER analysis with
required-SNR inversion, and Monte Carlo symbol-error-rate simulation.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .analysis import (ELECTRICAL, FULL, NEAREST_NEIGHBOR, OPTICAL, SnrPoint,
                       bound_curve, gain_table, n0_from_snr, q_function,
                       q_inverse, required_snr, ser_union_bound, snr_from_n0)
from .catalog import CATALOG_IDS, CatalogEntry, get, list_entries
from .geometry import (BASEBAND, SUBCARRIER, ConeReport, Constellation,
                       avg_electrical_energy, avg_optical_amplitude,
                       cone_contains, cone_violations, kissing_count,
                       min_distance, normalize_to_unit_dmin,
                       pairwise_distances, rotate_about_axis,
                       spectral_efficiency)
from .lattice import (FrameSearchResult, LatticeCandidateSet, LatticeFrame,
                      default_frame, enumerate_cone_lattice, optimize_frame,
                      search_lattice_constellation)
from .optimizer import (CongruenceReport, PackingProblem, PackingResult,
                        SolveReport, canonicalize, compare_to_reference,
                        default_starts, penalized_value_grad, solve)
from .simulator import (CrossingEstimate, SerEstimate, SimConfig, detect_batch,
                        estimate_crossing, ml_detect, simulate_curve,
                        simulate_point)

__all__ = [
    "BACKEND", "BASEBAND", "CATALOG_IDS", "ELECTRICAL", "FULL",
    "NEAREST_NEIGHBOR", "OPTICAL", "SUBCARRIER",
    "CatalogEntry", "ConeReport", "CongruenceReport", "Constellation",
    "CrossingEstimate", "FrameSearchResult", "LatticeCandidateSet",
    "LatticeFrame", "PackingProblem", "PackingResult", "SerEstimate",
    "SimConfig", "SnrPoint", "SolveReport",
    "avg_electrical_energy", "avg_optical_amplitude", "bound_curve",
    "canonicalize", "compare_to_reference", "cone_contains",
    "cone_violations", "default_frame", "default_starts", "detect_batch",
    "enumerate_cone_lattice", "estimate_crossing", "gain_table", "get",
    "kissing_count", "list_entries", "min_distance", "ml_detect",
    "n0_from_snr", "normalize_to_unit_dmin", "optimize_frame",
    "pairwise_distances", "penalized_value_grad", "q_function", "q_inverse",
    "required_snr", "rotate_about_axis", "search_lattice_constellation",
    "ser_union_bound", "simulate_curve", "simulate_point", "snr_from_n0",
    "solve", "spectral_efficiency",
]
