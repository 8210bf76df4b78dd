"""A3 enumeration inside the cone and optimal subset selection."""

import math

import numpy as np
import pytest

import conepack as cp
from conepack import lattice
from conepack.errors import InfeasibleError, ResourceCapError

SQ23 = math.sqrt(2.0 / 3.0)


def test_default_frame_invariants():
    f = cp.default_frame()
    assert np.allclose(f.rotation @ f.rotation.T, np.eye(3), atol=1e-14)
    assert np.linalg.det(f.rotation) == pytest.approx(1.0, abs=1e-14)
    # shortest lattice vector is the minimum distance
    assert lattice._shortest_vector(f.generator) == pytest.approx(1.0, abs=1e-14)


def test_bad_frames_rejected():
    with pytest.raises(ValueError):
        cp.LatticeFrame(rotation=np.eye(3) * 2.0)
    with pytest.raises(ValueError):
        cp.LatticeFrame(generator=np.eye(3) * 0.5)


def test_enumeration_first_shell_is_tetrahedron():
    cands = cp.enumerate_cone_lattice(cp.default_frame(), SQ23)
    assert len(cands) == 4
    c4 = np.array(sorted(map(tuple, cp.get("c4").constellation.points)))
    got = np.array(sorted(map(tuple, cands.points)))
    assert np.allclose(got, c4, atol=1e-12)


def test_enumeration_apex_only():
    cands = cp.enumerate_cone_lattice(cp.default_frame(), 0.0)
    assert len(cands) == 1
    assert np.allclose(cands.points, 0.0)


def test_enumeration_contains_l8():
    cands = cp.enumerate_cone_lattice(cp.default_frame(), 2.0 * SQ23)
    rows = {tuple(np.round(p, 9)) for p in cands.points}
    for p in cp.get("l8").constellation.points:
        assert tuple(np.round(p, 9)) in rows


def test_enumeration_monotone_in_height():
    frame = cp.default_frame()
    prev = set()
    for h in (0.5, 1.0, 2.0, 4.0):
        rows = {tuple(np.round(p, 9))
                for p in cp.enumerate_cone_lattice(frame, h).points}
        assert prev <= rows
        prev = rows


def test_enumeration_resource_caps():
    with pytest.raises(ResourceCapError):
        cp.enumerate_cone_lattice(cp.default_frame(), 200.0)
    with pytest.raises(ResourceCapError):
        cp.enumerate_cone_lattice(cp.default_frame(), 8.0, cap=10)


def test_search_m4_is_tetrahedron():
    cands = cp.enumerate_cone_lattice(cp.default_frame(), 2.0 * SQ23)
    for objective in ("electrical", "optical"):
        c = cp.search_lattice_constellation(cands, 4, objective)
        assert cp.avg_electrical_energy(c) == pytest.approx(0.75, abs=1e-12)
        rep = cp.compare_to_reference(c, cp.get("c4").constellation)
        assert rep.distance_multiset_deviation <= 1e-9


def test_search_m2_touches():
    cands = cp.enumerate_cone_lattice(cp.default_frame(), 1.0)
    c = cp.search_lattice_constellation(cands, 2, "electrical")
    assert cp.avg_electrical_energy(c) == pytest.approx(0.5, abs=1e-12)
    assert cp.min_distance(c) == pytest.approx(1.0, abs=1e-12)


def test_search_m8_matches_l8_and_objectives_agree():
    cands = cp.enumerate_cone_lattice(cp.default_frame(), 2.0 * SQ23)
    ce = cp.search_lattice_constellation(cands, 8, "electrical")
    co = cp.search_lattice_constellation(cands, 8, "optical")
    assert cp.avg_electrical_energy(ce) == pytest.approx(2.0, abs=1e-9)
    assert cp.avg_optical_amplitude(co) == pytest.approx(11.0 / 8.0 * SQ23, abs=1e-9)
    assert np.array_equal(ce.points, co.points)
    rep = cp.compare_to_reference(ce, cp.get("l8").constellation)
    assert rep.distance_multiset_deviation <= 1e-9


def test_search_beats_random_subsets():
    rng = np.random.default_rng(0)
    cands = cp.enumerate_cone_lattice(cp.default_frame(), 3.0)
    n = len(cands)
    for objective in ("electrical", "optical"):
        c = cp.search_lattice_constellation(cands, 8, objective)
        best = lattice.objective_value(c, objective)
        contrib = lattice._contributions(cands.points, objective)
        for _ in range(10_000):
            idx = rng.choice(n, size=8, replace=False)
            assert best <= float(np.mean(contrib[idx])) + 1e-12


def test_search_infeasible():
    cands = cp.enumerate_cone_lattice(cp.default_frame(), 0.5)
    with pytest.raises(InfeasibleError):
        cp.search_lattice_constellation(cands, 8, "electrical")


def test_branch_and_bound_path_matches_exhaustive():
    cands = cp.enumerate_cone_lattice(cp.default_frame(), 2.0 * SQ23)
    for objective in ("electrical", "optical"):
        exhaustive = cp.search_lattice_constellation(cands, 8, objective)
        bnb = cp.search_lattice_constellation(cands, 8, objective,
                                              exhaustive_cap=1)
        assert np.allclose(exhaustive.points, bnb.points, atol=1e-12)


def test_result_feasibility_and_spectrum():
    cands = cp.enumerate_cone_lattice(cp.default_frame(), 3.0)
    for m in (3, 5, 8, 12):
        c = cp.search_lattice_constellation(cands, m, "electrical")
        assert cp.min_distance(c) >= 1.0 - 1e-9
        assert cp.cone_contains(c, 1e-9).ok
        sq = cp.pairwise_distances(c) ** 2
        assert np.all(np.abs(sq - np.round(sq)) <= 1e-9)


def test_optimize_frame_m4():
    r = cp.optimize_frame(4, "electrical", h_max=1.5, use_grid=False)
    assert r.objective_value == pytest.approx(0.75, abs=1e-6)
    assert r.frame_label == "default"
    r = cp.optimize_frame(4, "optical", h_max=1.5, use_grid=False)
    assert r.objective_value == pytest.approx(0.6123724356957945, abs=1e-6)


def test_optimize_frame_m8_grid_does_not_beat_default():
    base = cp.optimize_frame(8, "electrical", h_max=2.0, use_grid=False)
    grid = cp.optimize_frame(8, "electrical", h_max=2.0, use_grid=True)
    assert base.objective_value == pytest.approx(2.0, abs=1e-9)
    assert grid.objective_value <= base.objective_value + 1e-12
