"""Signal-space metrics against brute-force oracles, plus symmetry properties."""

import json
import math

import numpy as np
import pytest

import conepack as cp
from conepack.errors import InvalidConstellationError, NotAdmissibleError

SQ23 = math.sqrt(2.0 / 3.0)


# independent oracles: plain double loops, no shared code with the package
def brute_min_distance(points):
    m = len(points)
    return min(math.dist(points[i], points[j])
               for i in range(m) for j in range(i + 1, m))


def brute_kissing(points, rel_tol=1e-6):
    m = len(points)
    d = brute_min_distance(points)
    return sum(1 for i in range(m) for j in range(i + 1, m)
               if math.dist(points[i], points[j]) <= (1.0 + rel_tol) * d)


def random_cone_points(rng, m, height=3.0):
    s1 = rng.uniform(0.0, height, m)
    r = s1 / math.sqrt(2.0) * np.sqrt(rng.uniform(size=m))
    th = rng.uniform(0.0, 2.0 * math.pi, m)
    return np.column_stack([s1, r * np.cos(th), r * np.sin(th)])


def random_admissible(rng, m=6):
    while True:
        pts = random_cone_points(rng, m)
        if brute_min_distance(pts) > 1e-3:
            return cp.Constellation("random", pts, cp.SUBCARRIER)


@pytest.fixture
def c4():
    return cp.get("c4").constellation


@pytest.fixture
def ook():
    return cp.get("ook").constellation


def test_min_distance_examples(c4, ook):
    assert cp.min_distance(c4) == pytest.approx(1.0, abs=1e-12)
    assert cp.min_distance(ook) == 1.0
    cpe8 = cp.get("c-pe-8").constellation
    assert cp.min_distance(cpe8) == pytest.approx(1.0, abs=1e-9)
    # cross-check the implementation against the plain-loop oracle
    assert cp.min_distance(cpe8) == pytest.approx(brute_min_distance(cpe8.points),
                                                  abs=1e-15)


def test_single_point_rejected():
    with pytest.raises(InvalidConstellationError):
        cp.Constellation("one", np.array([[0.0, 0.0, 0.0]]))


def test_kissing_examples(c4, ook):
    assert cp.kissing_count(ook, 1e-6) == 1
    assert cp.kissing_count(c4, 1e-6) == 6
    cpe8 = cp.get("c-pe-8").constellation
    # oracle: 6 tetrahedron pairs + 6 shell-tetrahedron + 3 apex-shell
    # + 3 apex-top contacts
    assert brute_kissing(cpe8.points) == 18
    assert cp.kissing_count(cpe8, 1e-6) == 18


def test_kissing_rejects_bad_tolerance(c4):
    with pytest.raises(ValueError):
        cp.kissing_count(c4, 0.0)


def test_avg_electrical_energy(c4, ook):
    assert cp.avg_electrical_energy(c4) == pytest.approx(0.75, abs=1e-15)
    assert cp.avg_electrical_energy(ook) == 0.5
    assert cp.avg_electrical_energy(cp.get("c-pe-8").constellation) == \
        pytest.approx(1.75, abs=1e-12)


def test_avg_optical_amplitude(c4, ook):
    assert cp.avg_optical_amplitude(c4) == pytest.approx(0.75 * SQ23, abs=1e-15)
    assert cp.avg_optical_amplitude(ook) == 0.5
    assert cp.avg_optical_amplitude(cp.get("qpsk").constellation) == 1.0


def test_avg_optical_amplitude_rejects_negative_dc():
    bad = cp.Constellation("bad", np.array([[-0.5, 0.0, 0.0], [1.0, 0.0, 0.0]]))
    with pytest.raises(NotAdmissibleError):
        cp.avg_optical_amplitude(bad)


def test_cone_contains(c4):
    assert cp.cone_contains(c4, 1e-9).ok
    bad = cp.Constellation("bad", np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]]))
    report = cp.cone_contains(bad, 1e-9)
    assert not report.ok
    assert report.violating_indices == (0,)
    assert report.violations[0] > 0
    assert cp.cone_contains(cp.get("c-po-8").constellation, 1e-3).ok


def test_cone_violations_vector():
    v = cp.cone_violations(np.array([[1.0, 1.0, 1.0]]))
    assert v[0] == pytest.approx(3.0)  # 2*(1+1) - 1
    assert cp.cone_violations(np.array([[1.0, 0.5, 0.5]]))[0] == pytest.approx(0.0)


def test_spectral_efficiency(c4, ook):
    assert cp.spectral_efficiency(ook) == 1.0
    assert cp.spectral_efficiency(c4) == 1.0
    assert cp.spectral_efficiency(cp.get("c-pe-8").constellation) == 1.5


def test_spectral_efficiency_warns_on_odd_size():
    c = cp.Constellation("m3", np.array([[0.0], [1.0], [2.0]]), cp.BASEBAND)
    with pytest.warns(UserWarning):
        eta = cp.spectral_efficiency(c)
    assert eta == pytest.approx(math.log2(3.0))


def test_normalize_to_unit_dmin(c4, ook):
    scaled = cp.Constellation("ook2", np.array([[0.0], [2.0]]), cp.BASEBAND)
    assert np.allclose(cp.normalize_to_unit_dmin(scaled).points,
                       np.array([[0.0], [1.0]]))
    blown = c4.scaled(3.0)
    back = cp.normalize_to_unit_dmin(blown)
    assert np.allclose(back.points, c4.points, atol=1e-15)
    rng = np.random.default_rng(11)
    for _ in range(20):
        c = random_admissible(rng)
        assert cp.cone_contains(cp.normalize_to_unit_dmin(c), 1e-9).ok == \
            cp.cone_contains(c, 1e-9).ok


def test_scale_covariance():
    rng = np.random.default_rng(3)
    for _ in range(20):
        c = random_admissible(rng)
        alpha = rng.uniform(0.1, 10.0)
        s = c.scaled(alpha)
        assert cp.min_distance(s) == pytest.approx(alpha * cp.min_distance(c),
                                                   rel=1e-12)
        assert cp.avg_electrical_energy(s) == pytest.approx(
            alpha ** 2 * cp.avg_electrical_energy(c), rel=1e-12)
        assert cp.avg_optical_amplitude(s) == pytest.approx(
            alpha * cp.avg_optical_amplitude(c), rel=1e-12)
        assert cp.cone_contains(s, 1e-9).ok == cp.cone_contains(c, 1e-9).ok


def test_rotation_and_reflection_invariance():
    rng = np.random.default_rng(4)
    for _ in range(20):
        c = random_admissible(rng)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        reflect = bool(rng.integers(2))
        r = cp.Constellation("rot", cp.rotate_about_axis(c.points, angle, reflect),
                             cp.SUBCARRIER)
        assert cp.min_distance(r) == pytest.approx(cp.min_distance(c), rel=1e-12)
        assert cp.kissing_count(r, 1e-6) == cp.kissing_count(c, 1e-6)
        assert cp.avg_electrical_energy(r) == pytest.approx(
            cp.avg_electrical_energy(c), rel=1e-12)
        assert cp.avg_optical_amplitude(r) == pytest.approx(
            cp.avg_optical_amplitude(c), rel=1e-12)
        assert cp.cone_contains(r, 1e-9).ok == cp.cone_contains(c, 1e-9).ok


def test_kissing_bounds_and_attainment():
    rng = np.random.default_rng(5)
    for _ in range(20):
        c = random_admissible(rng)
        k = cp.kissing_count(c, 1e-6)
        m = c.size
        assert 1 <= k <= m * (m - 1) // 2
        d = cp.pairwise_distances(c)
        assert np.count_nonzero(d <= (1.0 + 1e-6) * d.min()) == k


def test_jensen_chain():
    # E[|s|^2] >= E[s1^2] >= (E[s1])^2 for admissible sets
    rng = np.random.default_rng(6)
    for _ in range(20):
        c = random_admissible(rng)
        es = cp.avg_electrical_energy(c)
        mean_sq_dc = float(np.mean(c.points[:, 0] ** 2))
        dc = cp.avg_optical_amplitude(c)
        assert es >= mean_sq_dc - 1e-12
        assert mean_sq_dc >= dc ** 2 - 1e-12


def test_json_round_trip(tmp_path, c4):
    path = tmp_path / "c4.json"
    c4.save(path)
    data = json.loads(path.read_text())
    assert set(data) == {"name", "bandwidth_model", "points"}
    loaded = cp.Constellation.load(path)
    assert loaded.name == c4.name
    assert loaded.bandwidth_model == c4.bandwidth_model
    assert np.array_equal(loaded.points, c4.points)  # exact round trip


def test_json_rejects_garbage():
    with pytest.raises(InvalidConstellationError):
        cp.Constellation.from_json_dict({"name": "x"})


def test_subcarrier_padding():
    c = cp.Constellation("pad", np.array([[1.0, 0.5], [1.0, -0.5]]), cp.SUBCARRIER)
    assert c.dim == 3
    assert np.all(c.points[:, 2] == 0.0)


def test_duplicate_points_rejected():
    with pytest.raises(InvalidConstellationError):
        cp.Constellation("dup", np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]))
