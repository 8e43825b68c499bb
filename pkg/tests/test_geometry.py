import math

import numpy as np
import pytest

from reclab.geometry import (Flavor, NetTooLarge, build_phase_net, covering_check, diagonal_diamond_distance,
                             diamond_distance_grid, projective_distance, torus_distance, trace_distance)
from reclab.spectral import from_probabilities


def test_net_sizes():
    assert build_phase_net(0.5, 3).n == 13
    assert build_phase_net(0.5, 3).size == 169
    assert build_phase_net(0.5, 3, Flavor.UNITARY).size == 676
    assert build_phase_net(0.5, 1).size == 1
    assert list(build_phase_net(0.5, 1).points()) == [pytest.approx([0.0])]


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.3, 0.7])
@pytest.mark.parametrize("flavor", list(Flavor))
def test_net_size_within_bound(eps, flavor):
    net = build_phase_net(eps, 6, flavor)
    assert net.log10_size <= net.size_bound_log10 + 1e-12


def test_points_enumerates_grid():
    net = build_phase_net(0.9, 3)
    pts = np.array(list(net.points()))
    assert pts.shape == (net.size, 3)
    assert np.all(pts[:, 0] == 0)
    assert len({tuple(p) for p in pts}) == net.size


def test_enumeration_cap():
    net = build_phase_net(0.01, 6)
    with pytest.raises(NetTooLarge):
        next(net.points())


def test_bad_parameters():
    for args in [(0.0, 3), (1.0, 3), (0.5, 0)]:
        with pytest.raises(ValueError):
            build_phase_net(*args)
    with pytest.raises(ValueError):
        build_phase_net(0.5, 3, pinned=[3])
    with pytest.raises(ValueError):
        covering_check(build_phase_net(0.5, 3), 0)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("eps", [0.3, 0.5, 0.8])
def test_state_covering(d, eps):
    res = covering_check(build_phase_net(eps, d), 20_000, seed=d)
    assert res.passed and res.max_distance <= eps


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("eps", [0.3, 0.5, 0.8])
def test_unitary_covering(d, eps):
    res = covering_check(build_phase_net(eps, d, Flavor.UNITARY), 20_000, seed=d)
    assert res.passed and res.max_distance <= eps / 2


def test_state_covering_nonuniform_base(rng):
    for _ in range(5):
        p = rng.dirichlet(np.ones(4))
        base = from_probabilities(np.zeros(4), p)
        assert covering_check(build_phase_net(0.4, 4, base=base), 20_000, seed=1).passed


def test_pinned_low_mass_coordinates():
    # two coordinates carry total mass 0.02: pin them and cover at eps/2 on the rest
    eps = 0.5
    base = from_probabilities(np.zeros(3), [0.98, 0.01, 0.01])
    net = build_phase_net(eps, 3, base=base, pinned=[1, 2], resolution_eps=eps / 2)
    assert net.size == 1
    res = covering_check(net, 100_000, seed=3)
    assert res.passed


def test_covering_independent_of_workers(monkeypatch):
    net = build_phase_net(0.5, 3)
    monkeypatch.setenv("RECLAB_THREADS", "1")
    a = covering_check(net, 50_000, seed=9, chunk=7_000)
    monkeypatch.setenv("RECLAB_THREADS", "4")
    b = covering_check(net, 50_000, seed=9, chunk=7_000)
    assert a == b


def test_diamond_examples():
    assert diagonal_diamond_distance([0, math.pi], [0, 0]) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert diagonal_diamond_distance([0.3, 0.3, 0.3], [0, 0, 0]) == pytest.approx(0, abs=1e-12)
    assert diagonal_diamond_distance([0.2, -0.2], [0, 0]) == pytest.approx(2 * math.sin(0.1), abs=1e-12)
    third = [0, 2 * math.pi / 3, 4 * math.pi / 3]
    assert diagonal_diamond_distance(third, [0, 0, 0]) == pytest.approx(math.sqrt(3), abs=1e-12)
    assert diagonal_diamond_distance([1.0], [0.0]) == 0.0


def test_diamond_matches_grid(rng):
    for _ in range(100):
        k = int(rng.integers(1, 33))
        a, b = rng.uniform(0, 2 * math.pi, (2, k))
        assert diagonal_diamond_distance(a, b) == pytest.approx(diamond_distance_grid(a, b, 20_000), abs=1e-3)


def test_diamond_symmetry_and_invariance(rng):
    a, b = rng.uniform(0, 2 * math.pi, (2, 6))
    v = diagonal_diamond_distance(a, b)
    assert diagonal_diamond_distance(b, a) == pytest.approx(v, abs=1e-12)
    assert diagonal_diamond_distance(a + 1.7, b) == pytest.approx(v, abs=1e-12)
    assert diagonal_diamond_distance(a + 2 * math.pi, b) == pytest.approx(v, abs=1e-12)
    assert 0 <= v <= 2


def test_norm_sandwich(rng):
    for _ in range(200):
        u, v = rng.normal(size=(2, 5)) + 1j * rng.normal(size=(2, 5))
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        proj, tr = projective_distance(u, v), trace_distance(u, v)
        assert proj / math.sqrt(2) - 1e-12 <= tr <= proj + 1e-12
        assert tr == pytest.approx(math.sqrt(1 - abs(np.vdot(u, v)) ** 2), abs=1e-10)


def test_torus_distance_zero_at_same_point(rng):
    w = rng.dirichlet(np.ones(4))
    phi = rng.uniform(0, 6, (3, 4))
    np.testing.assert_allclose(torus_distance(w, phi, phi), 0, atol=1e-7)
    np.testing.assert_allclose(torus_distance(w, phi, phi + 0.4), 0, atol=1e-7)
