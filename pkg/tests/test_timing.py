import json
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from reclab.bounds import exit_upper, first_recurrence_bound, kth_recurrence_bound, mandelstam_tamm
from reclab.spectral import from_probabilities, moments, overlap, validate_state
from reclab.timing import CrossingQuery, QueryError, Status, find_exit, find_recurrences

from conftest import random_state

ASIN01 = math.asin(0.1)


def grid_crossings(state, eps, t_end, step, count):
    """Alternating exit / return times from a dense grid, refined with brentq on direct sums."""
    def dist(t):
        return math.sqrt(max(0.0, 1.0 - abs(overlap(state, t)) ** 2))

    ts = np.arange(0.0, t_end, step)
    dd = np.sqrt(np.clip(1.0 - np.abs(overlap(state, ts)) ** 2, 0.0, 1.0))
    out, outside, i = [], True, 1
    while len(out) < count and i < ts.size:
        hit = np.nonzero(dd[i:] >= eps)[0] if outside else np.nonzero(dd[i:] <= eps)[0]
        if hit.size == 0:
            break
        j = i + hit[0]
        out.append(brentq(lambda t: dist(t) - eps, ts[j - 1], ts[j], xtol=1e-14))
        outside = not outside
        i = j + 1
    return out


def test_two_level_exit_closed_form(two_level):
    c = find_exit(two_level, CrossingQuery(0.1))
    assert c.status is Status.EXITED
    assert c.t_exit == pytest.approx(ASIN01, abs=1e-9)


def test_two_level_recurrences_closed_form(two_level):
    c = find_recurrences(two_level, CrossingQuery(0.1, k=2))
    assert c.recurrences[0] == pytest.approx(math.pi - ASIN01, abs=1e-9)
    assert c.recurrences[1] == pytest.approx(2 * math.pi - ASIN01, abs=1e-9)
    assert c.exits[1] == pytest.approx(math.pi + ASIN01, abs=1e-9)
    assert c.status is Status.EXITED


def test_three_level_exit_root_oracle(three_level):
    # closed form (1 + 2 cos t) / 3 = sqrt(1 - eps^2) solved with brentq at xtol 1e-15
    t_exit = 0.24682172024472562
    c = find_recurrences(three_level, CrossingQuery(0.2, k=1))
    assert c.t_exit == pytest.approx(t_exit, abs=1e-9)
    assert c.recurrences[0] == pytest.approx(2 * math.pi - t_exit, abs=1e-9)


def test_eigenstate_never_exits():
    c = find_exit(validate_state([0.3], [1.0]), CrossingQuery(0.1))
    assert c.status is Status.NEVER_EXITS
    assert c.t_exit is None


def test_dominant_weight_never_exits():
    # p_max = 0.9: inf F = 0.64 > 1 - 0.7^2, so distance 0.7 is unreachable
    s = from_probabilities([0.0, 1.0, math.sqrt(2)], [0.9, 0.05, 0.05])
    assert find_exit(s, CrossingQuery(0.7)).status is Status.NEVER_EXITS


def test_horizon_exhausted(two_level):
    c = find_exit(two_level, CrossingQuery(0.5, t_max=0.1))
    assert c.status is Status.HORIZON
    c = find_recurrences(two_level, CrossingQuery(0.1, k=3, t_max=4.0))
    assert c.status is Status.HORIZON
    assert len(c.recurrences) == 1


@pytest.mark.parametrize("kw", [dict(epsilon=0.0), dict(epsilon=1.0), dict(epsilon=0.1, dt_min=0.0),
                                dict(epsilon=0.1, refine_tol=-1.0), dict(epsilon=0.1, k=-1),
                                dict(epsilon=0.1, dt_min=1.0, t_max=0.5)])
def test_bad_query(kw):
    with pytest.raises(QueryError):
        CrossingQuery(**kw)


def test_certificate_json(two_level):
    c = find_recurrences(two_level, CrossingQuery(0.1, k=1))
    obj = json.loads(json.dumps(c.to_json()))
    assert set(obj) == {"t_exit", "recurrences", "miss_tol", "status", "evaluations"}
    assert obj["status"] == "Exited"
    assert obj["miss_tol"] == pytest.approx(1e-6)


def test_determinism(rng):
    s = random_state(rng, 4)
    a = find_recurrences(s, CrossingQuery(0.2, k=2, t_max=500.0))
    b = find_recurrences(s, CrossingQuery(0.2, k=2, t_max=500.0))
    assert a.to_json() == b.to_json()


def test_exit_point_lies_on_threshold(rng):
    for _ in range(30):
        s = random_state(rng, 5)
        m = moments(s)
        eps = 0.5 * m.eps_star
        c = find_exit(s, CrossingQuery(eps))
        refine_slack = m.lipschitz * (1e-10 / m.lipschitz)
        d = math.sqrt(max(0.0, 1 - abs(overlap(s, c.t_exit)) ** 2))
        assert abs(d - eps) <= refine_slack + 1e-12


def test_ordering_and_bounds_on_random_instances(rng):
    for _ in range(40):
        d = int(rng.integers(2, 5))
        s = random_state(rng, d)
        m = moments(s)
        eps = float(rng.uniform(0.05, 0.45)) * m.eps_star
        c = find_recurrences(s, CrossingQuery(eps, k=3, t_max=300.0 / m.lipschitz))
        times = [c.t_exit] + c.recurrences
        assert all(a < b for a, b in zip(times, times[1:]))
        assert mandelstam_tamm(eps, m.variance) <= c.t_exit + 1e-9
        assert c.t_exit <= exit_upper(eps, m) + 1e-9
        if c.recurrences:
            assert c.recurrences[0] <= first_recurrence_bound(eps, d, c.t_exit).value
        if len(c.recurrences) == 3:
            t2 = find_exit(s, CrossingQuery(2 * eps)).t_exit
            assert c.recurrences[2] <= kth_recurrence_bound(eps, d, 3, t2).value


@pytest.mark.parametrize("seed", range(6))
def test_matches_grid_oracle_commensurate(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 4))
    lam = rng.choice(np.arange(-3, 4), size=d, replace=False).astype(float)
    w = rng.uniform(0.2, 1.0, size=d)
    s = from_probabilities(lam, w / w.sum())
    eps = 0.15
    c = find_recurrences(s, CrossingQuery(eps, k=2, t_max=20.0))
    found = [c.t_exit, c.recurrences[0]] + ([c.exits[1], c.recurrences[1]] if len(c.recurrences) > 1 else [])
    ref = grid_crossings(s, eps, 20.0, 1e-4, len(found))
    assert len(ref) == len(found)
    np.testing.assert_allclose(found, ref, atol=1e-8)


def test_qutrit_two_timescales_dense_grid():
    # weights (1/2, 1/2 - 0.01, 0.01) on energies (0, 1, 1e4); eps = 0.1
    s = from_probabilities([0.0, 1.0, 1e4], [0.5, 0.49, 0.01])
    c = find_recurrences(s, CrossingQuery(0.1, k=400, t_max=7.0))
    ref = grid_crossings(s, 0.1, 0.25, 1e-6, 2 * 40 + 1)
    assert c.t_exit == pytest.approx(ref[0], abs=1e-9)
    np.testing.assert_allclose(c.recurrences[:40], ref[1::2][:40], atol=1e-9)
    gaps = np.diff(c.recurrences)
    assert gaps.max() > 100 * c.t_exit
