import math

import numpy as np
import pytest

from circdist.assignment import assign_all
from circdist.evaluation import MetricError, TrialMetrics, aggregate, metric_M, metric_S
from circdist.fileio import enclosing_circle, hexagon_example2
from circdist.geometry import Circle


def trial(k, conflicts, S=0.01):
    return TrialMetrics(k, np.ones(3), S, conflicts, 1.0, 10.0, 0.001)


def test_radial_assignment_scores_one():
    pts = [(math.cos(a), math.sin(a)) for a in (0.1, 2.2, 4.3)]
    a = assign_all(pts, Circle((0, 0), 4.0))
    np.testing.assert_allclose(metric_M(a), 1.0)
    assert metric_M(a, 1) == pytest.approx(1.0)
    assert metric_S(a) == pytest.approx(0.0, abs=1e-12)


def test_M_never_below_one(rng):
    for _ in range(20):
        pts = rng.uniform(-4, 4, size=(30, 2))
        a = assign_all(pts, enclosing_circle(pts))
        M = metric_M(a)
        assert M.min() >= 1 - 1e-9
        # the denominator is below every distance to 10^4 circle samples
        s = a.circle.point_at(np.linspace(0, 2 * math.pi, 10_000, endpoint=False))
        nearest = np.hypot(s[None, :, 0] - pts[:, None, 0], s[None, :, 1] - pts[:, None, 1]).min(axis=1)
        short = a.path_lengths / M
        assert np.all(short <= nearest + 1e-12)
        assert np.all(nearest - short < 1e-4)


def test_S_consistent_with_per_agent_M(rng):
    pts = rng.uniform(-4, 4, size=(40, 2))
    a = assign_all(pts, enclosing_circle(pts))
    short = a.path_lengths / metric_M(a)
    S = (metric_M(a) * short).sum() / short.sum() - 1
    assert S == pytest.approx(metric_S(a), rel=1e-12)
    assert metric_S(a) >= 0


def test_hexagon_preset_metrics():
    pts = hexagon_example2()
    a = assign_all(pts, Circle((0, 0), 9.4))
    M = metric_M(a)
    assert M.mean() == pytest.approx(1.009, abs=0.01)
    assert M.std() == pytest.approx(0.036, abs=0.01)


def test_boundary_guard():
    a = assign_all([(0, 0), (1, 0), (0, 1)], Circle((0, 0), 2.0))
    a.positions[1] = (2.0, 0.0)
    with pytest.raises(MetricError):
        metric_M(a)


def test_aggregate_single_conflicts():
    trials = [trial(k, 1 if k < 36 else 0) for k in range(1000)]
    r = aggregate(trials)
    assert (r.P_col, r.mu_col, r.sigma_col, r.N_max_col) == (0.036, 1.0, 0.0, 1)


def test_aggregate_population_sigma():
    r = aggregate([trial(0, 1), trial(1, 2)] + [trial(k, 0) for k in range(2, 10)])
    assert r.P_col == pytest.approx(0.2)
    assert (r.mu_col, r.sigma_col, r.N_max_col) == (1.5, 0.5, 2)


def test_aggregate_no_conflicts():
    r = aggregate([trial(k, 0) for k in range(5)])
    assert (r.P_col, r.mu_col, r.sigma_col, r.N_max_col) == (0.0, 0.0, 0.0, 0)


def test_aggregate_counts_failures_separately():
    r = aggregate([trial(0, 1), TrialMetrics.failure(1, "boom"), trial(2, 0)])
    assert r.trials == 2 and r.failed == 1 and r.P_col == 0.5
    with pytest.raises(ValueError):
        aggregate([])


def test_aggregate_permutation_invariant(rng):
    ts = [trial(k, int(c), S=float(s)) for k, (c, s) in
          enumerate(zip(rng.integers(0, 4, 50), rng.uniform(0, 0.1, 50)))]
    a = aggregate(ts).to_dict()
    b = aggregate([ts[i] for i in rng.permutation(50)]).to_dict()
    assert a == b
    assert a["S_m_below_5pct"] == sum(t.S_m <= 0.05 for t in ts)
