import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats
from scipy.spatial.distance import pdist

from circdist.montecarlo import (PackingError, StudySpec, run_study, run_trial, run_trials,
                                 sample_positions, sample_scenario)
from circdist.rng import stream


def test_radial_distribution_uniform_over_disc():
    pts = sample_positions(100_000, 3.0, 0.0, np.random.default_rng(0))
    r = np.hypot(*pts.T)
    res = stats.kstest(r, lambda x: np.clip(x / 3.0, 0, 1) ** 2)
    assert res.statistic < 0.01
    assert r.max() <= 3.0


def test_single_point_and_square_region():
    p = sample_positions(1, 2.0, 0.4, np.random.default_rng(1))
    assert p.shape == (1, 2) and np.hypot(*p[0]) <= 2.0
    sq = sample_positions(500, 4.0, 0.0, np.random.default_rng(2), region="square")
    assert np.abs(sq).max() <= 4.0 and np.hypot(*sq.T).max() > 4.0


def test_minimum_separation_respected():
    pts = sample_positions(50, 40.0, 0.4, np.random.default_rng(3))
    assert pdist(pts).min() >= 0.4
    dense = sample_positions(300, 10.0, 0.4, np.random.default_rng(4))
    assert pdist(dense).min() >= 0.4


def test_packing_checks():
    with pytest.raises(PackingError):
        StudySpec(n=1000, R_c=5.0, trials=1, min_separation=0.4).validate()
    with pytest.raises(ValueError):
        StudySpec(n=10, R_c=5.0, trials=0).validate()
    with pytest.raises(ValueError):
        StudySpec(n=10, R_c=5.0, trials=1, agent_model="blob").validate()


def test_streams_are_independent_of_flags():
    base = StudySpec(n=20, R_c=40.0, trials=3, min_separation=0.4, seed=5)
    noisy = replace(base, delta_u=0.2, delta_td=0.2, agent_model="disc", d_s=0.15)
    for t in range(3):
        np.testing.assert_array_equal(sample_scenario(base, t).initial_positions,
                                      sample_scenario(noisy, t).initial_positions)
    a = stream(5, 0, "positions").uniform(size=3)
    b = stream(5, 0, "delays").uniform(size=3)
    assert not np.array_equal(a, b)


def test_point_agents_never_conflict():
    spec = StudySpec(n=40, R_c=40.0, trials=20, min_separation=0.4, seed=2)
    r = run_study(spec)
    assert r.P_col == 0 and r.failed == 0 and r.min_E > 0
    assert (r.mu_col, r.sigma_col, r.N_max_col) == (0.0, 0.0, 0)
    assert r.M_mean == pytest.approx(1.0, abs=0.05)


def test_study_is_deterministic():
    spec = StudySpec(n=30, R_c=10.0, trials=8, min_separation=0.4, agent_model="disc", d_s=0.15,
                     delta_u=0.2, delta_td=0.2, seed=9)
    assert run_study(spec).to_dict() == run_study(spec).to_dict()
    assert run_study(spec).to_dict() != run_study(replace(spec, seed=10)).to_dict()


def test_parallel_matches_serial():
    spec = StudySpec(n=20, R_c=8.0, trials=6, min_separation=0.4, agent_model="disc", d_s=0.3, seed=1)
    assert run_study(spec, jobs=2).to_dict() == run_study(spec, jobs=1).to_dict()


def test_failed_trial_is_recorded():
    # three agents cannot form a scenario once the enclosing circle margin is negative
    spec = StudySpec(n=3, R_c=5.0, trials=2, margin=-0.5)
    t = run_trial(spec, 0)
    assert t.failed and t.error
    r = run_study(spec)
    assert r.failed == 2 and r.trials == 0


def test_dynamics_trial_runs():
    spec = StudySpec(n=6, R_c=6.0, trials=2, min_separation=0.4, agent_model="disc", d_s=0.15,
                     dynamics=True, delta_u=0.2, delta_td=0.2, seed=3)
    ts = run_trials(spec)
    assert not any(t.failed for t in ts)
    assert all(math.isfinite(t.min_E) and t.audit_violations == 0 for t in ts)
