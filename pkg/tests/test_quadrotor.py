import math

import numpy as np
import pytest

from circdist.quadrotor import (DT_DYN, G, InstabilityError, QuadrotorParams, commanded_attitude,
                                control_step, derivative, fly, hover_state, integrate,
                                rotation_matrix, sample_heterogeneity)


def run_python(state, target, seconds, dt=DT_DYN, params=QuadrotorParams()):
    """Reference closed loop using the per-step functions."""
    s = np.array(state, float)
    out = [s.copy()]
    for _ in range(int(round(seconds / dt))):
        F, tau = control_step(s, target, np.zeros(3), params=params)
        s = integrate(s, F, tau, params, dt)
        out.append(s.copy())
    return np.array(out)


def test_hover_is_an_equilibrium():
    s = hover_state(2.0, -1.0)
    F, tau = control_step(s, s[:3], np.zeros(3))
    assert F == QuadrotorParams().mass * G
    np.testing.assert_array_equal(tau, 0.0)
    np.testing.assert_array_equal(derivative(s, F, tau), 0.0)
    traj = run_python(s, s[:3], 10.0)
    assert np.abs(traj - s).max() < 1e-6


def test_rotation_matrix():
    np.testing.assert_allclose(rotation_matrix((0, 0, 0)), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(rotation_matrix((0, 0, math.pi / 2)), [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-15)
    rng = np.random.default_rng(1)
    for att in rng.uniform(-math.pi, math.pi, size=(100, 3)):
        Rm = rotation_matrix(att)
        np.testing.assert_allclose(Rm @ Rm.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(Rm) == pytest.approx(1.0, abs=1e-12)


def test_free_fall():
    d = derivative(hover_state(), 0.0, np.zeros(3))
    np.testing.assert_allclose(d[3:6], [0, 0, -G])


def test_commanded_attitude_signs():
    # pitch forward for +x, roll negative for +y
    phi, theta = commanded_attitude((1.0, 0.0, 0.0))
    assert phi == 0.0 and theta == pytest.approx(1 / G)
    phi, theta = commanded_attitude((0.0, 1.0, 0.0))
    assert phi == pytest.approx(-1 / G) and theta == 0.0
    # a positive pitch tilts the thrust toward +x
    a = rotation_matrix((0.0, 0.05, 0.0)) @ [0, 0, 1]
    assert a[0] > 0
    a = rotation_matrix((-0.05, 0.0, 0.0)) @ [0, 0, 1]
    assert a[1] > 0


def test_pure_x_error_commands_pitch():
    s = hover_state()
    F, tau = control_step(s, (1.0, 0.0, 1.0), np.zeros(3))
    assert F == pytest.approx(QuadrotorParams().mass * G)
    assert tau[1] > 0 and tau[0] == 0.0 and tau[2] == 0.0


def test_step_response_settles():
    log = fly([(0.0, 0.0)], [(1.0, 0.0)], [0.0], 0.5, t_end=8.0, settle=8.0)
    x = log.positions[:, 0, 0]
    assert x.max() < 1.25
    settled = log.times >= 5.0
    assert np.abs(x[settled] - 1.0).max() < 0.05
    assert np.abs(log.positions[:, 0, 2] - 1.0).max() < 0.05


def test_rk4_matches_refined_euler():
    # controls held over each 2 ms period; the oracle sub-steps that period with Euler at dt/10
    params = QuadrotorParams()
    target = (1.0, 0.5, 1.0)
    s = hover_state()
    e = hover_state()
    worst = 0.0
    for _ in range(int(round(5.0 / DT_DYN))):
        F, tau = control_step(s, target, np.zeros(3))
        s = integrate(s, F, tau, params)
        F, tau = control_step(e, target, np.zeros(3))
        for _ in range(10):
            e = e + DT_DYN / 10 * derivative(e, F, tau, params)
        worst = max(worst, float(np.linalg.norm(s[:3] - e[:3])))
    assert worst < 1e-3


def test_kernel_matches_step_functions():
    ref = run_python(hover_state(), (1.0, 0.5, 1.0), 2.0)
    log = fly([(0.0, 0.0)], [(1.0, 0.5)], [0.0], 0.5, t_end=2.0, settle=2.0)
    # the kernel commands the start point for its very first substep only
    np.testing.assert_allclose(log.positions[-1, 0], ref[-1, :3], atol=2e-3)


def test_tracks_moving_reference_after_two_seconds():
    goal = np.array([[6.0, 2.0]])
    t_f = np.array([np.hypot(6.0, 2.0) / 0.5])
    log = fly([(0.0, 0.0)], goal, t_f, 0.5)
    t = log.times
    ref = np.clip(t / t_f[0], 0, 1)[:, None] * goal[0]
    window = (t >= 2.0) & (t <= t_f[0])
    err = np.hypot(*(log.planar[window, 0] - ref[window]).T)
    assert err.max() < 0.05
    after = t >= t_f[0] + 5.0
    assert np.hypot(*(log.planar[after, 0] - goal[0]).T).max() < 0.05


def test_altitude_held_during_transit():
    log = fly([(0.0, 0.0), (3.0, 0.0)], [(8.0, 1.0), (3.0, -6.0)], [16.1, 12.0], 0.5)
    assert np.abs(log.positions[:, :, 2] - 1.0).max() < 0.05
    assert not log.unstable.any()


def test_heterogeneity_support():
    rng = np.random.default_rng(5)
    nom = QuadrotorParams()
    masses = np.array([sample_heterogeneity(nom, rng).mass for _ in range(100_000)])
    assert masses.min() >= 0.8 * nom.mass and masses.max() <= 1.2 * nom.mass
    assert masses.min() == pytest.approx(0.771, abs=1e-3) and masses.max() == pytest.approx(1.157, abs=1e-3)
    p = sample_heterogeneity(nom, rng)
    assert p.J[0] / nom.J[0] == pytest.approx(p.mass / nom.mass)
    q = sample_heterogeneity(nom, rng, mode="independent")
    assert all(0.8 <= a / b <= 1.2 for a, b in zip(q.J, nom.J))
    a = sample_heterogeneity(nom, np.random.default_rng(7))
    b = sample_heterogeneity(nom, np.random.default_rng(7))
    assert a == b
    with pytest.raises(ValueError):
        sample_heterogeneity(nom, rng, mode="wild")


def test_heterogeneous_swarm_stays_stable():
    rng = np.random.default_rng(11)
    params = [sample_heterogeneity(QuadrotorParams(), rng) for _ in range(6)]
    start = rng.uniform(-3, 3, size=(6, 2))
    goal = start * 2.5
    t_f = np.hypot(*(goal - start).T) / 0.5
    log = fly(start, goal, t_f, 0.5, params=params)
    assert not log.unstable.any()
    np.testing.assert_allclose(log.planar[-1], goal, atol=0.05)


def test_divergence_is_reported():
    s = hover_state()
    s[6] = 1e7
    with pytest.raises(InstabilityError):
        integrate(s, 0.0, np.zeros(3))
    with pytest.raises(ValueError):
        integrate(hover_state(), 0.0, np.zeros(3), dt_dyn=0.0)
