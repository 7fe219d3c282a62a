"""Constant-speed straight-line motion, delays, perturbations and conflict checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .assignment import DELTA_POINT, GoalAssignment, assign_all
from .geometry import TOL_DUP, Circle, as_points, check_duplicates


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    initial_positions: np.ndarray
    circle: Circle
    speed: float = 0.5
    agent_radius: float = 0.0
    d_s: float = 0.0
    delta: float = DELTA_POINT
    delta_u: float = 0.0
    delta_td: float = 0.0
    seed: int = 0
    dt: float = 0.01
    min_separation: float = 0.0
    dynamics: bool = False
    ids: list | None = None
    quad_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        self.initial_positions = as_points(self.initial_positions)

    @property
    def n(self) -> int:
        return len(self.initial_positions)

    def validate(self) -> "Scenario":
        pts = self.initial_positions
        if self.n < 3:
            raise ScenarioError(f"at least 3 agents are required, got {self.n}")
        if not self.speed > 0:
            raise ScenarioError("speed must be positive")
        if not self.dt > 0:
            raise ScenarioError("dt must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ScenarioError("delta must lie in (0, 1)")
        for name in ("agent_radius", "d_s", "delta_u", "delta_td", "min_separation"):
            if getattr(self, name) < 0:
                raise ScenarioError(f"{name} must be non-negative")
        inside = self.circle.contains_strictly(pts)
        if not inside.all():
            k = int(np.flatnonzero(~inside)[0])
            raise ScenarioError(f"agent {k} is not strictly inside the circle")
        check_duplicates(pts)
        if self.min_separation > TOL_DUP:
            sep = min_pairwise_distance(pts)
            if sep < self.min_separation:
                raise ScenarioError(f"initial separation {sep:.4g} m is below {self.min_separation} m")
        return self


@dataclass
class TrajectoryLog:
    times: np.ndarray
    positions: np.ndarray          # (steps, n, 2)
    E_trace: np.ndarray
    min_E: float
    conflict_pairs: list[tuple[int, int, float]]
    min_pair_distance: float        # analytic closest approach over all pairs


def min_pairwise_distance(points) -> float:
    from scipy.spatial import cKDTree
    pts = as_points(points)
    if len(pts) < 2:
        return math.inf
    d, _ = cKDTree(pts).query(pts, k=2)
    return float(d[:, 1].min())


def plan(scenario: Scenario, planning_positions=None) -> GoalAssignment:
    """Assignment computed from ``planning_positions`` (default: the true ones)."""
    pts = scenario.initial_positions if planning_positions is None else planning_positions
    return assign_all(pts, scenario.circle, delta=scenario.delta, speed=scenario.speed)


def motion(assignment: GoalAssignment, start=None):
    """Start points, velocities and travel times, optionally from other start points."""
    x0 = np.asarray(assignment.positions if start is None else start, float)
    disp = assignment.goals - x0
    dist = np.hypot(disp[:, 0], disp[:, 1])
    t_f = dist / assignment.speed
    vel = np.divide(disp, t_f[:, None], out=np.zeros_like(disp), where=t_f[:, None] > 0)
    return x0, vel, t_f


def position_at(agent, t, assignment: GoalAssignment, delay=0.0, start=None):
    """Position(s) of ``agent`` (index or index array) at time ``t``.

    The agent waits at its start until ``delay``, moves at the common speed
    along its heading, and stops for good on reaching its goal. ``start``
    overrides the start positions (true positions when the plan was made on
    perturbed ones).
    """
    x0, vel, t_f = motion(assignment, start)
    agent = np.asarray(agent)
    tau = np.clip(np.asarray(t, float) - np.asarray(delay, float), 0.0, None)
    tau = np.minimum(tau, t_f[agent])
    out = x0[agent] + vel[agent] * np.asarray(tau)[..., None]
    done = np.asarray(t, float) - np.asarray(delay, float) >= t_f[agent]
    return np.where(np.asarray(done)[..., None], assignment.goals[agent], out)


def sample_delays(n: int, delta_td: float, rng: np.random.Generator) -> np.ndarray:
    if delta_td < 0:
        raise ValueError("delta_td must be non-negative")
    if delta_td == 0:
        return np.zeros(n)
    return rng.uniform(0.0, delta_td, size=n)


def perturb_positions(positions, delta_u: float, rng: np.random.Generator) -> np.ndarray:
    """Positions as known to the planner: each coordinate off by U(-delta_u, delta_u)."""
    pts = as_points(positions)
    if delta_u < 0:
        raise ValueError("delta_u must be non-negative")
    if delta_u == 0:
        return pts.copy()
    return pts + rng.uniform(-delta_u, delta_u, size=pts.shape)


def _pairs(n):
    return np.triu_indices(n, k=1)


def closest_approach(assignment: GoalAssignment, delays=None, start=None, chunk: int = 200_000):
    """Exact minimum distance and its time for every agent pair.

    Each agent's path is piecewise linear in time (wait, move, hold), so a
    pair's separation is piecewise linear too; the minimum is found on each
    piece in closed form.

    Returns ``(i, j, dmin, tmin)`` arrays over all pairs ``i < j``.
    """
    x0, vel, t_f = motion(assignment, start)
    n = len(x0)
    delays = np.zeros(n) if delays is None else np.asarray(delays, float)
    t_end = delays + t_f
    I, J = _pairs(n)
    dmin = np.empty(len(I))
    tmin = np.empty(len(I))
    for s in range(0, len(I), chunk):
        i, j = I[s:s + chunk], J[s:s + chunk]
        bps = np.sort(np.stack([np.zeros(len(i)), delays[i], t_end[i], delays[j], t_end[j]], axis=1), axis=1)
        best = np.full(len(i), np.inf)
        best_t = np.zeros(len(i))
        for k in range(bps.shape[1]):
            a = bps[:, k]
            b = bps[:, k + 1] if k + 1 < bps.shape[1] else a
            pi = _pos(x0, vel, delays, t_f, i, a)
            pj = _pos(x0, vel, delays, t_f, j, a)
            p = pi - pj
            mid = 0.5 * (a + b)
            wi = np.where(((mid >= delays[i]) & (mid < t_end[i]))[:, None], vel[i], 0.0)
            wj = np.where(((mid >= delays[j]) & (mid < t_end[j]))[:, None], vel[j], 0.0)
            w = wi - wj
            ww = (w * w).sum(axis=1)
            s_ = np.divide(-(p * w).sum(axis=1), ww, out=np.zeros_like(ww), where=ww > 0)
            s_ = np.clip(s_, 0.0, b - a)
            q = p + w * s_[:, None]
            d = np.hypot(q[:, 0], q[:, 1])
            better = d < best
            best = np.where(better, d, best)
            best_t = np.where(better, a + s_, best_t)
        dmin[s:s + chunk] = best
        tmin[s:s + chunk] = best_t
    return I, J, dmin, tmin


def _pos(x0, vel, delays, t_f, idx, t):
    tau = np.clip(t - delays[idx], 0.0, t_f[idx])
    return x0[idx] + vel[idx] * tau[:, None]


def detect_conflicts(assignment: GoalAssignment, d_s: float, delays=None, start=None):
    """Pairs whose separation drops to ``d_s`` or below at some time."""
    I, J, dmin, tmin = closest_approach(assignment, delays, start)
    hit = dmin <= d_s
    pairs = [(int(a), int(b), float(t)) for a, b, t in zip(I[hit], J[hit], tmin[hit])]
    return pairs, float(dmin.min()) if len(dmin) else math.inf


def pairwise_min(frames: np.ndarray) -> np.ndarray:
    """Minimum inter-agent distance in each frame of a ``(steps, n, 2)`` array."""
    steps, n, _ = frames.shape
    I, J = _pairs(n)
    out = np.empty(steps)
    block = max(1, 2_000_000 // max(len(I), 1))
    for s in range(0, steps, block):
        f = frames[s:s + block]
        d = f[:, I, :] - f[:, J, :]
        out[s:s + block] = np.hypot(d[..., 0], d[..., 1]).min(axis=1)
    return out


def segment_min(p0, p1):
    """Closest approach to the origin of the segments ``p0 -> p1`` (rows)."""
    w = p1 - p0
    ww = (w * w).sum(axis=-1)
    s = np.divide(-(p0 * w).sum(axis=-1), ww, out=np.zeros_like(ww), where=ww > 0)
    q = p0 + w * np.clip(s, 0.0, 1.0)[..., None]
    return np.hypot(q[..., 0], q[..., 1])


def flown_conflicts(frames, reference, assignment: GoalAssignment, d_s: float,
                    delays=None, start=None):
    """Conflicts between sampled flown paths.

    Pairs are screened with the exact closest approach of their reference
    paths minus each agent's largest tracking deviation; survivors are
    checked on every sample interval (positions taken linear in between)
    wherever a sampled separation falls below ``2 * d_s``.

    Returns ``(pairs, min_E)``. ``min_E`` is exact when it is below
    ``2 * d_s`` and otherwise a lower bound.
    """
    dev = np.hypot(*(frames - reference).transpose(2, 0, 1)).max(axis=0)
    I, J, dref, _ = closest_approach(assignment, delays, start)
    bound = dref - dev[I] - dev[J]
    near = bound <= 2.0 * d_s
    best = float(bound.min()) if len(bound) else math.inf
    pairs = []
    for i, j in zip(I[near].tolist(), J[near].tolist()):
        rel = frames[:, i] - frames[:, j]
        d = np.hypot(rel[:, 0], rel[:, 1])
        lo = min(float(d.min()), best)
        close = np.flatnonzero((d[:-1] < 2 * d_s) | (d[1:] < 2 * d_s))
        if len(close):
            dm = segment_min(rel[close], rel[close + 1])
            k = int(np.argmin(dm))
            lo = min(lo, float(dm[k]))
            if dm[k] <= d_s:
                tk = close[k]
                pairs.append((i, j, float(tk)))
        best = min(best, lo)
    return pairs, best


def reference_frames(times, assignment: GoalAssignment, delays, start=None) -> np.ndarray:
    x0, vel, t_f = motion(assignment, start)
    tau = np.clip(times[:, None] - delays[None, :], 0.0, t_f[None, :])
    frames = x0[None, :, :] + vel[None, :, :] * tau[..., None]
    arrived = times[:, None] - delays[None, :] >= t_f[None, :]
    return np.where(arrived[..., None], assignment.goals[None, :, :], frames)


def simulate_dynamics(scenario: Scenario, assignment: GoalAssignment, delays=None, start=None,
                      params=None, gains=None, e_trace: bool = True) -> TrajectoryLog:
    """Fly the swarm with the quadrotor model instead of ideal kinematics."""
    from . import quadrotor as quad

    n = len(assignment.goals)
    delays = np.zeros(n) if delays is None else np.asarray(delays, float)
    x0, _, t_f = motion(assignment, start)
    fl = quad.fly(x0, assignment.goals, t_f, assignment.speed, delays, params,
                  gains or quad.ControllerGains(), dt_out=scenario.dt)
    if fl.unstable.any():
        raise quad.InstabilityError(f"agent {int(np.flatnonzero(fl.unstable)[0])} diverged")
    frames = fl.planar
    ref = reference_frames(fl.times, assignment, delays, start)
    pairs, dmin = flown_conflicts(frames, ref, assignment, scenario.d_s, delays, start)
    pairs = [(i, j, float(fl.times[int(k)])) for i, j, k in pairs]
    E = pairwise_min(frames) if e_trace else np.empty(0)
    min_E = float(E.min()) if e_trace else dmin
    return TrajectoryLog(times=fl.times, positions=frames, E_trace=E, min_E=min_E,
                         conflict_pairs=pairs, min_pair_distance=dmin)


def simulate(scenario: Scenario, assignment: GoalAssignment, delays=None, start=None) -> TrajectoryLog:
    """Sample all positions on a ``dt`` grid and check every pair for conflicts."""
    n = len(assignment.goals)
    delays = np.zeros(n) if delays is None else np.asarray(delays, float)
    _, _, t_f = motion(assignment, start)
    t_end = float((delays + t_f).max())
    steps = int(math.ceil(t_end / scenario.dt - 1e-9))
    times = np.minimum(np.arange(steps + 1) * scenario.dt, t_end)
    frames = reference_frames(times, assignment, delays, start)
    E = pairwise_min(frames) if n > 1 else np.full(len(times), math.inf)
    pairs, dmin = detect_conflicts(assignment, scenario.d_s, delays, start)
    return TrajectoryLog(times=times, positions=frames, E_trace=E, min_E=float(E.min()),
                         conflict_pairs=pairs, min_pair_distance=dmin)
