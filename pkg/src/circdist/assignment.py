"""Unique goal assignment on the boundary circle.

Goals are committed layer by layer from the innermost layer outwards. Each
agent first takes the point of its goal arc nearest to it; if that angle is
already taken, it is moved a fraction ``delta`` into the larger of the two
free gaps next to it.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import TWO_PI, Circle, ConvexLayerSet, PolarPoint, as_points, convex_layers, wrap_2pi, wrap_pi
from .search_space import (ArcKind, GoalArc, SearchSpace, SpaceKind, build_search_spaces,
                           intersect_with_circle)

TOL_EQ = 1e-6
DELTA_POINT = 0.2
DELTA_DISC = 0.5


class AssignmentError(RuntimeError):
    pass


class AssignedSet:
    """Sorted polar angles of goals committed so far."""

    def __init__(self, tol: float = TOL_EQ):
        self.angles: list[float] = []
        self.tol = tol

    def __len__(self):
        return len(self.angles)

    def __iter__(self):
        return iter(self.angles)

    def add(self, phi: float) -> None:
        bisect.insort(self.angles, wrap_2pi(phi))

    def match(self, phi: float) -> float | None:
        """Assigned angle within ``tol`` of ``phi`` (modulo 2*pi), if any."""
        a = self.angles
        if not a:
            return None
        phi = wrap_2pi(phi)
        k = bisect.bisect_left(a, phi)
        for j in (k - 1, k % len(a), 0, len(a) - 1):
            if abs(wrap_pi(a[j] - phi)) <= self.tol:
                return a[j]
        return None

    def on_arc(self, arc: GoalArc) -> list[float]:
        """Assigned angles on ``arc``, counterclockwise from its start."""
        a = self.angles
        if not a:
            return []
        if arc.kind is ArcKind.FULL_CIRCLE:
            k = bisect.bisect_left(a, arc.phi_o)
            return a[k:] + a[:k]
        lo = arc.phi_o - self.tol
        hi = arc.phi_o + arc.width + self.tol
        out = []
        # the range may wrap once past 2*pi and start slightly below zero
        for shift in (-TWO_PI, 0.0, TWO_PI):
            i = bisect.bisect_left(a, lo - shift)
            j = bisect.bisect_right(a, hi - shift)
            out.extend((x + shift, x) for x in a[i:j])
        out.sort()
        seen, res = set(), []
        for _, x in out:
            if x not in seen:
                seen.add(x)
                res.append(x)
        return res

    def cyclic_neighbors(self, phi: float) -> tuple[float, float]:
        """Signed offsets to the nearest other assigned angles clockwise and counterclockwise."""
        phi = wrap_2pi(phi)
        left, right = -TWO_PI, TWO_PI
        for x in self.angles:
            d = wrap_2pi(x - phi)
            if d <= self.tol or d >= TWO_PI - self.tol:
                continue
            right = min(right, d)
            left = max(left, d - TWO_PI)
        return left, right


@dataclass
class GoalAssignment:
    positions: np.ndarray
    circle: Circle
    goals: np.ndarray
    goal_phi: np.ndarray
    psi: np.ndarray
    t_f: np.ndarray
    was_modified: np.ndarray
    nominal_phi: np.ndarray
    layer_of: np.ndarray
    speed: float
    delta: float
    arcs: list[GoalArc] = field(default_factory=list, repr=False)
    spaces: list[SearchSpace] = field(default_factory=list, repr=False)
    layers: ConvexLayerSet | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.goals)

    @property
    def path_lengths(self) -> np.ndarray:
        return np.hypot(*(self.goals - self.positions).T)


def nearest_goal_on_arc(agent: PolarPoint, arc: GoalArc) -> float:
    """Polar angle of the arc point closest to the agent.

    Inside the arc this is the agent's own polar angle (straight out
    radially); otherwise the endpoint at smaller wrapped angular distance,
    preferring the start on ties.
    """
    if arc.kind is ArcKind.FULL_CIRCLE:
        return agent.phi
    if arc.kind is not ArcKind.ARC:
        raise AssignmentError(f"nearest_goal_on_arc needs an arc, got {arc.kind}")
    if wrap_2pi(agent.phi - arc.phi_o) <= arc.width:
        return agent.phi
    d_o = abs(wrap_pi(arc.phi_o - agent.phi))
    d_f = abs(wrap_pi(arc.phi_f - agent.phi))
    return arc.phi_o if d_o <= d_f else arc.phi_f


def _dist_sq(agent: PolarPoint, R: float, phi: float) -> float:
    return R * R + agent.r * agent.r - 2.0 * R * agent.r * math.cos(phi - agent.phi)


def nearest_goal_on_pointpair(agent: PolarPoint, pair: GoalArc) -> float:
    a, b = pair.phi_o, pair.phi_f
    da = _dist_sq(agent, pair.circle.radius, a)
    db = _dist_sq(agent, pair.circle.radius, b)
    if da < db:
        return a
    if db < da:
        return b
    return min(a, b)


def _shift(phis: list[float], k: int, delta: float) -> float:
    lo, mid, hi = phis[k - 1], phis[k], phis[k + 1]
    if abs(mid - lo) >= abs(mid - hi):
        return (1.0 - delta) * mid + delta * lo
    return (1.0 - delta) * mid + delta * hi


def resolve_conflict(goal_phi: float, arc: GoalArc, assigned: AssignedSet, delta: float) -> float:
    """Move a conflicting goal into the larger free gap beside it.

    Angles are taken relative to the arc start so the interpolation never
    straddles the 0/2*pi seam. On equal gaps the shift is clockwise.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if arc.kind is not ArcKind.ARC:
        left, right = assigned.cyclic_neighbors(goal_phi)
        return wrap_2pi(goal_phi + _shift([left, 0.0, right], 1, delta))
    on_arc = assigned.on_arc(arc)
    if not on_arc:
        raise AssignmentError("conflict flagged but no assigned goal lies on the arc")
    u_goal = arc.local(goal_phi, assigned.tol)
    if u_goal is None:
        raise AssignmentError("conflicting goal is not on its own arc")
    phis = [0.0] + [arc.local(b, assigned.tol) for b in on_arc] + [arc.width]
    hits = [k for k in range(1, len(phis) - 1) if abs(phis[k] - u_goal) <= assigned.tol]
    if not hits:
        raise AssignmentError("conflict flagged but the goal matches no assigned angle")
    return wrap_2pi(arc.phi_o + _shift(phis, hits[0], delta))


def goal_arcs(spaces: list[SearchSpace], circle: Circle) -> list[GoalArc]:
    """Vectorised :func:`intersect_with_circle` over many search spaces."""
    n = len(spaces)
    apex = np.array([s.apex for s in spaces], dtype=float).reshape(n, 2)
    r = np.hypot(*(apex - circle.c).T)
    if np.any(r >= circle.radius):
        k = int(np.flatnonzero(r >= circle.radius)[0])
        return [intersect_with_circle(spaces[k], circle)]  # raises
    start = np.array([s.alpha_o for s in spaces])
    stop = np.array([s.alpha_o + (math.pi if s.kind is SpaceKind.LINE else s.width) for s in spaces])
    p = apex - circle.c
    hits = []
    for theta in (start, stop):
        dx, dy = np.cos(theta), np.sin(theta)
        b = p[:, 0] * dx + p[:, 1] * dy
        c = (p ** 2).sum(axis=1) - circle.radius ** 2
        t = -b + np.sqrt(b * b - c)
        hits.append(wrap_2pi(np.arctan2(p[:, 1] + t * dy, p[:, 0] + t * dx)))
    width = wrap_2pi(hits[1] - hits[0])
    arcs = []
    for s, phi_o, w in zip(spaces, hits[0].tolist(), width.tolist()):
        if s.kind is SpaceKind.FULL:
            arcs.append(GoalArc(circle, ArcKind.FULL_CIRCLE, 0.0, TWO_PI))
        elif s.kind is SpaceKind.LINE:
            arcs.append(GoalArc(circle, ArcKind.POINT_PAIR, phi_o, w))
        else:
            arcs.append(GoalArc(circle, ArcKind.ARC, phi_o, w))
    return arcs


def _pick(agent: PolarPoint, arc: GoalArc, assigned: AssignedSet, delta: float):
    """Goal angle for one agent: (final, nominal, modified)."""
    if arc.kind is ArcKind.POINT_PAIR:
        first = nearest_goal_on_pointpair(agent, arc)
        if assigned.match(first) is None:
            return first, first, False
        other = arc.phi_f if first == arc.phi_o else arc.phi_o
        if assigned.match(other) is None:
            return other, first, True
        return resolve_conflict(first, arc, assigned, delta), first, True
    goal = nearest_goal_on_arc(agent, arc)
    if assigned.match(goal) is None:
        return goal, goal, False
    return resolve_conflict(goal, arc, assigned, delta), goal, True


def assign_all(points, circle: Circle, delta: float = DELTA_POINT, speed: float = 0.5,
               layers: ConvexLayerSet | None = None,
               spaces: list[SearchSpace] | None = None) -> GoalAssignment:
    """Assign every agent a distinct goal on ``circle``.

    Layers are processed innermost first; inside a layer agents go in
    increasing polar angle about the circle centre.
    """
    pts = as_points(points)
    n = len(pts)
    if speed <= 0:
        raise ValueError("speed must be positive")
    if layers is None:
        layers = convex_layers(pts)
    if spaces is None:
        spaces = build_search_spaces(layers, pts)
    arcs = goal_arcs(spaces, circle)

    rel = pts - circle.c
    r = np.hypot(rel[:, 0], rel[:, 1])
    phi = wrap_2pi(np.arctan2(rel[:, 1], rel[:, 0]))
    phi[r == 0] = 0.0

    goal_phi = np.empty(n)
    nominal = np.empty(n)
    modified = np.zeros(n, dtype=bool)
    assigned = AssignedSet()
    for layer in reversed(layers.layers):
        for i in sorted(layer.tolist(), key=lambda j: (phi[j], j)):
            agent = PolarPoint(float(r[i]), float(phi[i]))
            g, g0, mod = _pick(agent, arcs[i], assigned, delta)
            goal_phi[i], nominal[i], modified[i] = g, g0, mod
            assigned.add(g)

    goals = circle.point_at(goal_phi)
    d = goals - pts
    dist = np.hypot(d[:, 0], d[:, 1])
    psi = wrap_2pi(np.arctan2(d[:, 1], d[:, 0]))
    return GoalAssignment(
        positions=pts.copy(), circle=circle, goals=goals, goal_phi=goal_phi, psi=psi,
        t_f=dist / speed, was_modified=modified, nominal_phi=nominal,
        layer_of=layers.layer_of.copy(), speed=float(speed), delta=float(delta),
        arcs=arcs, spaces=spaces, layers=layers)


def audit(assignment: GoalAssignment, tol: float = TOL_EQ) -> dict:
    """Count pairwise goal coincidences and goals outside their own arcs."""
    phis = np.sort(assignment.goal_phi)
    gaps = np.diff(np.concatenate([phis, phis[:1] + TWO_PI])) if len(phis) > 1 else np.array([TWO_PI])
    outside = 0
    for k, (arc, g) in enumerate(zip(assignment.arcs, assignment.goal_phi)):
        if arc.kind is ArcKind.POINT_PAIR and assignment.was_modified[k] and not arc.contains(g, 1e-9):
            # both candidates taken: the goal leaves the line by construction
            continue
        if not arc.contains(float(g), 1e-9):
            outside += 1
    return {"min_gap": float(gaps.min()), "coincident": int(np.sum(gaps <= tol)), "outside_arc": outside}
