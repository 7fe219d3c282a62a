"""Per-agent search spaces and their intersection with the boundary circle."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import TWO_PI, Circle, ConvexLayerSet, GeometryError, as_points, wrap_2pi, wrap_pi

ANGLE_TOL = 1e-9


class SpaceKind(str, Enum):
    CONE = "cone"
    HALF_PLANE = "half_plane"
    LINE = "line"
    FULL = "full"


class ArcKind(str, Enum):
    ARC = "arc"
    POINT_PAIR = "point_pair"
    FULL_CIRCLE = "full_circle"


class ApexOutsideCircleError(GeometryError):
    pass


@dataclass(frozen=True)
class SearchSpace:
    """Angular region of admissible travel directions from ``apex``.

    Directions run counterclockwise from ``alpha_o`` to ``alpha_f``. For a
    line the two rays are ``alpha_o`` and ``alpha_o + pi``.
    """
    apex: tuple[float, float]
    kind: SpaceKind
    alpha_o: float
    alpha_f: float

    @property
    def width(self) -> float:
        if self.kind is SpaceKind.FULL:
            return TWO_PI
        if self.kind is SpaceKind.LINE:
            return 0.0
        if self.kind is SpaceKind.HALF_PLANE:
            return math.pi
        return wrap_2pi(self.alpha_f - self.alpha_o)

    def contains_direction(self, theta: float, tol: float = ANGLE_TOL) -> bool:
        if self.kind is SpaceKind.FULL:
            return True
        if self.kind is SpaceKind.LINE:
            d = abs(wrap_pi(theta - self.alpha_o))
            return d <= tol or abs(d - math.pi) <= tol
        off = wrap_pi(theta - self.alpha_o)
        if off < 0 and off >= -tol:
            return True
        return wrap_2pi(theta - self.alpha_o) <= self.width + tol


@dataclass(frozen=True)
class GoalArc:
    """Part of the circle reachable inside a search space.

    An ``ARC`` spans ``width`` radians counterclockwise from ``phi_o``. A
    ``POINT_PAIR`` holds its two candidate angles in ``phi_o`` and ``phi_f``.
    """
    circle: Circle
    kind: ArcKind
    phi_o: float
    width: float

    @property
    def phi_f(self) -> float:
        return wrap_2pi(self.phi_o + self.width)

    @property
    def endpoints(self) -> np.ndarray:
        return self.circle.point_at([self.phi_o, self.phi_f])

    def local(self, phi: float, tol: float = ANGLE_TOL) -> float | None:
        """Offset of ``phi`` from ``phi_o`` along the arc, or None if off it."""
        if self.kind is ArcKind.FULL_CIRCLE:
            return wrap_2pi(phi - self.phi_o)
        off = wrap_pi(phi - self.phi_o)
        if -tol <= off < 0:
            return 0.0
        u = wrap_2pi(phi - self.phi_o)
        if u <= self.width + tol:
            return min(u, self.width)
        return None

    def contains(self, phi: float, tol: float = ANGLE_TOL) -> bool:
        if self.kind is ArcKind.POINT_PAIR:
            return min(abs(wrap_pi(phi - self.phi_o)), abs(wrap_pi(phi - self.phi_f))) <= tol
        return self.local(phi, tol) is not None


def _direction(v) -> float:
    return math.atan2(v[1], v[0])


def build_search_space(agent: int, layers: ConvexLayerSet, points) -> SearchSpace:
    """Search space of ``agent`` from its position in the layer decomposition."""
    pts = as_points(points)
    m = int(layers.layer_of[agent])
    layer = layers.layers[m]
    apex = (float(pts[agent, 0]), float(pts[agent, 1]))
    k = int(np.flatnonzero(layer == agent)[0])
    size = len(layer)
    if size == 1:
        return SearchSpace(apex, SpaceKind.FULL, 0.0, TWO_PI)
    if layers.is_terminal(m):
        u = pts[layer[-1]] - pts[layer[0]]
        base = _direction(u)
        if k == 0:
            lo = base + math.pi / 2
            return SearchSpace(apex, SpaceKind.HALF_PLANE, wrap_2pi(lo), wrap_2pi(lo + math.pi))
        if k == size - 1:
            lo = base - math.pi / 2
            return SearchSpace(apex, SpaceKind.HALF_PLANE, wrap_2pi(lo), wrap_2pi(lo + math.pi))
        lo = wrap_2pi(base + math.pi / 2)
        return SearchSpace(apex, SpaceKind.LINE, lo, wrap_2pi(lo + math.pi))
    prev = pts[layer[k - 1]]
    nxt = pts[layer[(k + 1) % size]]
    v = pts[agent]
    e_in = v - prev
    e_out = nxt - v
    # outward normal of a CCW edge is its direction rotated by -pi/2
    a_o = _direction((e_in[1], -e_in[0]))
    a_f = _direction((e_out[1], -e_out[0]))
    return SearchSpace(apex, SpaceKind.CONE, wrap_2pi(a_o), wrap_2pi(a_f))


def build_search_spaces(layers: ConvexLayerSet, points) -> list[SearchSpace]:
    pts = as_points(points)
    return [build_search_space(i, layers, pts) for i in range(len(pts))]


def ray_circle_angle(apex, theta, circle: Circle):
    """Polar angle about the centre where the ray from ``apex`` exits the circle."""
    p = np.asarray(apex, float) - circle.c
    theta = np.asarray(theta, float)
    dx, dy = np.cos(theta), np.sin(theta)
    b = p[0] * dx + p[1] * dy
    c = p[0] ** 2 + p[1] ** 2 - circle.radius ** 2
    t = -b + np.sqrt(b * b - c)
    return wrap_2pi(np.arctan2(p[1] + t * dy, p[0] + t * dx))


def intersect_with_circle(ss: SearchSpace, circle: Circle) -> GoalArc:
    r = math.hypot(ss.apex[0] - circle.center[0], ss.apex[1] - circle.center[1])
    if not r < circle.radius:
        raise ApexOutsideCircleError(
            f"apex {ss.apex} is not strictly inside the circle (r={r}, R={circle.radius})")
    if ss.kind is SpaceKind.FULL:
        return GoalArc(circle, ArcKind.FULL_CIRCLE, 0.0, TWO_PI)
    if ss.kind is SpaceKind.LINE:
        a, b = ray_circle_angle(ss.apex, [ss.alpha_o, ss.alpha_o + math.pi], circle)
        return GoalArc(circle, ArcKind.POINT_PAIR, float(a), wrap_2pi(float(b) - float(a)))
    lo = ss.alpha_o
    hi = lo + ss.width
    phi_o, phi_f = ray_circle_angle(ss.apex, [lo, hi], circle)
    return GoalArc(circle, ArcKind.ARC, float(phi_o), wrap_2pi(float(phi_f) - float(phi_o)))
