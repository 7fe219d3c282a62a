"""Planar primitives, convex hulls and convex-layer (onion) decomposition.

Points are handled as ``(n, 2)`` float arrays; a single point is a length-2
array. Hull routines return indices into the input array.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

TOL_DUP = 1e-9
TOL_COL = 1e-9
TWO_PI = 2.0 * math.pi

# below this many points the extreme-point prefilter costs more than it saves
_PREFILTER_MIN = 64


class GeometryError(ValueError):
    pass


class DuplicatePointError(GeometryError):
    def __init__(self, i: int, j: int):
        super().__init__(f"points {i} and {j} are closer than {TOL_DUP} m")
        self.pair = (i, j)


def wrap_2pi(a):
    """Map angles to ``[0, 2*pi)``."""
    w = np.mod(a, TWO_PI)
    if np.ndim(w) == 0:
        w = float(w)
        return 0.0 if w >= TWO_PI else w
    w[w >= TWO_PI] = 0.0
    return w


def wrap_pi(a):
    """Map angles to ``(-pi, pi]``."""
    w = math.pi - np.mod(math.pi - np.asarray(a, dtype=float), TWO_PI)
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class PolarPoint:
    r: float
    phi: float

    def __post_init__(self):
        if self.r < 0:
            raise GeometryError("polar radius must be non-negative")
        object.__setattr__(self, "phi", wrap_2pi(self.phi))


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0 or not math.isfinite(self.radius):
            raise GeometryError(f"circle radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    def point_at(self, phi):
        """Point(s) on the circle at polar angle(s) ``phi``."""
        phi = np.asarray(phi, dtype=float)
        out = np.stack([np.cos(phi), np.sin(phi)], axis=-1) * self.radius
        return out + self.c

    def polar(self, p) -> PolarPoint:
        d = np.asarray(p, dtype=float) - self.c
        r = float(math.hypot(d[0], d[1]))
        phi = math.atan2(d[1], d[0]) if r > 0 else 0.0
        return PolarPoint(r, phi)

    def contains_strictly(self, points) -> np.ndarray:
        d = np.atleast_2d(points) - self.c
        return np.hypot(d[:, 0], d[:, 1]) < self.radius


@dataclass
class ConvexLayerSet:
    """Nested layers, outermost first.

    ``layers[m]`` holds agent indices; polygon layers are counterclockwise,
    a terminal collinear layer is ordered along its line.
    """
    layers: list[np.ndarray]
    layer_of: np.ndarray
    is_terminal_collinear: bool = False
    n_points: int = field(init=False)

    def __post_init__(self):
        self.n_points = len(self.layer_of)

    @property
    def M(self) -> int:
        return len(self.layers)

    def is_terminal(self, m: int) -> bool:
        """True for a last layer that was not peeled as a polygon."""
        return m == self.M - 1 and (self.is_terminal_collinear or len(self.layers[m]) < 3)


def as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1 and pts.size == 2:
        pts = pts.reshape(1, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GeometryError(f"expected an (n, 2) array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise GeometryError("points must have finite coordinates")
    return pts


def cross(o, a, b) -> float:
    """z-component of (a - o) x (b - o)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _col_threshold(ax, ay, bx, by, cx, cy) -> float:
    la = math.hypot(ax - bx, ay - by)
    lc = math.hypot(bx - cx, by - cy)
    return TOL_COL * max(1.0, la * lc)


def collinearity_test(a, b, c) -> bool:
    """True when ``|(a - b) x (b - c)|`` is within tolerance of zero.

    The tolerance scales with the product of the two edge lengths so the
    test behaves the same in millimetres and in hundreds of metres.
    """
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    cx, cy = float(c[0]), float(c[1])
    z = (ax - bx) * (by - cy) - (ay - by) * (bx - cx)
    return abs(z) <= _col_threshold(ax, ay, bx, by, cx, cy)


def check_duplicates(points) -> None:
    pts = as_points(points)
    if len(pts) < 2:
        return
    pairs = cKDTree(pts).query_pairs(TOL_DUP, output_type="ndarray")
    if len(pairs):
        i, j = sorted(pairs[0].tolist())
        raise DuplicatePointError(i, j)


def _left_turn(xs, ys, o, a, b) -> bool:
    # strict: collinear (within tolerance) counts as not-a-turn
    ox, oy, ax, ay, bx, by = xs[o], ys[o], xs[a], ys[a], xs[b], ys[b]
    z = (ax - ox) * (by - ay) - (ay - oy) * (bx - ax)
    return z > _col_threshold(ox, oy, ax, ay, bx, by)


def _prefilter(xs, ys, idx):
    """Drop points strictly inside the polygon of the eight extreme points."""
    px, py = xs[idx], ys[idx]
    s, d = px + py, px - py
    cand = [np.argmax(px), np.argmax(s), np.argmax(py), np.argmin(d),
            np.argmin(px), np.argmin(s), np.argmin(py), np.argmax(d)]
    poly = []
    for k in cand:
        if not poly or (k != poly[-1] and k != poly[0]):
            poly.append(int(k))
    if len(poly) < 3:
        return idx
    inside = np.ones(len(idx), dtype=bool)
    span = max(float(px.max() - px.min()), float(py.max() - py.min()), 1.0)
    for a, b in zip(poly, poly[1:] + poly[:1]):
        ex, ey = px[b] - px[a], py[b] - py[a]
        z = ex * (py - py[a]) - ey * (px - px[a])
        margin = 1e3 * TOL_COL * max(1.0, math.hypot(ex, ey) * span)
        inside &= z > margin
    return idx[~inside]


def _chain(xs, ys, idx):
    """Monotone-chain hull over ``idx`` pre-sorted by (x, y); CCW from min-x."""
    if len(idx) > _PREFILTER_MIN:
        idx = _prefilter(xs, ys, idx)
    order = idx.tolist()
    if len(order) < 3:
        return order
    lower: list[int] = []
    for p in order:
        while len(lower) >= 2 and not _left_turn(xs, ys, lower[-2], lower[-1], p):
            lower.pop()
        lower.append(p)
    upper: list[int] = []
    for p in reversed(order):
        while len(upper) >= 2 and not _left_turn(xs, ys, upper[-2], upper[-1], p):
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        hull = hull[:1]
    return hull


def _anchor_first(xs, ys, hull):
    if len(hull) < 2:
        return hull
    k = min(range(len(hull)), key=lambda i: (ys[hull[i]], xs[hull[i]]))
    return hull[k:] + hull[:k]


def _lex_order(pts):
    return np.lexsort((pts[:, 1], pts[:, 0]))


def convex_hull(points) -> list[int]:
    """Indices of the hull vertices, counterclockwise.

    Starts at the lowest point (lowest x on ties). Points lying on an edge
    are not vertices and are left out. Raises :class:`DuplicatePointError`
    on coincident inputs.
    """
    pts = as_points(points)
    check_duplicates(pts)
    xs, ys = pts[:, 0].copy(), pts[:, 1].copy()
    return _anchor_first(xs, ys, _chain(xs, ys, _lex_order(pts)))


def _line_order(xs, ys, idx):
    """Order (near-)collinear points along their common line."""
    idx = np.asarray(idx)
    hull = _anchor_first(xs, ys, _chain(xs, ys, idx))
    a = hull[0]
    b = hull[-1] if len(hull) > 1 else int(idx[-1])
    ux, uy = xs[b] - xs[a], ys[b] - ys[a]
    t = (xs[idx] - xs[a]) * ux + (ys[idx] - ys[a]) * uy
    return idx[np.argsort(t, kind="stable")]


def convex_layers(points) -> ConvexLayerSet:
    """Peel convex hulls until at most two points, or a collinear rest, remain."""
    pts = as_points(points)
    n = len(pts)
    if n == 0:
        raise GeometryError("need at least one point")
    check_duplicates(pts)
    xs, ys = pts[:, 0].copy(), pts[:, 1].copy()
    remaining = _lex_order(pts)
    layers: list[np.ndarray] = []
    collinear_tail = False
    while len(remaining) > 2:
        hull = _chain(xs, ys, remaining)
        if len(hull) < 3:
            layers.append(_line_order(xs, ys, remaining))
            collinear_tail = True
            remaining = remaining[:0]
            break
        layers.append(np.asarray(_anchor_first(xs, ys, hull), dtype=np.intp))
        keep = np.ones(n, dtype=bool)
        keep[hull] = False
        remaining = remaining[keep[remaining]]
    if len(remaining) == 2:
        layers.append(_line_order(xs, ys, remaining))
        collinear_tail = True
    elif len(remaining) == 1:
        layers.append(remaining.astype(np.intp))
    layer_of = np.empty(n, dtype=np.intp)
    for m, layer in enumerate(layers):
        layer_of[layer] = m
    return ConvexLayerSet(layers, layer_of, collinear_tail)


def polygon_interior_angle(prev, v, nxt) -> float:
    """Interior angle at ``v`` of a counterclockwise convex polygon."""
    a = np.asarray(prev, float) - v
    b = np.asarray(nxt, float) - v
    return math.atan2(abs(a[0] * b[1] - a[1] * b[0]), float(a @ b))


def point_in_convex_polygon(q, polygon, strict: bool = True) -> bool:
    """Containment test against a CCW convex polygon given as an (k, 2) array."""
    poly = np.asarray(polygon, float)
    q = np.asarray(q, float)
    nxt = np.roll(poly, -1, axis=0)
    e = nxt - poly
    z = e[:, 0] * (q[1] - poly[:, 1]) - e[:, 1] * (q[0] - poly[:, 0])
    return bool(np.all(z > 0)) if strict else bool(np.all(z >= 0))
