import math

import numpy as np
import pytest

from circdist.geometry import Circle, convex_layers, polygon_interior_angle, wrap_2pi
from circdist.search_space import (ApexOutsideCircleError, ArcKind, SearchSpace, SpaceKind,
                                   build_search_space, build_search_spaces, intersect_with_circle,
                                   ray_circle_angle)


def test_square_corner_cone():
    pts = np.array([(0, 0), (1, 0), (1, 1), (0, 1)], float)
    L = convex_layers(pts)
    ss = build_search_space(0, L, pts)
    assert ss.kind is SpaceKind.CONE
    assert {round(ss.alpha_o, 12), round(ss.alpha_f, 12)} == {round(math.pi, 12), round(1.5 * math.pi, 12)}
    assert ss.alpha_o == pytest.approx(math.pi) and ss.width == pytest.approx(math.pi / 2)


def test_single_point_is_full():
    pts = np.array([(0, 0), (4, 0), (4, 4), (0, 4), (2, 2)], float)
    ss = build_search_space(4, convex_layers(pts), pts)
    assert ss.kind is SpaceKind.FULL and ss.width == pytest.approx(2 * math.pi)


def test_collinear_tail_kinds():
    pts = np.array([(-10, -10), (10, -10), (10, 10), (-10, 10), (-1, 0), (0, 0), (1, 0)], float)
    L = convex_layers(pts)
    mid = build_search_space(5, L, pts)
    assert mid.kind is SpaceKind.LINE
    dirs = sorted([wrap_2pi(mid.alpha_o), wrap_2pi(mid.alpha_o + math.pi)])
    assert dirs == pytest.approx([math.pi / 2, 3 * math.pi / 2])
    left, right = build_search_space(4, L, pts), build_search_space(6, L, pts)
    assert left.kind is right.kind is SpaceKind.HALF_PLANE
    # the half-planes open away from the other points
    assert left.contains_direction(math.pi) and not left.contains_direction(0.0)
    assert right.contains_direction(0.0) and not right.contains_direction(math.pi)


def test_two_point_tail_half_planes():
    pts = np.array([(-10, -10), (10, -10), (10, 10), (-10, 10), (-1, 0.5), (1, -0.5)], float)
    L = convex_layers(pts)
    a, b = build_search_space(4, L, pts), build_search_space(5, L, pts)
    assert a.kind is b.kind is SpaceKind.HALF_PLANE
    away_a = math.atan2(*(pts[4] - pts[5])[::-1])
    away_b = math.atan2(*(pts[5] - pts[4])[::-1])
    assert a.contains_direction(away_a) and b.contains_direction(away_b)
    assert not a.contains_direction(away_b)


def test_cone_width_is_pi_minus_interior_angle(rng):
    for _ in range(50):
        pts = rng.uniform(-5, 5, size=(30, 2))
        L = convex_layers(pts)
        for layer in L.layers:
            if len(layer) < 3:
                continue
            total = 0.0
            for k, i in enumerate(layer):
                ss = build_search_space(int(i), L, pts)
                assert ss.kind is SpaceKind.CONE and 0 < ss.width < math.pi
                ang = polygon_interior_angle(pts[layer[k - 1]], pts[i], pts[layer[(k + 1) % len(layer)]])
                assert ss.width + ang == pytest.approx(math.pi, abs=1e-9)
                total += ss.width
            assert total == pytest.approx(2 * math.pi, abs=1e-8)


def test_cone_from_centre():
    c = Circle((0, 0), 2.0)
    arc = intersect_with_circle(SearchSpace((0.0, 0.0), SpaceKind.CONE, wrap_2pi(-math.pi / 4), math.pi / 4), c)
    assert arc.kind is ArcKind.ARC
    assert arc.phi_o == pytest.approx(7 * math.pi / 4) and arc.phi_f == pytest.approx(math.pi / 4)


def test_arc_endpoints_match_ray_sampling():
    c = Circle((0, 0), 2.0)
    ss = SearchSpace((1.0, 0.0), SpaceKind.CONE, math.pi / 3, 2 * math.pi / 3)
    arc = intersect_with_circle(ss, c)
    th = np.linspace(math.pi / 3, 2 * math.pi / 3, 10_000)
    hits = ray_circle_angle(ss.apex, th, c)
    assert hits.min() == pytest.approx(arc.phi_o, abs=1e-9)
    assert hits.max() == pytest.approx(arc.phi_f, abs=1e-9)
    # closed form check of one endpoint: |p + t d| = R
    d = np.array([math.cos(math.pi / 3), math.sin(math.pi / 3)])
    t = -d[0] + math.sqrt(d[0] ** 2 + 3.0)
    hit = np.array([1.0, 0.0]) + t * d
    assert math.atan2(hit[1], hit[0]) == pytest.approx(arc.phi_o)


def test_arc_points_map_back_into_cone(rng):
    for _ in range(200):
        c = Circle(tuple(rng.uniform(-1, 1, 2)), rng.uniform(3, 6))
        apex = np.array(c.center) + rng.uniform(-1.5, 1.5, 2)
        a0 = rng.uniform(0, 2 * math.pi)
        ss = SearchSpace(tuple(apex), SpaceKind.CONE, a0, wrap_2pi(a0 + rng.uniform(0.05, 3.0)))
        arc = intersect_with_circle(ss, c)
        u = rng.uniform(0, arc.width, 50)
        g = c.point_at(arc.phi_o + u)
        dirs = np.arctan2(g[:, 1] - apex[1], g[:, 0] - apex[0])
        assert all(ss.contains_direction(d, 1e-9) for d in dirs)


def test_full_and_line_intersections():
    c = Circle((0, 0), 3.0)
    full = intersect_with_circle(SearchSpace((0.5, 0.5), SpaceKind.FULL, 0.0, 2 * math.pi), c)
    assert full.kind is ArcKind.FULL_CIRCLE
    pair = intersect_with_circle(SearchSpace((1.0, 0.0), SpaceKind.LINE, math.pi / 2, 3 * math.pi / 2), c)
    assert pair.kind is ArcKind.POINT_PAIR
    pts = pair.endpoints
    np.testing.assert_allclose(pts[:, 0], [1.0, 1.0], atol=1e-12)
    assert sorted(pts[:, 1]) == pytest.approx([-math.sqrt(8), math.sqrt(8)])


def test_apex_on_circle_rejected():
    with pytest.raises(ApexOutsideCircleError):
        intersect_with_circle(SearchSpace((2.0, 0.0), SpaceKind.FULL, 0.0, 2 * math.pi), Circle((0, 0), 2.0))


def test_arc_across_seam():
    c = Circle((0, 0), 1.0)
    arc = intersect_with_circle(SearchSpace((0.0, 0.0), SpaceKind.CONE, 6.0, 0.5), c)
    assert arc.width == pytest.approx(0.5 + 2 * math.pi - 6.0)
    assert arc.contains(0.0) and arc.contains(6.1) and not arc.contains(3.0)
    assert arc.local(0.0) == pytest.approx(2 * math.pi - 6.0)


def test_cone_points_closest_to_vertex(rng):
    # points in a vertex cone are closer to that vertex than to anything in the polygon
    for _ in range(100):
        pts = rng.uniform(-5, 5, size=(12, 2))
        L = convex_layers(pts)
        layer = L.layers[0]
        poly = pts[layer]
        spaces = build_search_spaces(L, pts)
        w = rng.dirichlet(np.ones(len(poly)), size=200)
        inner = np.vstack([w @ poly, poly])
        for i in layer:
            ss = spaces[i]
            th = ss.alpha_o + rng.uniform(0, ss.width, 100)
            rad = rng.uniform(1e-3, 20.0, 100)
            p = pts[i] + rad[:, None] * np.stack([np.cos(th), np.sin(th)], axis=1)
            dv = np.hypot(*(p - pts[i]).T)
            others = inner[np.hypot(*(inner - pts[i]).T) > 1e-12]
            dc = np.hypot(p[:, None, 0] - others[None, :, 0], p[:, None, 1] - others[None, :, 1]).min(axis=1)
            assert np.all(dv < dc)

