import math

import numpy as np
import pytest


def extreme_points(pts, idx=None):
    """Brute-force vertex test: a point is a hull vertex iff the directions to
    all other points leave an angular gap wider than pi."""
    pts = np.asarray(pts, float)
    idx = np.arange(len(pts)) if idx is None else np.asarray(idx)
    out = []
    for i in idx:
        others = [j for j in idx if j != i]
        if not others:
            out.append(int(i))
            continue
        d = pts[others] - pts[i]
        ang = np.sort(np.arctan2(d[:, 1], d[:, 0]))
        gaps = np.diff(np.concatenate([ang, ang[:1] + 2 * math.pi]))
        if gaps.max() > math.pi + 1e-9:
            out.append(int(i))
    return out


def naive_layers(pts):
    """Peel brute-force hulls until at most two, or only collinear, points remain."""
    remaining = list(range(len(pts)))
    layers = []
    while len(remaining) > 2:
        ext = extreme_points(pts, remaining)
        if len(ext) < 3:
            break
        layers.append(set(ext))
        remaining = [i for i in remaining if i not in ext]
    if remaining:
        layers.append(set(remaining))
    return layers


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
