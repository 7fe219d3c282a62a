"""File formats, scenario presets and the enclosing circle.

Scenario and goal files are JSON, time series are CSV. Angles are radians
in [0, 2*pi), lengths are metres, times seconds.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re

import numpy as np

from .assignment import GoalAssignment
from .geometry import Circle, as_points, wrap_2pi
from .kinematics import Scenario

SCHEMA_VERSION = 1
MARGIN = 0.05
HEXAGON_R = 9.4


class ValidationError(ValueError):
    """Bad input file; carries the offending field and, when known, its line."""

    def __init__(self, field: str, message: str, line: int | None = None):
        where = f" (line {line})" if line else ""
        super().__init__(f"{field}: {message}{where}")
        self.field = field
        self.line = line


# ---------------------------------------------------------------- enclosing circle

def _circle2(a, b):
    c = (a + b) / 2.0
    return c, math.hypot(*(a - c))


def _circle3(a, b, c):
    ax, ay = b - a
    bx, by = c - a
    d = 2.0 * (ax * by - ay * bx)
    scale = max(ax * ax + ay * ay, bx * bx + by * by, 1e-300)
    if abs(d) <= 1e-14 * scale:
        # collinear: the two farthest points span the circle
        pairs = [(a, b), (a, c), (b, c)]
        return max((_circle2(p, q) for p, q in pairs), key=lambda t: t[1])
    ux = (by * (ax * ax + ay * ay) - ay * (bx * bx + by * by)) / d
    uy = (ax * (bx * bx + by * by) - bx * (ax * ax + ay * ay)) / d
    center = a + np.array([ux, uy])
    return center, math.hypot(ux, uy)


def minimum_enclosing_circle(points, seed: int = 0) -> tuple[np.ndarray, float]:
    """Welzl's randomised incremental algorithm; deterministic for a fixed seed."""
    pts = as_points(points)
    if len(pts) == 0:
        raise ValueError("need at least one point")
    P = pts[np.random.default_rng(seed).permutation(len(pts))]
    scale = max(1.0, float(np.abs(P).max()))
    eps = 1e-12 * scale

    def outside(p, c, r):
        return math.hypot(p[0] - c[0], p[1] - c[1]) > r + eps

    c, r = P[0].copy(), 0.0
    for i in range(1, len(P)):
        if not outside(P[i], c, r):
            continue
        c, r = P[i].copy(), 0.0
        for j in range(i):
            if not outside(P[j], c, r):
                continue
            c, r = _circle2(P[i], P[j])
            for k in range(j):
                if outside(P[k], c, r):
                    c, r = _circle3(P[i], P[j], P[k])
    return np.asarray(c, float), float(r)


def enclosing_circle(points, margin: float = MARGIN) -> Circle:
    """Minimum enclosing circle grown by ``1 + margin`` so every point is interior.

    A single point gets radius ``margin``.
    """
    c, r = minimum_enclosing_circle(points)
    R = r * (1.0 + margin) if r > 0 else margin
    return Circle((float(c[0]), float(c[1])), R)


# ---------------------------------------------------------------- presets

def hexagon_perimeter(side: float, count: int) -> np.ndarray:
    """``count`` points evenly spaced by arc length, from the rightmost vertex, CCW."""
    verts = side * np.stack([np.cos(np.arange(7) * np.pi / 3), np.sin(np.arange(7) * np.pi / 3)], axis=1)
    s = np.arange(count) * 6.0 * side / count
    k = np.minimum((s // side).astype(int), 5)
    f = (s - k * side) / side
    return verts[k] + f[:, None] * (verts[k + 1] - verts[k])


def hexagon_example2() -> np.ndarray:
    seg = np.stack([np.linspace(-2.9, 2.9, 6), np.zeros(6)], axis=1)
    return np.vstack([hexagon_perimeter(8.0, 24), hexagon_perimeter(6.0, 24), seg])


def generate_preset(name: str, n: int = 20, R_c: float = 4.0, min_separation: float = 0.0,
                    region: str = "disc", seed: int = 0) -> Scenario:
    if name == "hexagon_example2":
        return Scenario(hexagon_example2(), Circle((0.0, 0.0), HEXAGON_R), seed=seed)
    if name == "random_disc":
        from .montecarlo import sample_positions
        from .rng import stream
        pts = sample_positions(n, R_c, min_separation, stream(seed, 0, "positions"), region)
        return Scenario(pts, enclosing_circle(pts), min_separation=min_separation, seed=seed)
    raise ValidationError("preset", f"unknown preset {name!r}")


# ---------------------------------------------------------------- scenario JSON

def _line_of(text: str, key: str, nth: int = 0) -> int | None:
    hits = [m.start() for m in re.finditer(r'"%s"\s*:' % re.escape(key), text)]
    if nth < len(hits):
        return text.count("\n", 0, hits[nth]) + 1
    return None


def _number(obj: dict, key: str, text: str, nth: int = 0, default=None, where: str = "") -> float:
    name = f"{where}{key}"
    if key not in obj:
        if default is None:
            raise ValidationError(name, "missing")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ValidationError(name, f"expected a finite number, got {v!r}", _line_of(text, key, nth))
    return float(v)


PARAM_DEFAULTS = {"v": 0.5, "delta": 0.2, "d_s": 0.0, "delta_u": 0.0, "delta_td": 0.0, "dt": 0.01,
                  "agent_radius": 0.0, "min_separation": 0.0}


def scenario_from_dict(doc: dict, text: str = "") -> Scenario:
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "expected a JSON object", 1)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError("schema_version", f"must be {SCHEMA_VERSION}", _line_of(text, "schema_version"))
    agents = doc.get("agents")
    if not isinstance(agents, list) or not agents:
        raise ValidationError("agents", "expected a non-empty list", _line_of(text, "agents"))
    ids, pts = [], []
    for k, a in enumerate(agents):
        if not isinstance(a, dict):
            raise ValidationError(f"agents[{k}]", "expected an object", _line_of(text, "agents"))
        ids.append(a.get("id", k))
        pts.append((_number(a, "x", text, k, where=f"agents[{k}]."), _number(a, "y", text, k, where=f"agents[{k}].")))
    if len(set(map(str, ids))) != len(ids):
        raise ValidationError("agents.id", "ids must be unique", _line_of(text, "id"))
    params = doc.get("parameters", {})
    if not isinstance(params, dict):
        raise ValidationError("parameters", "expected an object", _line_of(text, "parameters"))
    p = {k: _number(params, k, text, default=d, where="parameters.") for k, d in PARAM_DEFAULTS.items()}
    dyn = params.get("dynamics", False)
    if not isinstance(dyn, bool):
        raise ValidationError("parameters.dynamics", "expected true or false", _line_of(text, "dynamics"))
    quad = params.get("quadrotor", {})
    if not isinstance(quad, dict):
        raise ValidationError("parameters.quadrotor", "expected an object", _line_of(text, "quadrotor"))
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ValidationError("seed", "expected a non-negative integer", _line_of(text, "seed"))
    pts = np.array(pts, float)
    if "circle" in doc and doc["circle"] is not None:
        c = doc["circle"]
        if not isinstance(c, dict):
            raise ValidationError("circle", "expected an object", _line_of(text, "circle"))
        R = _number(c, "R", text, where="circle.")
        if R <= 0:
            raise ValidationError("circle.R", "must be positive", _line_of(text, "R"))
        circle = Circle((_number(c, "cx", text, where="circle."), _number(c, "cy", text, where="circle.")), R)
        inside = circle.contains_strictly(pts)
        if not inside.all():
            k = int(np.flatnonzero(~inside)[0])
            raise ValidationError(f"agents[{k}]", "not strictly inside the circle", _line_of(text, "x", k))
    else:
        circle = enclosing_circle(pts)
    return Scenario(pts, circle, speed=p["v"], agent_radius=p["agent_radius"], d_s=p["d_s"],
                    delta=p["delta"], delta_u=p["delta_u"], delta_td=p["delta_td"], seed=seed,
                    dt=p["dt"], min_separation=p["min_separation"], dynamics=dyn, ids=ids,
                    quad_overrides=dict(quad))


def scenario_to_dict(sc: Scenario, include_circle: bool = True) -> dict:
    ids = sc.ids if sc.ids is not None else list(range(sc.n))
    doc = {
        "schema_version": SCHEMA_VERSION,
        "agents": [{"id": i, "x": float(x), "y": float(y)} for i, (x, y) in zip(ids, sc.initial_positions)],
        "parameters": {"v": sc.speed, "delta": sc.delta, "d_s": sc.d_s, "delta_u": sc.delta_u,
                       "delta_td": sc.delta_td, "dt": sc.dt, "agent_radius": sc.agent_radius,
                       "min_separation": sc.min_separation, "dynamics": sc.dynamics},
        "seed": sc.seed,
    }
    if sc.quad_overrides:
        doc["parameters"]["quadrotor"] = dict(sc.quad_overrides)
    if include_circle:
        doc["circle"] = {"cx": sc.circle.center[0], "cy": sc.circle.center[1], "R": sc.circle.radius}
    return doc


def loads_json(text: str, what: str = "file"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(what, f"malformed JSON: {e.msg}", e.lineno) from None


def read_scenario(text: str) -> Scenario:
    return scenario_from_dict(loads_json(text, "scenario"), text)


def write_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2) + "\n"


# ---------------------------------------------------------------- goals JSON

def goals_to_dict(a: GoalAssignment, ids=None) -> dict:
    ids = list(range(a.n)) if ids is None else list(ids)
    return {
        "schema_version": SCHEMA_VERSION,
        "circle": {"cx": a.circle.center[0], "cy": a.circle.center[1], "R": a.circle.radius},
        "speed": a.speed,
        "delta": a.delta,
        "agents": [
            {"id": ids[i], "x0": float(a.positions[i, 0]), "y0": float(a.positions[i, 1]),
             "gx": float(a.goals[i, 0]), "gy": float(a.goals[i, 1]),
             "goal_phi": float(wrap_2pi(a.goal_phi[i])), "psi": float(wrap_2pi(a.psi[i])),
             "t_f": float(a.t_f[i]), "layer": int(a.layer_of[i]), "was_modified": bool(a.was_modified[i])}
            for i in range(a.n)],
    }


def goals_from_dict(doc: dict) -> tuple[GoalAssignment, list]:
    """Rebuild an assignment (without arcs) from a goals file, enough to replay motion."""
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError("schema_version", f"must be {SCHEMA_VERSION}")
    try:
        c = doc["circle"]
        rows = doc["agents"]
        circle = Circle((c["cx"], c["cy"]), c["R"])
        col = lambda k, t=float: np.array([t(r[k]) for r in rows])  # noqa: E731
        a = GoalAssignment(
            positions=np.stack([col("x0"), col("y0")], axis=1), circle=circle,
            goals=np.stack([col("gx"), col("gy")], axis=1), goal_phi=col("goal_phi"),
            psi=col("psi"), t_f=col("t_f"), was_modified=col("was_modified", bool),
            nominal_phi=col("goal_phi"), layer_of=col("layer", int),
            speed=float(doc["speed"]), delta=float(doc["delta"]))
    except (KeyError, TypeError) as e:
        raise ValidationError(str(e).strip("'"), "missing or malformed") from None
    return a, [r.get("id", k) for k, r in enumerate(rows)]


def write_goals(a: GoalAssignment, ids=None) -> str:
    return json.dumps(goals_to_dict(a, ids), indent=2) + "\n"


def read_goals(text: str):
    return goals_from_dict(loads_json(text, "goals"))


# ---------------------------------------------------------------- CSV time series

def write_trajectory_csv(times, frames, ids=None) -> str:
    frames = np.asarray(frames, float)
    ids = list(range(frames.shape[1])) if ids is None else list(ids)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "agent_id", "x", "y"])
    for k, t in enumerate(np.asarray(times, float).tolist()):
        for i, aid in enumerate(ids):
            w.writerow([repr(t), aid, repr(float(frames[k, i, 0])), repr(float(frames[k, i, 1]))])
    return buf.getvalue()


def read_trajectory_csv(text: str):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["t", "agent_id", "x", "y"]:
        raise ValidationError("header", "expected t,agent_id,x,y", 1)
    times, ids, data = [], [], {}
    for ln, r in enumerate(rows[1:], start=2):
        try:
            t, aid, x, y = float(r[0]), r[1], float(r[2]), float(r[3])
        except (ValueError, IndexError):
            raise ValidationError("row", "expected four fields t,agent_id,x,y", ln) from None
        if not times or times[-1] != t:
            times.append(t)
        if aid not in data:
            ids.append(aid)
            data[aid] = []
        data[aid].append((x, y))
    frames = np.stack([np.array(data[a]) for a in ids], axis=1)
    return np.array(times), frames, ids


def write_etrace_csv(times, E) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "E"])
    for t, e in zip(np.asarray(times, float).tolist(), np.asarray(E, float).tolist()):
        w.writerow([repr(t), repr(e)])
    return buf.getvalue()


def read_etrace_csv(text: str):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["t", "E"]:
        raise ValidationError("header", "expected t,E", 1)
    try:
        arr = np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)
    except ValueError:
        raise ValidationError("row", "expected two numeric fields") from None
    return arr[:, 0], arr[:, 1]


# ---------------------------------------------------------------- reports

REPORT_COLUMNS = ["n", "R_c", "region", "agent_model", "d_s", "dynamics", "delta_u", "delta_td",
                  "trials", "failed", "P_col", "mu_col", "sigma_col", "N_max_col", "S_m_avg"]


def write_report(report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"


def read_report(text: str):
    from .evaluation import MonteCarloReport
    return MonteCarloReport(**loads_json(text, "report"))


def report_csv_row(report, header: bool = True) -> str:
    d = {**report.descriptor, **report.to_dict()}
    buf = io.StringIO()
    w = csv.DictWriter(buf, REPORT_COLUMNS, extrasaction="ignore", lineterminator="\n")
    if header:
        w.writeheader()
    w.writerow({k: d.get(k, "") for k in REPORT_COLUMNS})
    return buf.getvalue()


def read_study_spec(text: str):
    from .montecarlo import StudySpec
    doc = loads_json(text, "study")
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "expected a JSON object", 1)
    known = set(StudySpec.__dataclass_fields__)
    for k in doc:
        if k not in known:
            raise ValidationError(k, "unknown field", _line_of(text, k))
    for k in ("n", "R_c", "trials"):
        if k not in doc:
            raise ValidationError(k, "missing")
    try:
        return StudySpec(**doc).validate()
    except (TypeError, ValueError) as e:
        raise ValidationError("study", str(e)) from None


def write_study_spec(spec) -> str:
    from dataclasses import asdict
    return json.dumps(asdict(spec), indent=2) + "\n"
