"""Random scenario generation and batch studies."""
from __future__ import annotations

import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import quadrotor as quad
from .assignment import DELTA_DISC, DELTA_POINT, assign_all, audit
from .evaluation import MonteCarloReport, TrialMetrics, aggregate, metric_M, metric_S
from .kinematics import (Scenario, motion, detect_conflicts, perturb_positions, sample_delays,
                         simulate_dynamics)
from .rng import stream

MAX_REJECTIONS = 1_000_000


class PackingError(RuntimeError):
    pass


@dataclass(frozen=True)
class StudySpec:
    n: int
    R_c: float
    trials: int
    min_separation: float = 0.0
    agent_model: str = "point"          # "point" or "disc"
    d_s: float = 0.0
    dynamics: bool = False
    delta_u: float = 0.0
    delta_td: float = 0.0
    seed: int = 0
    region: str = "disc"                # "disc" of radius R_c or "square" [-R_c, R_c]^2
    delta: float | None = None          # None: 0.2 for points, 0.5 for discs
    speed: float = 0.5
    dt: float = 0.01
    margin: float = 0.05
    heterogeneity: str = "correlated"

    def validate(self) -> "StudySpec":
        if self.n < 1 or self.trials < 1:
            raise ValueError("n and trials must be at least 1")
        if self.R_c <= 0:
            raise ValueError("R_c must be positive")
        if min(self.min_separation, self.d_s, self.delta_u, self.delta_td) < 0:
            raise ValueError("separations, d_s and noise levels must be non-negative")
        if self.agent_model not in ("point", "disc"):
            raise ValueError(f"unknown agent model {self.agent_model!r}")
        if self.region not in ("disc", "square"):
            raise ValueError(f"unknown region {self.region!r}")
        if self.heterogeneity not in ("correlated", "independent", "none"):
            raise ValueError(f"unknown heterogeneity mode {self.heterogeneity!r}")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        area = math.pi * self.R_c ** 2 if self.region == "disc" else 4 * self.R_c ** 2
        if self.n * math.pi * (self.min_separation / 2) ** 2 * 2 > area:
            raise PackingError(f"{self.n} agents {self.min_separation} m apart do not fit with 2x area margin")
        return self

    @property
    def delta_value(self) -> float:
        if self.delta is not None:
            return self.delta
        return DELTA_DISC if self.agent_model == "disc" else DELTA_POINT

    @property
    def safety(self) -> float:
        return self.d_s if self.agent_model == "disc" else 0.0

    def descriptor(self) -> dict:
        return asdict(self)


def _draw(rng, k, R, region):
    if region == "square":
        return rng.uniform(-R, R, size=(k, 2))
    r = R * np.sqrt(rng.uniform(size=k))
    th = rng.uniform(0.0, 2 * math.pi, size=k)
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=1)


def sample_positions(n: int, R: float, min_separation: float, rng: np.random.Generator,
                     region: str = "disc") -> np.ndarray:
    """Uniform positions, rejecting any closer than ``min_separation`` to one already placed."""
    if min_separation <= 0:
        return _draw(rng, n, R, region)
    cell = min_separation
    grid: dict[tuple[int, int], list[int]] = {}
    out = np.empty((n, 2))
    placed = rejected = 0
    while placed < n:
        batch = _draw(rng, 64, R, region)
        for p in batch:
            if placed == n:
                break
            cx, cy = int(math.floor(p[0] / cell)), int(math.floor(p[1] / cell))
            ok = True
            for gx in (cx - 1, cx, cx + 1):
                for gy in (cy - 1, cy, cy + 1):
                    for j in grid.get((gx, gy), ()):
                        if math.hypot(out[j, 0] - p[0], out[j, 1] - p[1]) < min_separation:
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
            if ok:
                out[placed] = p
                grid.setdefault((cx, cy), []).append(placed)
                placed += 1
            else:
                rejected += 1
                if rejected >= MAX_REJECTIONS:
                    raise PackingError(f"gave up after {MAX_REJECTIONS} rejections with {placed} of {n} placed")
    return out


def sample_scenario(spec: StudySpec, trial: int) -> Scenario:
    from .fileio import enclosing_circle
    pts = sample_positions(spec.n, spec.R_c, spec.min_separation, stream(spec.seed, trial, "positions"),
                           spec.region)
    return Scenario(pts, enclosing_circle(pts, spec.margin), speed=spec.speed, d_s=spec.safety,
                    agent_radius=spec.safety / 2, delta=spec.delta_value, delta_u=spec.delta_u,
                    delta_td=spec.delta_td, seed=spec.seed, dt=spec.dt,
                    min_separation=spec.min_separation, dynamics=spec.dynamics)


def run_trial(spec: StudySpec, trial: int) -> TrialMetrics:
    """One sample-plan-execute-measure cycle; errors become a failed record."""
    try:
        sc = sample_scenario(spec, trial)
        known = perturb_positions(sc.initial_positions, spec.delta_u, stream(spec.seed, trial, "perturbation"))
        t0 = time.perf_counter()
        a = assign_all(known, sc.circle, delta=sc.delta, speed=sc.speed)
        t_assign = time.perf_counter() - t0
        delays = sample_delays(sc.n, spec.delta_td, stream(spec.seed, trial, "delays"))
        start = sc.initial_positions if spec.delta_u > 0 else None
        if spec.dynamics:
            rng = stream(spec.seed, trial, "heterogeneity")
            nominal = quad.QuadrotorParams()
            if spec.heterogeneity == "none":
                params = [nominal] * sc.n
            else:
                params = [quad.sample_heterogeneity(nominal, rng, spec.heterogeneity) for _ in range(sc.n)]
            log = simulate_dynamics(sc, a, delays, start, params, e_trace=False)
            pairs, min_E = log.conflict_pairs, log.min_E
        else:
            pairs, min_E = detect_conflicts(a, sc.d_s, delays, start)
        _, _, t_f = motion(a, start)
        au = audit(a)
        return TrialMetrics(trial=trial, M=metric_M(a), S_m=metric_S(a), n_conflicts=len(pairs),
                            min_E=min_E, max_tf=float((t_f + delays).max()), assign_time=t_assign,
                            audit_violations=au["coincident"] + au["outside_arc"])
    except Exception as e:  # noqa: BLE001 - any failure is recorded against the trial
        return TrialMetrics.failure(trial, f"{type(e).__name__}: {e}")


def _run_chunk(args):
    spec, trials = args
    return [run_trial(spec, t) for t in trials]


def run_trials(spec: StudySpec, jobs: int = 1, progress: bool = False) -> list[TrialMetrics]:
    spec.validate()
    idx = list(range(spec.trials))
    if jobs <= 1:
        out = []
        for t in idx:
            out.append(run_trial(spec, t))
            if progress and (t + 1) % max(1, spec.trials // 10) == 0:
                print(f"  {t + 1}/{spec.trials} trials", file=sys.stderr)
        return out
    size = max(1, math.ceil(len(idx) / (jobs * 4)))
    chunks = [(spec, idx[s:s + size]) for s in range(0, len(idx), size)]
    out = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for k, part in enumerate(pool.map(_run_chunk, chunks)):
            out.extend(part)
            if progress:
                print(f"  {len(out)}/{spec.trials} trials", file=sys.stderr)
    return sorted(out, key=lambda t: t.trial)


def run_study(spec: StudySpec, jobs: int = 1, progress: bool = False) -> MonteCarloReport:
    """Run every trial and fold the results in trial order."""
    return aggregate(run_trials(spec, jobs, progress), spec.descriptor())
