"""Path-length metrics and Monte Carlo conflict statistics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .assignment import GoalAssignment

BOUNDARY_GUARD = 1e-9


class MetricError(ValueError):
    pass


def _shortfall(assignment: GoalAssignment) -> np.ndarray:
    """Distance from each start to the circle along its own radius."""
    d = assignment.positions - assignment.circle.c
    gap = assignment.circle.radius - np.hypot(d[:, 0], d[:, 1])
    if np.any(gap <= BOUNDARY_GUARD):
        k = int(np.flatnonzero(gap <= BOUNDARY_GUARD)[0])
        raise MetricError(f"agent {k} is on or outside the boundary")
    return gap


def metric_M(assignment: GoalAssignment, agent=None):
    """Path length over the radial (shortest) distance to the circle.

    Equals 1 for a radial goal and is never below it. Returns all agents
    when ``agent`` is None.
    """
    m = assignment.path_lengths / _shortfall(assignment)
    return m if agent is None else float(m[agent])


def metric_S(assignment: GoalAssignment) -> float:
    """Relative excess of the summed path lengths over the summed radial distances."""
    return float(assignment.path_lengths.sum() / _shortfall(assignment).sum() - 1.0)


@dataclass
class TrialMetrics:
    trial: int
    M: np.ndarray = field(repr=False)
    S_m: float
    n_conflicts: int
    min_E: float
    max_tf: float
    assign_time: float
    audit_violations: int = 0
    failed: bool = False
    error: str = ""

    @classmethod
    def failure(cls, trial: int, error: str) -> "TrialMetrics":
        return cls(trial, np.empty(0), math.nan, 0, math.nan, math.nan, math.nan, 0, True, error)


@dataclass
class MonteCarloReport:
    P_col: float
    mu_col: float
    sigma_col: float
    N_max_col: int
    S_m_avg: float
    trials: int
    failed: int = 0
    M_mean: float = math.nan
    M_std: float = math.nan
    S_m_below_5pct: int = 0
    min_E: float = math.nan
    descriptor: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def aggregate(trials: list[TrialMetrics], descriptor: dict | None = None) -> MonteCarloReport:
    """Fold per-trial results into the conflict statistics.

    Mean, population standard deviation and maximum of the conflict count
    are taken over conflicted trials only and are all zero when there are
    none. Failed trials are counted but excluded. Wall-clock timings stay
    in the per-trial records so the report is a pure function of the inputs.
    """
    if not trials:
        raise ValueError("need at least one trial")
    ok = sorted((t for t in trials if not t.failed), key=lambda t: t.trial)
    failed = len(trials) - len(ok)
    desc = dict(descriptor or {})
    if not ok:
        return MonteCarloReport(0.0, 0.0, 0.0, 0, math.nan, 0, failed, descriptor=desc)
    counts = np.array([t.n_conflicts for t in ok])
    col = counts[counts > 0]
    if len(col):
        mu, sigma, nmax = float(col.mean()), float(col.std()), int(col.max())
    else:
        mu = sigma = 0.0
        nmax = 0
    S = np.array([t.S_m for t in ok])
    M = np.concatenate([t.M for t in ok])
    return MonteCarloReport(
        P_col=len(col) / len(ok), mu_col=mu, sigma_col=sigma, N_max_col=nmax,
        S_m_avg=float(S.mean()), trials=len(ok), failed=failed,
        M_mean=float(M.mean()), M_std=float(M.std()),
        S_m_below_5pct=int(np.sum(S <= 0.05)),
        min_E=float(min(t.min_E for t in ok)),
        descriptor=desc)
