"""Conflict-free distribution of a planar swarm onto a circular boundary."""
from .assignment import GoalAssignment, assign_all, audit
from .evaluation import MonteCarloReport, TrialMetrics, aggregate, metric_M, metric_S
from .fileio import enclosing_circle, generate_preset
from .geometry import Circle, ConvexLayerSet, convex_hull, convex_layers
from .kinematics import Scenario, detect_conflicts, plan, position_at, simulate
from .montecarlo import StudySpec, run_study

__all__ = [
    "Circle", "ConvexLayerSet", "GoalAssignment", "MonteCarloReport", "Scenario", "StudySpec",
    "TrialMetrics", "aggregate", "assign_all", "audit", "convex_hull", "convex_layers",
    "detect_conflicts", "enclosing_circle", "generate_preset", "metric_M", "metric_S", "plan",
    "position_at", "run_study", "simulate",
]
__version__ = "0.1.0"
