"""Conflict probability of disc agents as the swarm grows.

A small version of the robustness study: disc agents (0.15 m safety
distance) sampled 0.4 m apart in a 40 m disc, with and without position
noise and start-up delays. Kinematic agents only, so it runs in a minute.

    python3 demos/robustness_study.py [trials]
"""
import sys

from circdist import StudySpec, run_study

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 100
rows = [("ideal", {}), ("noise+delay", {"delta_u": 0.2, "delta_td": 0.2})]

print(f"{'n':>4} {'case':>12} {'P_col':>7} {'mu':>5} {'sigma':>6} {'N_max':>5} {'S_m avg':>8}")
for n in (10, 30, 50, 100):
    for name, extra in rows:
        spec = StudySpec(n=n, R_c=40.0, trials=trials, min_separation=0.4, agent_model="disc",
                         d_s=0.15, seed=11, **extra)
        r = run_study(spec)
        print(f"{n:4d} {name:>12} {r.P_col:7.3f} {r.mu_col:5.2f} {r.sigma_col:6.2f} {r.N_max_col:5d} "
              f"{100 * r.S_m_avg:7.2f}%")
