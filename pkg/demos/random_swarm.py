"""A random 20-agent swarm in the [-4, 4] square, planned and flown both ways.

First the ideal constant-speed agents, then the quadrotor model with
start-up delays and position noise. Writes the flown trajectories to
``random_swarm_traj.csv`` for plotting.

    python3 demos/random_swarm.py [seed]
"""
import sys

import numpy as np

from circdist import Scenario, enclosing_circle, metric_S, plan, simulate
from circdist.fileio import write_trajectory_csv
from circdist.kinematics import perturb_positions, sample_delays, simulate_dynamics
from circdist.rng import stream

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 1
rng = np.random.default_rng(seed)
pts = rng.uniform(-4, 4, size=(20, 2))
circle = enclosing_circle(pts)
print(f"circle centre ({circle.center[0]:.2f}, {circle.center[1]:.2f}), R = {circle.radius:.2f} m")

sc = Scenario(pts, circle, seed=seed).validate()
a = plan(sc)
log = simulate(sc, a)
print(f"ideal agents: {a.layers.M} layers, max t_f {a.t_f.max():.2f} s, S_m {100 * metric_S(a):.2f} %, "
      f"min separation {log.min_E:.3f} m")

# same swarm with 20 cm position error and up to 200 ms start-up delay
noisy = Scenario(pts, circle, d_s=0.15, delta=0.5, delta_u=0.2, delta_td=0.2, seed=seed).validate()
known = perturb_positions(pts, 0.2, stream(seed, 0, "perturbation"))
b = plan(noisy, known)
delays = sample_delays(20, 0.2, stream(seed, 0, "delays"))
flown = simulate_dynamics(noisy, b, delays, start=pts)
print(f"quadrotors:   min separation {flown.min_E:.3f} m, conflicts below 0.15 m: {len(flown.conflict_pairs)}")

with open("random_swarm_traj.csv", "w") as f:
    f.write(write_trajectory_csv(flown.times, flown.positions))
print("trajectories written to random_swarm_traj.csv")
