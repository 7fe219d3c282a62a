"""Two nested hexagons and a short segment: 54 agents spread onto a 9.4 m circle.

Prints the layer structure, which agents had to yield a goal, and the
path-length metrics. Run from the repository root:

    python3 demos/hexagon_walkthrough.py
"""
import numpy as np

from circdist import assign_all, convex_layers, generate_preset, metric_M, metric_S, plan, simulate

sc = generate_preset("hexagon_example2")
pts = sc.initial_positions
layers = convex_layers(pts)

print(f"{sc.n} agents, circle centre {sc.circle.center}, R = {sc.circle.radius} m")
for m, idx in enumerate(layers.layers):
    kind = "collinear" if layers.is_terminal(m) and layers.is_terminal_collinear else "polygon"
    print(f"  layer {m + 1}: {len(idx):2d} agents ({kind})")

a = assign_all(pts, sc.circle, delta=0.2, speed=0.5, layers=layers)
moved = np.flatnonzero(a.was_modified)
print(f"\n{len(moved)} agents took a shifted goal: {moved.tolist()}")

M = metric_M(a)
print(f"max t_f   {a.t_f.max():.2f} s")
print(f"M mean    {M.mean():.4f}, std {M.std():.4f}, worst {M.max():.3f} (agent {M.argmax()})")
print(f"S_m       {100 * metric_S(a):.2f} %")

# the six segment agents can only leave perpendicular to the segment
seg = layers.layers[-1]
for i in seg:
    print(f"  agent {i:2d} at ({pts[i, 0]:5.2f}, {pts[i, 1]:4.1f}) -> goal ({a.goals[i, 0]:6.2f}, {a.goals[i, 1]:6.2f})")

log = simulate(sc, a)
print(f"\nclosest approach during the manoeuvre: {log.min_E:.3f} m at t = {log.times[np.argmin(log.E_trace)]:.2f} s")
