"""Command-line entry point: ``circdist {generate,assign,simulate,montecarlo}``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import fileio, quadrotor as quad
from .assignment import audit
from .evaluation import metric_M, metric_S
from .geometry import GeometryError
from .kinematics import ScenarioError, perturb_positions, plan, sample_delays, simulate, simulate_dynamics
from .montecarlo import PackingError, run_study
from .rng import stream

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def _load_scenario(args):
    sc = fileio.read_scenario(_read(args.scenario))
    if args.seed is not None:
        sc.seed = args.seed
    return sc.validate()


def cmd_generate(args) -> int:
    sc = fileio.generate_preset(args.preset, n=args.n, R_c=args.R_c, min_separation=args.min_separation,
                                region=args.region, seed=args.seed or 0)
    _write(args.output, fileio.write_scenario(sc))
    return EXIT_OK


def cmd_assign(args) -> int:
    sc = _load_scenario(args)
    a = plan(sc)
    _write(args.output, fileio.write_goals(a, sc.ids))
    au = audit(a)
    M = metric_M(a)
    print(f"{a.n} goals, {au['coincident']} coincident, {au['outside_arc']} off-arc; "
          f"max t_f {a.t_f.max():.3f} s, mean M {M.mean():.4f}, S_m {100 * metric_S(a):.2f} %",
          file=sys.stderr)
    return EXIT_OK


def _quad_setup(sc, rng):
    ov = dict(sc.quad_overrides)
    gains = quad.ControllerGains(**{k: tuple(ov.pop(k)) for k in ("K_P", "K_D", "K_Ptau", "K_Dtau") if k in ov})
    mode = ov.pop("heterogeneity", "none")
    nominal = quad.QuadrotorParams(**{k: (tuple(v) if k == "J" else v) for k, v in ov.items()})
    if mode == "none":
        return [nominal] * sc.n, gains
    return [quad.sample_heterogeneity(nominal, rng, mode) for _ in range(sc.n)], gains


def cmd_simulate(args) -> int:
    sc = _load_scenario(args)
    if args.dynamics:
        sc = replace(sc, dynamics=True)
    known = perturb_positions(sc.initial_positions, sc.delta_u, stream(sc.seed, 0, "perturbation"))
    a = plan(sc, known)
    delays = sample_delays(sc.n, sc.delta_td, stream(sc.seed, 0, "delays"))
    start = sc.initial_positions if sc.delta_u > 0 else None
    if sc.dynamics:
        params, gains = _quad_setup(sc, stream(sc.seed, 0, "heterogeneity"))
        log = simulate_dynamics(sc, a, delays, start, params, gains)
    else:
        log = simulate(sc, a, delays, start)
    if args.traj:
        _write(args.traj, fileio.write_trajectory_csv(log.times, log.positions, sc.ids))
    if args.etrace:
        _write(args.etrace, fileio.write_etrace_csv(log.times, log.E_trace))
    summary = {"n": sc.n, "conflicts": [list(p) for p in log.conflict_pairs],
               "min_E": log.min_E, "min_pair_distance": log.min_pair_distance,
               "t_end": float(log.times[-1]), "S_m": metric_S(a)}
    _write(args.output, json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    spec = fileio.read_study_spec(_read(args.spec))
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    jobs = args.jobs or int(os.environ.get("CIRCDIST_JOBS", "1"))
    report = run_study(spec, jobs=jobs, progress=True)
    _write(args.output, fileio.write_report(report))
    if args.csv:
        _write(args.csv, fileio.report_csv_row(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="circdist", description="Conflict-free goal assignment on a circle.")
    p.add_argument("--seed", type=int, default=None, help="override the seed stored in input files")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a preset scenario")
    g.add_argument("--preset", required=True, choices=["hexagon_example2", "random_disc"])
    g.add_argument("--n", type=int, default=20)
    g.add_argument("--R-c", dest="R_c", type=float, default=4.0)
    g.add_argument("--min-separation", type=float, default=0.0)
    g.add_argument("--region", choices=["disc", "square"], default="disc")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("assign", help="compute goals for a scenario")
    a.add_argument("scenario", help="scenario JSON, or - for stdin")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_assign)

    s = sub.add_parser("simulate", help="execute the plan and check for conflicts")
    s.add_argument("scenario")
    s.add_argument("--dynamics", action="store_true", help="fly the quadrotor model")
    s.add_argument("--traj", help="trajectory CSV output")
    s.add_argument("--etrace", help="minimum-separation CSV output")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("montecarlo", help="run a batch study")
    m.add_argument("--spec", required=True)
    m.add_argument("-o", "--output")
    m.add_argument("--csv")
    m.add_argument("--jobs", type=int, default=None)
    m.set_defaults(func=cmd_montecarlo)
    return p


def _seed_anywhere(argv):
    # accept --seed after the subcommand too
    argv = list(argv)
    for k, tok in enumerate(argv):
        if tok == "--seed" and k + 1 < len(argv):
            return ["--seed", argv[k + 1]] + argv[:k] + argv[k + 2:]
        if tok.startswith("--seed="):
            return [tok] + argv[:k] + argv[k + 1:]
    return argv


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(_seed_anywhere(argv))
    try:
        return args.func(args)
    except (fileio.ValidationError, ScenarioError, GeometryError, PackingError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
