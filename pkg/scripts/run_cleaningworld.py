#!/usr/bin/env python3
"""Infer specifications from CleaningWorld demonstrations.

`--scale full` uses the 5-dirt robot and the reference sweep that
vacuums twice per charge; `--scale reduced` (default) shrinks the room
to 3 dirt with a 2-cell battery so a complete search finishes in
minutes on a laptop."""

import argparse
import pathlib

from ltlinfer.domains import cleaningworld
from ltlinfer.mdp import Trajectory
from ltlinfer.search import SearchConfig, run_nsga2, write_report_csv

FULL_SWEEP = (
    [
        "d5_b3_undocked_none",
        "d4_b2_undocked_vacuum",
        "d3_b1_undocked_vacuum",
        "d3_b1_docked_dock",
        "d3_b3_docked_wait",
        "d3_b3_undocked_undock",
        "d2_b2_undocked_vacuum",
        "d1_b1_undocked_vacuum",
        "d1_b1_docked_dock",
        "d1_b3_docked_wait",
        "d1_b3_undocked_undock",
    ],
    ["vacuum", "vacuum", "dock", "wait", "undock",
     "vacuum", "vacuum", "dock", "wait", "undock"],
)

REDUCED_SWEEP = (
    [
        "d3_b2_undocked_none",
        "d2_b1_undocked_vacuum",
        "d2_b1_docked_dock",
        "d2_b2_docked_wait",
        "d2_b2_undocked_undock",
        "d1_b1_undocked_vacuum",
        "d1_b1_docked_dock",
        "d1_b2_docked_wait",
        "d1_b2_undocked_undock",
        "d0_b1_undocked_vacuum",
        "d0_b1_docked_dock",
    ],
    ["vacuum", "dock", "wait", "undock", "vacuum",
     "dock", "wait", "undock", "vacuum", "dock"],
)


def build_scale(scale):
    if scale == "full":
        m = cleaningworld()
        names, acts = FULL_SWEEP
    else:
        m = cleaningworld(dirt0=3, battery0=2, capacity=2)
        names, acts = REDUCED_SWEEP
    traj = Trajectory(
        tuple(m.state_index[n] for n in names),
        tuple(m.action_index[a] for a in acts),
    )
    return m, [traj, traj, traj]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scale", choices=["reduced", "full"], default="reduced")
    ap.add_argument("--objective", choices=["state", "action"], default="state")
    ap.add_argument("--pop", type=int, default=60)
    ap.add_argument("--gens", type=int, default=20)
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--gamma", type=float, default=0.99)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    m, demos = build_scale(args.scale)
    cfg = SearchConfig(
        population=args.pop,
        generations=args.gens,
        runs=args.runs,
        objective=args.objective,
        gamma=args.gamma,
        seed=args.seed,
        threads=args.threads,
    )
    report = run_nsga2(cfg, m, demos)
    out = pathlib.Path(
        args.out or f"results/cleaningworld_{args.scale}_{args.objective}.csv"
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    write_report_csv(report, out)
    print(f"wrote {len(report.rows)} rows to {out}")
    for key, obj, fc, runs in report.rows:
        print(f"  {runs:2d}/{cfg.runs}  obj={obj:+.6f}  fc={fc}  {key}")


if __name__ == "__main__":
    main()
