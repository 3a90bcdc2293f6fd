#!/usr/bin/env python3
"""Infer specifications from the reference SlimChance demonstrations.

Writes the aggregate Pareto front to a CSV report and echoes it."""

import argparse
import pathlib

from ltlinfer.domains import slimchance
from ltlinfer.mdp import Trajectory
from ltlinfer.search import SearchConfig, run_nsga2, write_report_csv


def reference_demos(m):
    """Three 10-step always-try runs; the second gets lucky once."""
    good = m.state_index["s_GOOD"]
    bad = m.state_index["s_BAD"]
    do_try = m.action_index["try"]
    flat = Trajectory((bad,) * 11, (do_try,) * 10)
    lucky = Trajectory((bad, good) + (bad,) * 9, (do_try,) * 10)
    return [flat, lucky, flat]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--objective", choices=["state", "action"], default="action")
    ap.add_argument("--pop", type=int, default=100)
    ap.add_argument("--gens", type=int, default=50)
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--gamma", type=float, default=0.99)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/slimchance.csv")
    args = ap.parse_args()

    m = slimchance()
    cfg = SearchConfig(
        population=args.pop,
        generations=args.gens,
        runs=args.runs,
        objective=args.objective,
        gamma=args.gamma,
        seed=args.seed,
        threads=args.threads,
    )
    report = run_nsga2(cfg, m, reference_demos(m))
    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_report_csv(report, out)
    print(f"wrote {len(report.rows)} rows to {out}")
    for key, obj, fc, runs in report.rows:
        print(f"  {runs:2d}/{cfg.runs}  obj={obj:+.6f}  fc={fc}  {key}")


if __name__ == "__main__":
    main()
