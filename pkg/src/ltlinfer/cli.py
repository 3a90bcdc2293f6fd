"""Command-line entry points.

Subcommands: compile (formula -> automaton stats / DOT), demos (build a
domain, plan, sample demonstrations), infer (NSGA-II search over
formulas), eval (score a single formula).  Exit codes: 0 success,
1 usage error, 2 bad input, 3 runtime failure (budget/convergence).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from .automata import AutomatonBudgetError, compile as compile_dra, to_dot
from .domains import cleaningworld, generate_demos, slimchance
from .ltl import LtlSyntaxError, parse, render, complexity
from .mdp import dump_mdp, dump_trajectories, load_mdp, load_trajectories
from .objective import (
    ConvergenceError,
    evaluate_policy_violation,
    obj_action_based,
    obj_state_based,
    product_uniform_policy,
)
from .product import build_product, classify_states, compute_amecs
from .search import SearchConfig, run_nsga2, write_report_csv

USAGE_ERROR = 1
INPUT_ERROR = 2
RUNTIME_ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(path, command, config, input_paths, run_seconds, outputs):
    doc = {
        "command": command,
        "config": config,
        "input_digests": {str(p): _sha256(p) for p in input_paths},
        "run_seconds": run_seconds,
        "outputs": [str(p) for p in outputs],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _check_gamma(parser, gamma):
    if not (0.0 < gamma < 1.0):
        parser.error("--gamma must lie strictly between 0 and 1")


def cmd_compile(parser, args) -> int:
    alphabet = [p for p in args.alphabet.split(",") if p]
    if not alphabet:
        parser.error("--alphabet must list at least one proposition")
    f = parse(args.formula, alphabet)
    d = compile_dra(f, alphabet, args.state_budget)
    print(f"states={d.n_states} pairs={len(d.pairs)}")
    if args.out_dot:
        with open(args.out_dot, "w", encoding="utf-8") as fh:
            fh.write(to_dot(d))
            fh.write("\n")
    return 0


def _build_domain(parser, args):
    if args.domain == "slimchance":
        return slimchance(args.epsilon)
    return cleaningworld(args.dirt0, args.battery0, args.capacity)


def cmd_demos(parser, args) -> int:
    if args.count < 1:
        parser.error("--count must be at least 1")
    if args.horizon < 1:
        parser.error("--horizon must be at least 1")
    _check_gamma(parser, args.gamma)
    m = _build_domain(parser, args)
    f = parse(args.formula, m.propositions)
    started = time.perf_counter()
    demos = generate_demos(m, f, args.gamma, args.count, args.horizon, args.seed)
    elapsed = time.perf_counter() - started
    dump_trajectories(demos, m, args.out)
    outputs = [args.out]
    if args.out_mdp:
        dump_mdp(m, args.out_mdp)
        outputs.append(args.out_mdp)
    config = {
        "domain": args.domain,
        "formula": render(f),
        "count": args.count,
        "horizon": args.horizon,
        "gamma": args.gamma,
        "seed": args.seed,
    }
    _write_manifest(
        f"{args.out}.manifest.json", "demos", config, [], [elapsed], outputs
    )
    print(f"wrote {len(demos)} trajectories to {args.out}")
    return 0


def cmd_infer(parser, args) -> int:
    _check_gamma(parser, args.gamma)
    try:
        cfg = SearchConfig(
            population=args.pop,
            generations=args.gens,
            runs=args.runs,
            objective=args.objective,
            gamma=args.gamma,
            seed=args.seed,
            state_budget=args.state_budget,
            threads=args.threads,
        )
    except ValueError as e:
        parser.error(str(e))
    m = load_mdp(args.mdp)
    demos = load_trajectories(args.demos, m)
    report = run_nsga2(cfg, m, demos)
    write_report_csv(report, args.out_csv)
    config = {
        "gamma": cfg.gamma,
        "population": cfg.population,
        "generations": cfg.generations,
        "runs": cfg.runs,
        "objective": cfg.objective,
        "seed": cfg.seed,
    }
    _write_manifest(
        f"{args.out_csv}.manifest.json",
        "infer",
        config,
        [args.mdp, args.demos],
        report.run_seconds,
        [args.out_csv],
    )
    print(f"wrote {len(report.rows)} aggregate rows to {args.out_csv}")
    return 0


def cmd_eval(parser, args) -> int:
    _check_gamma(parser, args.gamma)
    m = load_mdp(args.mdp)
    demos = load_trajectories(args.demos, m)
    if not demos:
        print("error: demo file contains no trajectories", file=sys.stderr)
        return INPUT_ERROR
    f = parse(args.formula, m.propositions)
    d = compile_dra(f, m.propositions, args.state_budget)
    p = build_product(m, d, args.gamma)
    cls = classify_states(p, compute_amecs(p))
    viol_rand = evaluate_policy_violation(p, product_uniform_policy(p), cls)
    if args.objective == "state":
        obj = obj_state_based(p, cls, viol_rand, demos)
    else:
        obj = obj_action_based(p, cls, viol_rand, demos)
    if args.dump_classification:
        with open(args.dump_classification, "w", encoding="utf-8") as fh:
            fh.write(f"# product states: {p.n_states}\n")
            for x, (s, q) in enumerate(p.states):
                name = "pre-initial" if s == -1 else m.state_names[s]
                if x in cls.good:
                    tag = "good"
                elif x in cls.bad:
                    tag = "bad"
                else:
                    tag = "mid"
                fh.write(f"{x}\t{name}\tq{q}\t{tag}\n")
    print(f"obj={obj!r} fc={complexity(f)}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="ltlinfer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a formula and report automaton size")
    c.add_argument("--formula", required=True)
    c.add_argument("--alphabet", required=True, help="comma-separated propositions")
    c.add_argument("--out-dot", default=None)
    c.add_argument("--state-budget", type=int, default=10_000)
    c.set_defaults(func=cmd_compile)

    g = sub.add_parser("demos", help="build a domain and sample demonstrations")
    g.add_argument("--domain", required=True, choices=["slimchance", "cleaningworld"])
    g.add_argument("--formula", required=True)
    g.add_argument("--count", type=int, default=3)
    g.add_argument("--horizon", type=int, default=10)
    g.add_argument("--gamma", type=float, default=0.99)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--out-mdp", default=None)
    g.add_argument("--epsilon", type=float, default=0.01)
    g.add_argument("--dirt0", type=int, default=5)
    g.add_argument("--battery0", type=int, default=3)
    g.add_argument("--capacity", type=int, default=3)
    g.set_defaults(func=cmd_demos)

    i = sub.add_parser("infer", help="search for formulas explaining the demos")
    i.add_argument("--mdp", required=True)
    i.add_argument("--demos", required=True)
    i.add_argument("--objective", required=True, choices=["state", "action"])
    i.add_argument("--gamma", type=float, default=0.99)
    i.add_argument("--pop", type=int, default=100)
    i.add_argument("--gens", type=int, default=50)
    i.add_argument("--runs", type=int, default=20)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--threads", type=int, default=1)
    i.add_argument("--state-budget", type=int, default=10_000)
    i.add_argument("--out-csv", required=True)
    i.set_defaults(func=cmd_infer)

    e = sub.add_parser("eval", help="score one formula against demos")
    e.add_argument("--mdp", required=True)
    e.add_argument("--demos", required=True)
    e.add_argument("--formula", required=True)
    e.add_argument("--objective", required=True, choices=["state", "action"])
    e.add_argument("--gamma", type=float, default=0.99)
    e.add_argument("--state-budget", type=int, default=10_000)
    e.add_argument("--dump-classification", default=None)
    e.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(parser, args)
    except LtlSyntaxError as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    except (AutomatonBudgetError, ConvergenceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return RUNTIME_ERROR
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
