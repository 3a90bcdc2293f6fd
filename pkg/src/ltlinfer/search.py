"""NSGA-II genetic programming over formula trees.

Minimizes the pair (violation objective, formula complexity).  Formulas
that fail to compile within the state budget absorb a worst-case
objective instead of aborting the run.  Scores are cached by canonical
rendering and shared across repeated runs, so identical seeds give
identical reports regardless of thread count.
"""

from __future__ import annotations

import csv
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .automata import AutomatonBudgetError, compile as compile_dra
from .ltl import (
    And,
    Always,
    Eventually,
    FalseBool,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    Prop,
    TrueBool,
    Until,
    complexity,
    children,
    rebuild,
    render,
    subtrees,
)
from .mdp import Mdp, Trajectory, validate_trajectory
from .objective import (
    ConvergenceError,
    evaluate_policy_violation,
    obj_action_based,
    obj_state_based,
    product_uniform_policy,
)
from .product import build_product, classify_states, compute_amecs


@dataclass(frozen=True)
class SearchConfig:
    population: int = 100
    generations: int = 50
    runs: int = 20
    objective: str = "state"
    gamma: float = 0.99
    seed: int = 0
    max_depth: int = 6
    p_crossover: float = 0.9
    p_mutation: float = 0.1
    always_root: bool = True
    state_budget: int = 10_000
    tol: float = 1e-9
    max_iters: int = 100_000
    threads: int = 1

    def __post_init__(self):
        if self.population < 4 or self.population % 2:
            raise ValueError("population must be even and at least 4")
        if self.objective not in ("state", "action"):
            raise ValueError("objective must be 'state' or 'action'")
        for prob in (self.p_crossover, self.p_mutation):
            if not (0.0 <= prob <= 1.0):
                raise ValueError("probabilities must lie in [0,1]")
        if self.max_depth < 2:
            raise ValueError("max depth must be at least 2")


_UNARY_OPS = (Not, Next, Always, Eventually)
_BINARY_OPS = (And, Or, Implies, Until)


def _terminals(alphabet):
    return [Prop(p) for p in sorted(alphabet)] + [TrueBool(), FalseBool()]


def random_tree(rng: random.Random, alphabet, depth: int, full: bool) -> Formula:
    """Grow or full method; depth counts nodes along the longest path."""
    terms = _terminals(alphabet)
    if depth <= 1:
        return rng.choice(terms)
    ops = list(_UNARY_OPS + _BINARY_OPS)
    if not full and rng.random() < len(terms) / (len(terms) + len(ops)):
        return rng.choice(terms)
    op = rng.choice(ops)
    if op in _UNARY_OPS:
        return op(random_tree(rng, alphabet, depth - 1, full))
    return op(
        random_tree(rng, alphabet, depth - 1, full),
        random_tree(rng, alphabet, depth - 1, full),
    )


def tree_depth(f: Formula) -> int:
    kids = children(f)
    if not kids:
        return 1
    return 1 + max(tree_depth(k) for k in kids)


def init_population(cfg: SearchConfig, alphabet, rng: random.Random) -> list[Formula]:
    body_max = cfg.max_depth - 1 if cfg.always_root else cfg.max_depth
    depths = list(range(2, body_max + 1)) or [body_max]
    pop = []
    for i in range(cfg.population):
        depth = depths[i % len(depths)]
        full = (i // len(depths)) % 2 == 0
        body = random_tree(rng, alphabet, depth, full)
        pop.append(Always(body) if cfg.always_root else body)
    return pop


def _node_count(f: Formula) -> int:
    return len(list(subtrees(f)))


def _get_subtree(f: Formula, index: int) -> Formula:
    return list(subtrees(f))[index]


def _replace_subtree(f: Formula, index: int, new: Formula) -> Formula:
    counter = [0]

    def walk(node: Formula) -> Formula:
        me = counter[0]
        counter[0] += 1
        if me == index:
            return new
        kids = children(node)
        if not kids:
            return node
        return rebuild(node, [walk(k) for k in kids])

    return walk(f)


def _pick_index(f: Formula, rng: random.Random, protect_root: bool) -> int:
    n = _node_count(f)
    if protect_root and n > 1:
        return rng.randrange(1, n)
    return rng.randrange(n)


def crossover(a: Formula, b: Formula, rng: random.Random, cfg: SearchConfig):
    ia = _pick_index(a, rng, cfg.always_root)
    ib = _pick_index(b, rng, cfg.always_root)
    sub_a = _get_subtree(a, ia)
    sub_b = _get_subtree(b, ib)
    child_a = _replace_subtree(a, ia, sub_b)
    child_b = _replace_subtree(b, ib, sub_a)
    if tree_depth(child_a) > cfg.max_depth:
        child_a = a
    if tree_depth(child_b) > cfg.max_depth:
        child_b = b
    return child_a, child_b


def _node_depths(f: Formula) -> list[int]:
    out = []

    def walk(node: Formula, depth: int):
        out.append(depth)
        for k in children(node):
            walk(k, depth + 1)

    walk(f, 1)
    return out


def mutate(f: Formula, rng: random.Random, cfg: SearchConfig, alphabet) -> Formula:
    if rng.random() >= cfg.p_mutation:
        return f
    index = _pick_index(f, rng, cfg.always_root)
    at_depth = _node_depths(f)[index]
    room = max(cfg.max_depth - at_depth + 1, 1)
    fresh = random_tree(rng, alphabet, rng.randint(1, room), full=False)
    return _replace_subtree(f, index, fresh)


def _dominates(a, b) -> bool:
    return a[0] <= b[0] and a[1] <= b[1] and (a[0] < b[0] or a[1] < b[1])


def nondominated_sort(points) -> list[list[int]]:
    n = len(points)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    counts = [0] * n
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if _dominates(points[i], points[j]):
                dominated_by[i].append(j)
            elif _dominates(points[j], points[i]):
                counts[i] += 1
    fronts = [[i for i in range(n) if counts[i] == 0]]
    while fronts[-1]:
        nxt = []
        for i in fronts[-1]:
            for j in dominated_by[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(j)
        fronts.append(nxt)
    fronts.pop()
    return fronts


def crowding_distance(points, front) -> dict[int, float]:
    dist = {i: 0.0 for i in front}
    for dim in (0, 1):
        ordered = sorted(front, key=lambda i: points[i][dim])
        lo, hi = points[ordered[0]][dim], points[ordered[-1]][dim]
        dist[ordered[0]] = float("inf")
        dist[ordered[-1]] = float("inf")
        span = hi - lo
        if span <= 0.0:
            continue
        for pos in range(1, len(ordered) - 1):
            gap = points[ordered[pos + 1]][dim] - points[ordered[pos - 1]][dim]
            dist[ordered[pos]] += gap / span
    return dist


class FormulaScorer:
    """Evaluates (objective, complexity) with a render-keyed cache."""

    def __init__(self, m: Mdp, demos: list[Trajectory], cfg: SearchConfig):
        for traj in demos:
            problem = validate_trajectory(m, traj)
            if problem is None and traj.states[0] != m.initial:
                problem = "must start at the initial state"
            if problem is not None:
                raise ValueError(f"invalid demonstration: {problem}")
        self.m = m
        self.demos = demos
        self.cfg = cfg
        self.cache: dict[str, tuple[float, int]] = {}
        self.worst = (len(demos) + 1) / (1.0 - cfg.gamma)

    def _evaluate(self, f: Formula) -> float:
        cfg = self.cfg
        d = compile_dra(f, self.m.propositions, cfg.state_budget)
        p = build_product(self.m, d, cfg.gamma)
        cls = classify_states(p, compute_amecs(p))
        viol_rand = evaluate_policy_violation(
            p, product_uniform_policy(p), cls, tol=cfg.tol, max_iters=cfg.max_iters
        )
        if cfg.objective == "state":
            return obj_state_based(p, cls, viol_rand, self.demos)
        return obj_action_based(
            p, cls, viol_rand, self.demos, tol=cfg.tol, max_iters=cfg.max_iters
        )

    def score(self, f: Formula) -> tuple[float, int]:
        key = render(f)
        got = self.cache.get(key)
        if got is None:
            try:
                obj = self._evaluate(f)
            except (AutomatonBudgetError, ConvergenceError):
                obj = self.worst
            got = (obj, complexity(f))
            self.cache[key] = got
        return got

    def score_all(self, formulas, threads: int = 1) -> list[tuple[float, int]]:
        fresh = {}
        for f in formulas:
            key = render(f)
            if key not in self.cache and key not in fresh:
                fresh[key] = f
        if threads > 1 and len(fresh) > 1:
            todo = [fresh[k] for k in sorted(fresh)]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(self.score, todo))
        return [self.score(f) for f in formulas]


@dataclass
class RunResult:
    front: list  # (render, objective, complexity), deduped, sorted


@dataclass
class SearchReport:
    per_run: list
    # aggregate rows: (render, objective, complexity, runs) with
    # strictly dominated rows removed
    rows: list = field(default_factory=list)
    run_seconds: list = field(default_factory=list)


def _tournament(rng, ranks, crowd):
    i = rng.randrange(len(ranks))
    j = rng.randrange(len(ranks))
    if ranks[i] < ranks[j]:
        return i
    if ranks[j] < ranks[i]:
        return j
    if crowd[i] >= crowd[j]:
        return i
    return j


def _rank_and_crowd(points):
    fronts = nondominated_sort(points)
    ranks = [0] * len(points)
    crowd = [0.0] * len(points)
    for level, front in enumerate(fronts):
        dist = crowding_distance(points, front)
        for i in front:
            ranks[i] = level
            crowd[i] = dist[i]
    return ranks, crowd, fronts


def run_single(cfg: SearchConfig, scorer: FormulaScorer, alphabet, run_ix: int) -> RunResult:
    rng = random.Random(cfg.seed + 1_000_003 * run_ix)
    pop = init_population(cfg, alphabet, rng)
    scores = scorer.score_all(pop, cfg.threads)
    ranks, crowd, _ = _rank_and_crowd(scores)
    for _ in range(cfg.generations):
        offspring = []
        while len(offspring) < cfg.population:
            pa = pop[_tournament(rng, ranks, crowd)]
            pb = pop[_tournament(rng, ranks, crowd)]
            if rng.random() < cfg.p_crossover:
                ca, cb = crossover(pa, pb, rng, cfg)
            else:
                ca, cb = pa, pb
            offspring.append(mutate(ca, rng, cfg, alphabet))
            offspring.append(mutate(cb, rng, cfg, alphabet))
        off_scores = scorer.score_all(offspring, cfg.threads)
        combined = pop + offspring
        comb_scores = scores + off_scores
        ranks_c, crowd_c, fronts = _rank_and_crowd(comb_scores)
        chosen: list[int] = []
        for front in fronts:
            if len(chosen) + len(front) <= cfg.population:
                chosen.extend(front)
            else:
                dist = crowding_distance(comb_scores, front)
                ordered = sorted(front, key=lambda i: -dist[i])
                chosen.extend(ordered[: cfg.population - len(chosen)])
                break
        pop = [combined[i] for i in chosen]
        scores = [comb_scores[i] for i in chosen]
        ranks, crowd, _ = _rank_and_crowd(scores)
    front_members: dict[str, tuple[float, int]] = {}
    final_fronts = nondominated_sort(scores)
    for i in final_fronts[0]:
        front_members.setdefault(render(pop[i]), scores[i])
    front = sorted(
        ((k, obj, fc) for k, (obj, fc) in front_members.items()),
        key=lambda row: (row[1], row[2], row[0]),
    )
    return RunResult(front=front)


def run_nsga2(cfg: SearchConfig, m: Mdp, demos: list[Trajectory]) -> SearchReport:
    scorer = FormulaScorer(m, demos, cfg)
    alphabet = m.propositions
    per_run = []
    run_seconds = []
    for r in range(cfg.runs):
        started = time.perf_counter()
        per_run.append(run_single(cfg, scorer, alphabet, r))
        run_seconds.append(time.perf_counter() - started)
    counts: dict[str, int] = {}
    info: dict[str, tuple[float, int]] = {}
    for result in per_run:
        for key, obj, fc in result.front:
            counts[key] = counts.get(key, 0) + 1
            info[key] = (obj, fc)
    rows = [(key, info[key][0], info[key][1], counts[key]) for key in sorted(info)]
    kept = [
        row
        for row in rows
        if not any(
            _dominates((other[1], other[2]), (row[1], row[2])) for other in rows
        )
    ]
    kept.sort(key=lambda row: (-row[3], row[1], row[0]))
    return SearchReport(per_run=per_run, rows=kept, run_seconds=run_seconds)


def write_report_csv(report: SearchReport, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["formula", "objective", "complexity", "runs_pareto_efficient"])
        for key, obj, fc, runs in report.rows:
            writer.writerow([key, repr(obj), fc, runs])
