"""Benchmark domains and the demonstrating planner.

SlimChance: two states, trying has a small chance of success.
CleaningWorld: a deterministic vacuum robot tracking dirt, battery,
docking, and its last action (actions double as propositions).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .automata import compile as compile_dra
from .ltl import Formula
from .mdp import Mdp, Trajectory, make_mdp
from .objective import min_violation_values
from .product import KEEP, SUSP, ProductMdp, StateClassification, build_product, classify_states, compute_amecs


def slimchance(eps: float = 0.01) -> Mdp:
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie strictly between 0 and 1")
    try_dist = {"s_GOOD": eps, "s_BAD": 1.0 - eps}
    states = {
        "s_GOOD": ({"good"}, {"try": dict(try_dist), "notry": {"s_BAD": 1.0}}),
        "s_BAD": (set(), {"try": dict(try_dist), "notry": {"s_BAD": 1.0}}),
    }
    return make_mdp(["good"], states, "s_BAD")


_CW_ACTIONS = ("beDead", "dock", "undock", "vacuum", "wait")


def _cw_name(dirt: int, battery: int, docked: bool, last: str) -> str:
    where = "docked" if docked else "undocked"
    return f"d{dirt}_b{battery}_{where}_{last}"


def _cw_labels(dirt: int, battery: int, last: str) -> set[str]:
    labels = set()
    if battery == 0:
        labels.add("batteryDead")
    if dirt == 0:
        labels.add("roomClean")
    if last in _CW_ACTIONS:
        labels.add(last)
    return labels


def _cw_moves(dirt: int, battery: int, docked: bool, capacity: int):
    moves = {}
    if not docked and battery > 0:
        moves["vacuum"] = (max(dirt - 1, 0), battery - 1, False)
        moves["dock"] = (dirt, battery, True)
    if docked:
        moves["undock"] = (dirt, battery, False)
        moves["wait"] = (dirt, capacity, True)
    elif battery > 0:
        moves["wait"] = (dirt, battery - 1, False)
    if battery == 0 and not docked:
        moves["beDead"] = (dirt, battery, False)
    return moves


def cleaningworld(dirt0: int = 5, battery0: int = 3, capacity: int = 3) -> Mdp:
    if dirt0 < 0 or battery0 < 0:
        raise ValueError("dirt and battery must be nonnegative")
    if battery0 > capacity:
        raise ValueError("initial battery exceeds capacity")
    initial = (dirt0, battery0, False, "none")
    order = [initial]
    seen = {initial}
    frontier = 0
    while frontier < len(order):
        dirt, battery, docked, _ = order[frontier]
        frontier += 1
        for action in sorted(_cw_moves(dirt, battery, docked, capacity)):
            d2, b2, dk2 = _cw_moves(dirt, battery, docked, capacity)[action]
            succ = (d2, b2, dk2, action)
            if succ not in seen:
                seen.add(succ)
                order.append(succ)
    states = {}
    for dirt, battery, docked, last in order:
        moves = _cw_moves(dirt, battery, docked, capacity)
        acts = {
            a: {_cw_name(d2, b2, dk2, a): 1.0}
            for a, (d2, b2, dk2) in moves.items()
        }
        states[_cw_name(dirt, battery, docked, last)] = (
            _cw_labels(dirt, battery, last),
            acts,
        )
    props = ["batteryDead", "roomClean", *(a for a in _CW_ACTIONS)]
    return make_mdp(props, states, _cw_name(*initial))


@dataclass
class Demonstrator:
    """Greedy minimizer of expected violation cost on the product."""

    product: ProductMdp
    classification: StateClassification
    values: np.ndarray
    # chosen underlying action per product state (-1 at the pre-initial)
    actions: dict


def _branch_value(p: ProductMdp, bad, values, j: int):
    gamma = p.gamma
    keepv = gamma * values[p.t_keep[j]]
    suspv = 1.0 + gamma * values[p.t_susp[j]]
    keep_bad = bad[p.t_keep[j]]
    susp_bad = bad[p.t_susp[j]]
    if keep_bad and not susp_bad:
        return suspv, SUSP
    if susp_bad and not keep_bad:
        return keepv, KEEP
    if keepv <= suspv:
        return keepv, KEEP
    return suspv, SUSP


def plan_demonstrator(m: Mdp, f: Formula, gamma: float, state_budget: int = 10_000) -> Demonstrator:
    d = compile_dra(f, m.propositions, state_budget)
    p = build_product(m, d, gamma)
    cls = classify_states(p, compute_amecs(p))
    values = min_violation_values(p, cls)
    bad = np.zeros(p.n_states, dtype=bool)
    for x in cls.bad:
        bad[x] = True
    actions = {}
    for x in range(p.n_states):
        best_row = None
        best = 0.0
        for r in p.rows(x):
            rv = 0.0
            for j in range(int(p.row_ptr[r]), int(p.row_ptr[r + 1])):
                bv, _ = _branch_value(p, bad, values, j)
                rv += p.t_prob[j] * bv
            if best_row is None or rv < best:
                best_row = r
                best = rv
        actions[x] = int(p.row_action[best_row])
    return Demonstrator(product=p, classification=cls, values=values, actions=actions)


def generate_demos(
    m: Mdp,
    f: Formula,
    gamma: float,
    count: int,
    horizon: int,
    seed: int,
    state_budget: int = 10_000,
) -> list[Trajectory]:
    """Roll out the greedy demonstrator, tracking the automaton state by
    the branch (advance or suspend) the planner itself prefers."""
    if count < 1 or horizon < 1:
        raise ValueError("count and horizon must be at least 1")
    demon = plan_demonstrator(m, f, gamma, state_budget)
    p = demon.product
    bad = np.zeros(p.n_states, dtype=bool)
    for x in demon.classification.bad:
        bad[x] = True
    rng = random.Random(seed)

    def advance(x: int):
        a = demon.actions[x]
        row = next(r for r in p.rows(x) if int(p.row_action[r]) == a)
        entries = list(range(int(p.row_ptr[row]), int(p.row_ptr[row + 1])))
        if len(entries) == 1:
            j = entries[0]
        else:
            j = rng.choices(entries, weights=[float(p.t_prob[e]) for e in entries])[0]
        _, choice = _branch_value(p, bad, demon.values, j)
        return a, int(p.t_keep[j]) if choice == KEEP else int(p.t_susp[j])

    out = []
    for _ in range(count):
        _, x = advance(0)
        states = [p.states[x][0]]
        actions = []
        for _ in range(horizon):
            a, x = advance(x)
            actions.append(a)
            states.append(p.states[x][0])
        out.append(Trajectory(tuple(states), tuple(actions)))
    return out
