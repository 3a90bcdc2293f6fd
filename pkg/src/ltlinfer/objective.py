"""Violation-cost machinery on the product MDP.

Policy evaluation iterates the discounted update

    Viol((s,q)) = sum_a pi(a) sum_s' P(s,a,s') *
                  min{1 + gamma*Viol((s',q)), gamma*Viol((s',delta(q,L(s'))))}

with bad states pinned at 1/(1-gamma).  A branch whose target is bad is
dropped from the min whenever the other branch is not: the minimization
ranges over runs that can still be made accepting, and chasing the
discounted-forever shortcut through a doomed automaton state would
otherwise undercut honest suspensions.  When both branches are bad the
plain minimum of the pinned values is used.

The same machinery yields the best interpretation of an observed state
sequence (dynamic program over suspend-or-advance choices) and the two
inference objectives built on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .mdp import Trajectory
from .product import ProductMdp, StateClassification


class ConvergenceError(RuntimeError):
    """Value iteration failed to reach the tolerance in time."""


@dataclass(frozen=True)
class ProductPolicy:
    """weights[x] maps an underlying action id (or -1) to a probability."""

    weights: tuple[dict[int, float], ...]


def product_uniform_policy(p: ProductMdp) -> ProductPolicy:
    weights = []
    for x in range(p.n_states):
        acts = [int(p.row_action[r]) for r in p.rows(x)]
        weights.append({a: 1.0 / len(acts) for a in acts})
    return ProductPolicy(tuple(weights))


@dataclass(frozen=True)
class ViolationTable:
    values: np.ndarray
    gamma: float

    def __getitem__(self, x: int) -> float:
        return float(self.values[x])


def _exclusion_masks(p: ProductMdp, cls: StateClassification):
    bad = np.zeros(p.n_states, dtype=np.uint8)
    for x in cls.bad:
        bad[x] = 1
    keep_bad = bad[p.t_keep] == 1
    susp_bad = bad[p.t_susp] == 1
    excl_k = (keep_bad & ~susp_bad).astype(np.uint8)
    excl_s = (susp_bad & ~keep_bad).astype(np.uint8)
    return excl_k, excl_s, bad


@njit(cache=True, nogil=True)
def _vi_kernel(
    st_ptr,
    row_ptr,
    row_w,
    t_prob,
    t_keep,
    t_susp,
    excl_k,
    excl_s,
    bad,
    gamma,
    tol,
    max_iters,
    use_min,
):
    n = st_ptr.size - 1
    cap = 1.0 / (1.0 - gamma)
    v = np.empty(n, dtype=np.float64)
    for x in range(n):
        v[x] = cap if bad[x] else 0.0
    new = v.copy()
    for it in range(max_iters):
        delta = 0.0
        for x in range(n):
            if bad[x]:
                continue
            acc = 0.0
            first = True
            for r in range(st_ptr[x], st_ptr[x + 1]):
                w = row_w[r]
                if not use_min and w == 0.0:
                    continue
                rv = 0.0
                for j in range(row_ptr[r], row_ptr[r + 1]):
                    keepv = gamma * v[t_keep[j]]
                    suspv = 1.0 + gamma * v[t_susp[j]]
                    if excl_k[j]:
                        m = suspv
                    elif excl_s[j]:
                        m = keepv
                    elif keepv <= suspv:
                        m = keepv
                    else:
                        m = suspv
                    rv += t_prob[j] * m
                if use_min:
                    if first or rv < acc:
                        acc = rv
                    first = False
                else:
                    acc += w * rv
            new[x] = acc
            d = acc - v[x]
            if d < 0.0:
                d = -d
            if d > delta:
                delta = d
        tmp = v
        v = new
        new = tmp
        if delta < tol:
            return v, it + 1
    return v, -1


def _row_weights(p: ProductMdp, policy: ProductPolicy) -> np.ndarray:
    row_w = np.zeros(p.n_rows, dtype=np.float64)
    for x in range(p.n_states):
        dist = policy.weights[x]
        for r in p.rows(x):
            row_w[r] = dist.get(int(p.row_action[r]), 0.0)
    return row_w


def evaluate_policy_violation(
    p: ProductMdp,
    policy: ProductPolicy,
    cls: StateClassification,
    tol: float = 1e-9,
    max_iters: int = 100_000,
) -> ViolationTable:
    excl_k, excl_s, bad = _exclusion_masks(p, cls)
    row_w = _row_weights(p, policy)
    values, iters = _vi_kernel(
        p.st_ptr, p.row_ptr, row_w, p.t_prob, p.t_keep, p.t_susp,
        excl_k, excl_s, bad, p.gamma, tol, max_iters, False,
    )
    if iters < 0:
        raise ConvergenceError(f"policy evaluation did not converge in {max_iters} iterations")
    return ViolationTable(values=values, gamma=p.gamma)


def min_violation_values(
    p: ProductMdp,
    cls: StateClassification,
    tol: float = 1e-9,
    max_iters: int = 100_000,
) -> np.ndarray:
    """Fixed point of the min-over-actions form of the update; used by
    the demonstration planner."""
    excl_k, excl_s, bad = _exclusion_masks(p, cls)
    row_w = np.ones(p.n_rows, dtype=np.float64)
    values, iters = _vi_kernel(
        p.st_ptr, p.row_ptr, row_w, p.t_prob, p.t_keep, p.t_susp,
        excl_k, excl_s, bad, p.gamma, tol, max_iters, True,
    )
    if iters < 0:
        raise ConvergenceError(f"planning did not converge in {max_iters} iterations")
    return values


@dataclass(frozen=True)
class Interpretation:
    """Best automaton-state sequence for an observed state sequence.

    dra_sequence has one entry per time step plus the initial state; it
    is None (with cost 1/(1-gamma)) when no interpretation avoids the
    bad region.
    """

    dra_sequence: Optional[tuple[int, ...]]
    cost: float
    terminal: Optional[int]


def rabin_state_sequence(
    viol_rand: ViolationTable,
    p: ProductMdp,
    cls: StateClassification,
    state_seq,
) -> Interpretation:
    """Dynamic program over suspend/advance choices: suspending at step
    t costs gamma^t, advancing is free; the terminal adds the discounted
    random-policy tail of the chosen product state.  Ties prefer the
    lowest product-state id."""
    if not state_seq:
        raise ValueError("state sequence must be nonempty")
    d = p.dra
    gamma = p.gamma
    cur: dict[int, float] = {0: 0.0}
    parents: list[dict[int, int]] = []
    for t, s in enumerate(state_seq):
        lab = int(p.label_ix[s])
        step_cost = gamma ** t
        nxt: dict[int, float] = {}
        back: dict[int, int] = {}
        for xid in sorted(cur):
            c = cur[xid]
            q = p.states[xid][1]
            keep_id = p.state_ids[(s, d.transitions[q][lab])]
            susp_id = p.state_ids[(s, q)]
            for tid, tc in ((keep_id, c), (susp_id, c + step_cost)):
                old = nxt.get(tid)
                if old is None or tc < old:
                    nxt[tid] = tc
                    back[tid] = xid
        cur = nxt
        parents.append(back)

    best_id = None
    best_total = 0.0
    horizon = len(state_seq)
    for xid in sorted(cur):
        if xid in cls.bad:
            continue
        total = cur[xid] + gamma ** horizon * viol_rand[xid]
        if best_id is None or total < best_total:
            best_id = xid
            best_total = total
    if best_id is None:
        return Interpretation(
            dra_sequence=None, cost=1.0 / (1.0 - gamma), terminal=None
        )
    chain = [best_id]
    for back in reversed(parents):
        chain.append(back[chain[-1]])
    chain.reverse()
    return Interpretation(
        dra_sequence=tuple(p.states[x][1] for x in chain),
        cost=best_total,
        terminal=best_id,
    )


def _check_demos(p: ProductMdp, demos):
    if not demos:
        raise ValueError("need at least one demonstration")
    for traj in demos:
        if traj.states[0] != p.mdp.initial:
            raise ValueError("demonstrations must start at the initial state")


def obj_state_based(
    p: ProductMdp,
    cls: StateClassification,
    viol_rand: ViolationTable,
    demos: list[Trajectory],
) -> float:
    """Total best-interpretation cost of the observed trajectories minus
    the random-policy baseline."""
    _check_demos(p, demos)
    total = 0.0
    for traj in demos:
        total += rabin_state_sequence(viol_rand, p, cls, traj.states).cost
    return total - len(demos) * viol_rand[0]


def obj_action_based(
    p: ProductMdp,
    cls: StateClassification,
    viol_rand: ViolationTable,
    demos: list[Trajectory],
    tol: float = 1e-9,
    max_iters: int = 100_000,
) -> float:
    """Violation cost of the policy that mimics the demonstrated actions
    along their best interpretations, minus the random baseline.  States
    the demonstrations never visit fall back to full availability."""
    _check_demos(p, demos)
    a_star: dict[int, set[int]] = {}
    for traj in demos:
        interp = rabin_state_sequence(viol_rand, p, cls, traj.states)
        if interp.dra_sequence is None:
            continue
        a_star.setdefault(0, set()).add(-1)
        for t, a in enumerate(traj.actions):
            xid = p.state_ids[(traj.states[t], interp.dra_sequence[t + 1])]
            a_star.setdefault(xid, set()).add(a)
    weights = []
    for x in range(p.n_states):
        acts = a_star.get(x)
        if acts is None:
            acts = {int(p.row_action[r]) for r in p.rows(x)}
        weights.append({a: 1.0 / len(acts) for a in sorted(acts)})
    policy = ProductPolicy(tuple(weights))
    table = evaluate_policy_violation(p, policy, cls, tol=tol, max_iters=max_iters)
    return table[0] - viol_rand[0]
