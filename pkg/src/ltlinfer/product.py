"""Skip-augmented product of a labeled MDP and a DRA.

Product states pair model states with automaton states, plus a
pre-initial state (-1, q0) with the single action id -1.  Every
underlying action splits into two product actions: keep advances the
automaton by the label of the successor state, susp freezes it.
Transition data is stored in flat arrays shared by value iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .automata import Dra
from .mdp import Mdp

KEEP = 0
SUSP = 1


@dataclass
class ProductMdp:
    mdp: Mdp
    dra: Dra
    gamma: float
    # states[i] = (model state or -1, automaton state); state 0 is the
    # pre-initial state.
    states: tuple[tuple[int, int], ...]
    state_ids: dict
    # rows enumerate (product state, underlying action) pairs:
    # rows for state x are st_ptr[x]:st_ptr[x+1]; transition entries for
    # row r are row_ptr[r]:row_ptr[r+1].
    st_ptr: np.ndarray
    row_action: np.ndarray
    row_ptr: np.ndarray
    t_prob: np.ndarray
    t_keep: np.ndarray
    t_susp: np.ndarray
    # label_ix[s] = alphabet index of L(s) in the automaton
    label_ix: np.ndarray

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_rows(self) -> int:
        return len(self.row_action)

    def rows(self, x: int):
        return range(self.st_ptr[x], self.st_ptr[x + 1])

    def successors(self, row: int, tilde: int) -> tuple[int, ...]:
        lo, hi = self.row_ptr[row], self.row_ptr[row + 1]
        tgt = self.t_keep if tilde == KEEP else self.t_susp
        return tuple(int(t) for t in tgt[lo:hi])


def build_product(m: Mdp, d: Dra, gamma: float) -> ProductMdp:
    if not (0.0 < gamma < 1.0):
        raise ValueError("discount must lie strictly between 0 and 1")
    if tuple(sorted(m.propositions)) != d.propositions:
        raise ValueError("automaton alphabet does not match the model propositions")
    label_ix = [d.valuation_index(lab) for lab in m.labels]

    states: list[tuple[int, int]] = [(-1, d.initial)]
    state_ids: dict[tuple[int, int], int] = {(-1, d.initial): 0}

    def intern(s: int, q: int) -> int:
        key = (s, q)
        got = state_ids.get(key)
        if got is None:
            got = len(states)
            state_ids[key] = got
            states.append(key)
        return got

    st_ptr = [0]
    row_action: list[int] = []
    row_ptr = [0]
    t_prob: list[float] = []
    t_keep: list[int] = []
    t_susp: list[int] = []

    frontier = 0
    while frontier < len(states):
        s, q = states[frontier]
        frontier += 1
        if s == -1:
            s0 = m.initial
            row_action.append(-1)
            t_prob.append(1.0)
            t_keep.append(intern(s0, d.transitions[q][label_ix[s0]]))
            t_susp.append(intern(s0, q))
            row_ptr.append(len(t_prob))
        else:
            for a in m.available(s):
                row_action.append(a)
                for s2, p in m.transitions[s][a]:
                    t_prob.append(p)
                    t_keep.append(intern(s2, d.transitions[q][label_ix[s2]]))
                    t_susp.append(intern(s2, q))
                row_ptr.append(len(t_prob))
        st_ptr.append(len(row_action))

    return ProductMdp(
        mdp=m,
        dra=d,
        gamma=gamma,
        states=tuple(states),
        state_ids=state_ids,
        st_ptr=np.asarray(st_ptr, dtype=np.int64),
        row_action=np.asarray(row_action, dtype=np.int64),
        row_ptr=np.asarray(row_ptr, dtype=np.int64),
        t_prob=np.asarray(t_prob, dtype=np.float64),
        t_keep=np.asarray(t_keep, dtype=np.int64),
        t_susp=np.asarray(t_susp, dtype=np.int64),
        label_ix=np.asarray(label_ix, dtype=np.int64),
    )


@dataclass(frozen=True)
class EndComponent:
    """Closed, strongly connected set of product states with the action
    restriction that keeps it closed; actions are (row, tilde) pairs."""

    states: frozenset
    actions: dict

    def action_pairs(self, p: ProductMdp, x: int):
        """Readable view: (underlying action id, tilde) pairs at x."""
        return frozenset(
            (int(p.row_action[row]), tilde) for row, tilde in self.actions[x]
        )


def _sccs(nodes, succ):
    """Iterative Kosaraju over the given node set; succ(x) yields
    successors (restricted to nodes by the caller)."""
    nodes = list(nodes)
    node_set = set(nodes)
    order = []
    visited = set()
    for start in nodes:
        if start in visited:
            continue
        stack = [(start, iter(succ(start)))]
        visited.add(start)
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if nxt in node_set and nxt not in visited:
                    visited.add(nxt)
                    stack.append((nxt, iter(succ(nxt))))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()
    preds: dict = {x: [] for x in nodes}
    for x in nodes:
        for y in succ(x):
            if y in node_set:
                preds[y].append(x)
    comp: dict = {}
    n_comp = 0
    for start in reversed(order):
        if start in comp:
            continue
        stack = [start]
        comp[start] = n_comp
        while stack:
            node = stack.pop()
            for pre in preds[node]:
                if pre not in comp:
                    comp[pre] = n_comp
                    stack.append(pre)
        n_comp += 1
    return comp


def maximal_end_components(p: ProductMdp) -> list[EndComponent]:
    """Standard iterative refinement: decompose into SCCs under the
    allowed actions, prune actions that leave their component, drop
    actionless states, repeat to fixpoint."""
    allowed: dict[int, set] = {}
    for x in range(p.n_states):
        acts = {(row, tilde) for row in p.rows(x) for tilde in (KEEP, SUSP)}
        allowed[x] = acts

    while True:
        live = [x for x in allowed if allowed[x]]

        def succ(x):
            out = set()
            for row, tilde in allowed[x]:
                out.update(p.successors(row, tilde))
            return out

        comp = _sccs(live, succ)
        changed = False
        for x in live:
            keep = set()
            for row, tilde in allowed[x]:
                targets = p.successors(row, tilde)
                if all(comp.get(t) == comp[x] for t in targets):
                    keep.add((row, tilde))
            if keep != allowed[x]:
                allowed[x] = keep
                changed = True
        if not changed:
            break

    groups: dict[int, list[int]] = {}
    live = [x for x in allowed if allowed[x]]

    def succ_final(x):
        out = set()
        for row, tilde in allowed[x]:
            out.update(p.successors(row, tilde))
        return out

    comp = _sccs(live, succ_final)
    for x in live:
        groups.setdefault(comp[x], []).append(x)
    out = []
    for _, members in sorted(groups.items(), key=lambda kv: min(kv[1])):
        out.append(
            EndComponent(
                states=frozenset(members),
                actions={x: frozenset(allowed[x]) for x in members},
            )
        )
    return out


def compute_amecs(p: ProductMdp) -> list[EndComponent]:
    """Maximal end components that witness some Rabin pair: the
    component avoids Fin entirely and touches Inf."""
    out = []
    for ec in maximal_end_components(p):
        qs = {p.states[x][1] for x in ec.states}
        for fin, inf in p.dra.pairs:
            if not (qs & fin) and (qs & inf):
                out.append(ec)
                break
    return out


@dataclass(frozen=True)
class StateClassification:
    good: frozenset
    bad: frozenset


def classify_states(p: ProductMdp, amecs) -> StateClassification:
    good: set[int] = set()
    for ec in amecs:
        good |= ec.states
    preds: list[list[int]] = [[] for _ in range(p.n_states)]
    for x in range(p.n_states):
        for row in p.rows(x):
            for tilde in (KEEP, SUSP):
                for y in p.successors(row, tilde):
                    preds[y].append(x)
    can_reach = set(good)
    queue = sorted(good)
    while queue:
        y = queue.pop()
        for x in preds[y]:
            if x not in can_reach:
                can_reach.add(x)
                queue.append(x)
    bad = frozenset(range(p.n_states)) - can_reach
    return StateClassification(good=frozenset(good), bad=bad)
