"""Compilation of LTL formulas into deterministic Rabin automata.

Pipeline: negation normal form -> tableau-style generalized Buchi
automaton with transition marks -> counter degeneralization -> Safra
determinization -> Rabin pairs.  States are renumbered by BFS from the
initial state, exploring valuations in their canonical sorted order, so
recompiling a formula yields an identical automaton.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .ltl import (
    And,
    Always,
    Eventually,
    FalseBool,
    Formula,
    Implies,
    LassoWord,
    Next,
    Not,
    Prop,
    Or,
    TrueBool,
    Until,
    propositions,
    render,
)


class AutomatonBudgetError(RuntimeError):
    """The construction grew past the configured state budget."""


@dataclass(frozen=True)
class Dra:
    """Deterministic Rabin automaton over the full alphabet 2^Pi.

    `transitions[q][i]` is the successor of state q on `alphabet[i]`.
    A run is accepting iff some pair (fin, inf) has fin visited finitely
    often and inf infinitely often.
    """

    propositions: tuple[str, ...]
    alphabet: tuple[frozenset[str], ...]
    transitions: tuple[tuple[int, ...], ...]
    initial: int
    pairs: tuple[tuple[frozenset[int], frozenset[int]], ...]
    _val_index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._val_index.update({v: i for i, v in enumerate(self.alphabet)})

    @property
    def n_states(self) -> int:
        return len(self.transitions)

    def valuation_index(self, valuation) -> int:
        return self._val_index[frozenset(valuation) & frozenset(self.propositions)]


def step(d: Dra, q: int, valuation) -> int:
    return d.transitions[q][d.valuation_index(valuation)]


def run_prefix(d: Dra, valuations) -> int:
    q = d.initial
    for v in valuations:
        q = step(d, q, v)
    return q


def accepts_lasso(d: Dra, w: LassoWord) -> bool:
    """Decide acceptance of prefix.loop^w by cycle detection.

    The DRA state at the start of each loop iteration eventually
    repeats; the states visited between two repeats are exactly the
    states seen infinitely often.
    """
    q = run_prefix(d, w.prefix)
    seen: dict[int, int] = {}
    per_iter: list[set[int]] = []
    while q not in seen:
        seen[q] = len(per_iter)
        visited = set()
        for v in w.loop:
            q = step(d, q, v)
            visited.add(q)
        per_iter.append(visited)
    inf_states: set[int] = set()
    for vs in per_iter[seen[q]:]:
        inf_states |= vs
    return any(
        not (inf_states & fin) and (inf_states & inf)
        for fin, inf in d.pairs
    )


# --- negation normal form -------------------------------------------------

@dataclass(frozen=True)
class _Release(Formula):
    left: Formula
    right: Formula


def _nnf(f: Formula, neg: bool = False) -> Formula:
    if isinstance(f, TrueBool):
        return FalseBool() if neg else f
    if isinstance(f, FalseBool):
        return TrueBool() if neg else f
    if isinstance(f, Prop):
        return Not(f) if neg else f
    if isinstance(f, Not):
        return _nnf(f.child, not neg)
    if isinstance(f, And):
        l, r = _nnf(f.left, neg), _nnf(f.right, neg)
        return Or(l, r) if neg else And(l, r)
    if isinstance(f, Or):
        l, r = _nnf(f.left, neg), _nnf(f.right, neg)
        return And(l, r) if neg else Or(l, r)
    if isinstance(f, Implies):
        if neg:
            return And(_nnf(f.left), _nnf(f.right, True))
        return Or(_nnf(f.left, True), _nnf(f.right))
    if isinstance(f, Next):
        return Next(_nnf(f.child, neg))
    if isinstance(f, Always):
        if neg:
            return Until(TrueBool(), _nnf(f.child, True))
        return _Release(FalseBool(), _nnf(f.child))
    if isinstance(f, Eventually):
        if neg:
            return _Release(FalseBool(), _nnf(f.child, True))
        return Until(TrueBool(), _nnf(f.child))
    if isinstance(f, Until):
        l, r = _nnf(f.left, neg), _nnf(f.right, neg)
        return _Release(l, r) if neg else Until(l, r)
    raise TypeError(f"not a formula node: {f!r}")


def _nnf_key(g: Formula) -> str:
    if isinstance(g, _Release):
        return f"({_nnf_key(g.left)}) R ({_nnf_key(g.right)})"
    if isinstance(g, Until):
        return f"({_nnf_key(g.left)}) U ({_nnf_key(g.right)})"
    if isinstance(g, And):
        return f"({_nnf_key(g.left)}) & ({_nnf_key(g.right)})"
    if isinstance(g, Or):
        return f"({_nnf_key(g.left)}) | ({_nnf_key(g.right)})"
    if isinstance(g, Next):
        return f"X ({_nnf_key(g.child)})"
    if isinstance(g, Not):
        return f"! ({_nnf_key(g.child)})"
    if isinstance(g, Prop):
        return g.name
    if isinstance(g, TrueBool):
        return "true"
    if isinstance(g, FalseBool):
        return "false"
    raise TypeError(f"unexpected node in NNF: {g!r}")


# --- tableau: obligation sets with fulfillment marks ----------------------

# An alternative is (pos, neg, nxt, ful): the valuation must contain
# every literal in pos and none in neg; nxt is owed at the next step;
# ful lists the Until obligations this choice discharges now.

class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self, n: int = 1):
        self.used += n
        if self.used > self.limit:
            raise AutomatonBudgetError(
                f"automaton construction exceeded its work budget ({self.limit})"
            )


def _merge_alts(a, b, budget: _Budget):
    out = []
    for pa, na, xa, fa in a:
        for pb, nb, xb, fb in b:
            budget.spend()
            pos, neg = pa | pb, na | nb
            if pos & neg:
                continue
            out.append((pos, neg, xa | xb, fa | fb))
    return _dedupe_alts(out)


def _dedupe_alts(alts):
    # Keep, per (pos, neg, nxt), only maximal mark sets: a choice whose
    # marks are a subset of another identical choice is never useful.
    by_core: dict[tuple, list[frozenset]] = {}
    for pos, neg, nxt, ful in alts:
        core = (pos, neg, nxt)
        keep = True
        kept = by_core.setdefault(core, [])
        for other in list(kept):
            if ful <= other:
                keep = False
                break
            if other < ful:
                kept.remove(other)
        if keep:
            kept.append(ful)
    return [
        (pos, neg, nxt, ful)
        for (pos, neg, nxt), fuls in by_core.items()
        for ful in fuls
    ]


_EMPTY = frozenset()


def _formula_alts(g: Formula, memo: dict, budget: _Budget):
    got = memo.get(g)
    if got is not None:
        return got
    if isinstance(g, TrueBool):
        out = [(_EMPTY, _EMPTY, _EMPTY, _EMPTY)]
    elif isinstance(g, FalseBool):
        out = []
    elif isinstance(g, Prop):
        out = [(frozenset({g.name}), _EMPTY, _EMPTY, _EMPTY)]
    elif isinstance(g, Not):
        out = [(_EMPTY, frozenset({g.child.name}), _EMPTY, _EMPTY)]
    elif isinstance(g, Next):
        out = [(_EMPTY, _EMPTY, frozenset({g.child}), _EMPTY)]
    elif isinstance(g, And):
        out = _merge_alts(
            _formula_alts(g.left, memo, budget),
            _formula_alts(g.right, memo, budget),
            budget,
        )
    elif isinstance(g, Or):
        out = _dedupe_alts(
            _formula_alts(g.left, memo, budget)
            + _formula_alts(g.right, memo, budget)
        )
    elif isinstance(g, Until):
        fulfill = [
            (pos, neg, nxt, ful | {g})
            for pos, neg, nxt, ful in _formula_alts(g.right, memo, budget)
        ]
        defer = [
            (pos, neg, nxt | {g}, ful)
            for pos, neg, nxt, ful in _formula_alts(g.left, memo, budget)
        ]
        out = _dedupe_alts(fulfill + defer)
    elif isinstance(g, _Release):
        release = _merge_alts(
            _formula_alts(g.right, memo, budget),
            _formula_alts(g.left, memo, budget),
            budget,
        )
        defer = [
            (pos, neg, nxt | {g}, ful)
            for pos, neg, nxt, ful in _formula_alts(g.right, memo, budget)
        ]
        out = _dedupe_alts(release + defer)
    else:
        raise TypeError(f"unexpected node in NNF: {g!r}")
    memo[g] = out
    return out


def _state_alts(state: frozenset, memo_f: dict, memo_s: dict, budget: _Budget):
    got = memo_s.get(state)
    if got is not None:
        return got
    acc = [(_EMPTY, _EMPTY, _EMPTY, _EMPTY)]
    for member in sorted(state, key=_nnf_key):
        acc = _merge_alts(acc, _formula_alts(member, memo_f, budget), budget)
    memo_s[state] = acc
    return acc


def _norm_state(nxt) -> frozenset:
    return frozenset(g for g in nxt if not isinstance(g, TrueBool))


# --- Safra trees ----------------------------------------------------------

# Immutable node: (name, frozenset of NBA states, children tuple, marked).

class _Node:
    __slots__ = ("name", "label", "kids", "marked")

    def __init__(self, name, label, kids, marked):
        self.name = name
        self.label = label
        self.kids = kids
        self.marked = marked


def _thaw(node) -> _Node:
    return _Node(node[0], set(node[1]), [_thaw(k) for k in node[2]], node[3])


def _freeze(node: _Node):
    return (
        node.name,
        frozenset(node.label),
        tuple(_freeze(k) for k in node.kids),
        node.marked,
    )


def _walk(node: _Node):
    yield node
    for k in node.kids:
        yield from _walk(k)


def _subtree_remove(node: _Node, states: set):
    node.label -= states
    for k in node.kids:
        _subtree_remove(k, states)


def _safra_succ(tree, sym: int, delta, accepting: frozenset):
    """One Safra step: unmark, branch accepting, powerset-update,
    horizontal merge (older siblings win), drop empty nodes, and
    vertical merge (marking nodes whose children cover them)."""
    if tree is None:
        return None
    root = _thaw(tree)
    originals = list(_walk(root))
    used = {n.name for n in originals}
    for node in originals:
        node.marked = False
        branch = node.label & accepting
        if branch:
            name = 1
            while name in used:
                name += 1
            used.add(name)
            node.kids.append(_Node(name, set(branch), [], False))
    for node in _walk(root):
        new_label = set()
        for q in node.label:
            new_label.update(delta[q][sym])
        node.label = new_label

    def hmerge(node: _Node):
        claimed: set = set()
        for kid in node.kids:
            _subtree_remove(kid, claimed)
            claimed |= kid.label
            hmerge(kid)

    hmerge(root)
    if not root.label:
        return None

    def prune(node: _Node):
        node.kids = [k for k in node.kids if k.label]
        for k in node.kids:
            prune(k)

    prune(root)

    def vmerge(node: _Node):
        for k in node.kids:
            vmerge(k)
        if node.kids:
            covered = set()
            for k in node.kids:
                covered |= k.label
            if covered == node.label:
                node.kids = []
                node.marked = True

    vmerge(root)
    return _freeze(root)


def _tree_names(tree, out: set):
    if tree is None:
        return
    out.add(tree[0])
    for k in tree[2]:
        _tree_names(k, out)


def _tree_marked(tree, out: set):
    if tree is None:
        return
    if tree[3]:
        out.add(tree[0])
    for k in tree[2]:
        _tree_marked(k, out)


# --- the compiler ---------------------------------------------------------

_CACHE: dict[tuple, Dra] = {}


def canonical_alphabet(props) -> tuple[frozenset[str], ...]:
    names = tuple(sorted(set(props)))
    vals = [frozenset(c) for r in range(len(names) + 1) for c in combinations(names, r)]
    return tuple(sorted(vals, key=lambda v: tuple(sorted(v))))


def compile(formula: Formula, alphabet, state_budget: int = 10_000) -> Dra:
    """Compile `formula` over the declared alphabet into a DRA.

    Results are memoized by canonical rendering; identical calls from
    concurrent threads may compile twice but always return equal
    automata.  Raises AutomatonBudgetError when any construction stage
    grows past `state_budget` states.
    """
    props = tuple(sorted(set(alphabet)))
    extra = propositions(formula) - set(props)
    if extra:
        raise ValueError(f"formula uses propositions outside the alphabet: {sorted(extra)}")
    key = (render(formula), props, state_budget)
    got = _CACHE.get(key)
    if got is not None:
        return got
    dra = _compile_uncached(formula, props, state_budget)
    _CACHE[key] = dra
    return dra


def _compile_uncached(formula: Formula, props: tuple[str, ...], state_budget: int) -> Dra:
    alphabet = canonical_alphabet(props)
    n_val = len(alphabet)
    budget = _Budget(max(64 * state_budget, 1 << 16))
    root = _nnf(formula)

    untils = sorted(
        {g for g in _closure(root) if isinstance(g, Until)}, key=_nnf_key
    )
    until_ix = {u: i for i, u in enumerate(untils)}
    k = len(untils)

    # Generalized Buchi over obligation sets, marks on transitions.
    memo_f: dict = {}
    memo_s: dict = {}
    init_state = _norm_state(frozenset({root}))
    tgba_ids: dict[frozenset, int] = {init_state: 0}
    tgba_states = [init_state]
    tgba_trans: list[list[tuple[tuple[int, frozenset], ...]]] = []
    frontier = 0
    while frontier < len(tgba_states):
        state = tgba_states[frontier]
        frontier += 1
        alts = _state_alts(state, memo_f, memo_s, budget)
        per_sym = []
        for sym in alphabet:
            moves = []
            for pos, neg, nxt, ful in alts:
                if pos <= sym and not (neg & sym):
                    succ = _norm_state(nxt)
                    moves.append((succ, frozenset(until_ix[u] for u in ful)))
            moves = _max_marks(moves)
            ids = []
            for succ, marks in moves:
                sid = tgba_ids.get(succ)
                if sid is None:
                    sid = len(tgba_states)
                    if sid >= state_budget:
                        raise AutomatonBudgetError(
                            f"tableau automaton exceeded {state_budget} states"
                        )
                    tgba_ids[succ] = sid
                    tgba_states.append(succ)
                ids.append((sid, marks))
            per_sym.append(tuple(ids))
        tgba_trans.append(per_sym)

    owed = [
        frozenset(i for i, u in enumerate(untils) if u in st) for st in tgba_states
    ]

    # Degeneralize with a cascading wait counter; counter k is the
    # accepting copy and behaves like counter 0.
    nba_ids: dict[tuple[int, int], int] = {(0, 0): 0}
    nba_states = [(0, 0)]
    nba_delta: list[list[tuple[int, ...]]] = []
    frontier = 0
    while frontier < len(nba_states):
        z, c = nba_states[frontier]
        frontier += 1
        eff = 0 if c == k else c
        per_sym = []
        for sym_ix in range(n_val):
            succs = []
            for z2, marks in tgba_trans[z][sym_ix]:
                j = eff
                while j < k and (j not in owed[z] or j in marks):
                    j += 1
                tgt = (z2, j)
                tid = nba_ids.get(tgt)
                if tid is None:
                    tid = len(nba_states)
                    if tid >= state_budget:
                        raise AutomatonBudgetError(
                            f"degeneralized automaton exceeded {state_budget} states"
                        )
                    nba_ids[tgt] = tid
                    nba_states.append(tgt)
                if tid not in succs:
                    succs.append(tid)
            per_sym.append(tuple(succs))
        nba_delta.append(per_sym)

    if k == 0:
        nba_accepting = frozenset(range(len(nba_states)))
    else:
        nba_accepting = frozenset(
            i for i, (_, c) in enumerate(nba_states) if c == k
        )

    # Safra determinization; discovery order is already the canonical
    # BFS numbering because valuations are explored in sorted order.
    init_tree = (1, frozenset({0}), (), False)
    tree_ids = {init_tree: 0}
    trees = [init_tree]
    dra_trans: list[tuple[int, ...]] = []
    frontier = 0
    while frontier < len(trees):
        tree = trees[frontier]
        frontier += 1
        row = []
        for sym_ix in range(n_val):
            succ = _safra_succ(tree, sym_ix, nba_delta, nba_accepting)
            sid = tree_ids.get(succ)
            if sid is None:
                sid = len(trees)
                if sid >= state_budget:
                    raise AutomatonBudgetError(
                        f"determinized automaton exceeded {state_budget} states"
                    )
                tree_ids[succ] = sid
                trees.append(succ)
            row.append(sid)
        dra_trans.append(tuple(row))

    present: dict[int, set[int]] = {}
    marked: dict[int, set[int]] = {}
    for i, tree in enumerate(trees):
        names: set = set()
        _tree_names(tree, names)
        for n in names:
            present.setdefault(n, set()).add(i)
        mk: set = set()
        _tree_marked(tree, mk)
        for n in mk:
            marked.setdefault(n, set()).add(i)
    all_ids = set(range(len(trees)))
    pairs = tuple(
        (frozenset(all_ids - present[n]), frozenset(marked[n]))
        for n in sorted(marked)
    )

    return Dra(
        propositions=props,
        alphabet=alphabet,
        transitions=tuple(dra_trans),
        initial=0,
        pairs=pairs,
    )


def _max_marks(moves):
    by_succ: dict[frozenset, list[frozenset]] = {}
    for succ, marks in moves:
        kept = by_succ.setdefault(succ, [])
        keep = True
        for other in list(kept):
            if marks <= other:
                keep = False
                break
            if other < marks:
                kept.remove(other)
        if keep:
            kept.append(marks)
    return [(succ, marks) for succ, ms in by_succ.items() for marks in ms]


def _closure(g: Formula):
    seen = set()
    stack = [g]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        if isinstance(node, (And, Or, Until, _Release)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (Not, Next)):
            stack.append(node.child)
    return seen


def to_dot(d: Dra) -> str:
    """Graphviz rendering; acceptance pairs are listed in a header comment."""
    lines = ["digraph dra {"]
    for i, (fin, inf) in enumerate(d.pairs):
        lines.append(
            f"  // pair {i}: fin={sorted(fin)} inf={sorted(inf)}"
        )
    lines.append("  rankdir=LR;")
    lines.append('  __init [shape=point, label=""];')
    for q in range(d.n_states):
        lines.append(f'  q{q} [shape=circle, label="{q}"];')
    lines.append(f"  __init -> q{d.initial};")
    for q, row in enumerate(d.transitions):
        grouped: dict[int, list[str]] = {}
        for ix, tgt in enumerate(row):
            label = "{" + ",".join(sorted(d.alphabet[ix])) + "}"
            grouped.setdefault(tgt, []).append(label)
        for tgt in sorted(grouped):
            lab = " | ".join(grouped[tgt])
            lines.append(f'  q{q} -> q{tgt} [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines)
