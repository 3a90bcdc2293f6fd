"""Formula compilation checked against direct lasso evaluation."""

import random

import pytest

from ltlinfer.automata import (
    AutomatonBudgetError,
    accepts_lasso,
    canonical_alphabet,
    compile as compile_dra,
    run_prefix,
    step,
    to_dot,
)
from ltlinfer.ltl import LassoWord, eval_lasso, parse

from oracles import random_formula, random_lasso


def w(prefix, loop):
    return LassoWord(
        tuple(frozenset(v) for v in prefix),
        tuple(frozenset(v) for v in loop),
    )


@pytest.mark.parametrize(
    "text,props,n_states,n_pairs",
    [
        ("true", ("p",), 2, 1),
        ("p", ("p",), 3, 1),
        ("G (p)", ("p",), 3, 1),
        ("F (p)", ("p",), 4, 1),
        ("(p) U (q)", ("p", "q"), 7, 2),
        ("G (false)", ("p",), 2, 0),
        ("G ((X (vacuum)) U (roomClean))", ("vacuum", "roomClean"), 9, 1),
    ],
)
def test_compiled_sizes_are_stable(text, props, n_states, n_pairs):
    d = compile_dra(parse(text, props), props)
    assert (d.n_states, len(d.pairs)) == (n_states, n_pairs)


def test_always_acceptance():
    d = compile_dra(parse("G (p)", ("p",)), ("p",))
    assert accepts_lasso(d, w([], [["p"]]))
    assert not accepts_lasso(d, w([["p"]], [[]]))
    assert not accepts_lasso(d, w([], [["p"], []]))


def test_until_acceptance():
    d = compile_dra(parse("(p) U (q)", ("p", "q")), ("p", "q"))
    assert accepts_lasso(d, w([["p"], ["p"]], [["q"]]))
    assert not accepts_lasso(d, w([], [["p"]]))
    assert not accepts_lasso(d, w([[]], [["q"]]))


def test_nested_next_under_always():
    # holds iff p keeps recurring strictly after every position
    d = compile_dra(parse("G (X (F (p)))", ("p",)), ("p",))
    assert accepts_lasso(d, w([], [["p"], []]))
    assert accepts_lasso(d, w([], [["p"]]))
    assert not accepts_lasso(d, w([["p"]], [[]]))


def test_acceptance_matches_evaluator_on_random_instances():
    rng = random.Random(2024)
    props = ("p", "q")
    for _ in range(150):
        f = random_formula(rng, props, 3)
        d = compile_dra(f, props)
        for _ in range(10):
            word = random_lasso(rng, props)
            assert accepts_lasso(d, word) == eval_lasso(f, word)


def test_state_budget_is_enforced():
    f = parse("(G (F (p))) -> (G (F (q)))", ("p", "q"))
    with pytest.raises(AutomatonBudgetError):
        compile_dra(f, ("p", "q"), state_budget=8)


def test_compile_is_memoized_and_order_insensitive():
    f = parse("(p) U (q)", ("p", "q"))
    d1 = compile_dra(f, ("p", "q"))
    d2 = compile_dra(parse("p U q", ("q", "p")), ("q", "p"))
    assert d1 is d2
    assert d1.propositions == ("p", "q")


def test_alphabet_is_canonical():
    assert canonical_alphabet(("q", "p")) == (
        frozenset(),
        frozenset({"p"}),
        frozenset({"p", "q"}),
        frozenset({"q"}),
    )
    d = compile_dra(parse("G (p)", ("p", "q")), ("p", "q"))
    assert d.alphabet == canonical_alphabet(("p", "q"))


def test_transition_table_is_complete():
    for text, props in [("F (p)", ("p",)), ("(p) U (q)", ("p", "q"))]:
        d = compile_dra(parse(text, props), props)
        assert 0 <= d.initial < d.n_states
        for row in d.transitions:
            assert len(row) == len(d.alphabet)
            assert all(0 <= q < d.n_states for q in row)
        for fin, inf in d.pairs:
            assert fin <= set(range(d.n_states))
            assert inf <= set(range(d.n_states))


def test_run_prefix_follows_transitions():
    props = ("p",)
    d = compile_dra(parse("F (p)", props), props)
    val = frozenset(["p"])
    assert run_prefix(d, []) == d.initial
    assert run_prefix(d, [val]) == step(d, d.initial, val)


def test_to_dot_smoke():
    d = compile_dra(parse("G (p)", ("p",)), ("p",))
    text = to_dot(d)
    assert "digraph" in text
    assert "q0" in text
