"""NSGA-II machinery: sorting, operators, scoring, determinism."""

import random

import pytest

from ltlinfer.ltl import Always, complexity, parse, render
from ltlinfer.mdp import Trajectory
from ltlinfer.search import (
    FormulaScorer,
    SearchConfig,
    crossover,
    crowding_distance,
    init_population,
    mutate,
    nondominated_sort,
    run_nsga2,
    tree_depth,
    write_report_csv,
)


def dominates(a, b):
    return a[0] <= b[0] and a[1] <= b[1] and (a[0] < b[0] or a[1] < b[1])


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(population=7)
    with pytest.raises(ValueError):
        SearchConfig(population=2)
    with pytest.raises(ValueError):
        SearchConfig(objective="pareto")
    with pytest.raises(ValueError):
        SearchConfig(p_mutation=1.5)
    with pytest.raises(ValueError):
        SearchConfig(max_depth=1)


def test_nondominated_sort_layers():
    pts = [(0.0, 10), (5.0, 5), (10.0, 0), (6.0, 6), (12.0, 1)]
    fronts = nondominated_sort(pts)
    assert fronts[0] == [0, 1, 2]
    assert fronts[1] == [3, 4]


def test_nondominated_sort_keeps_duplicates_together():
    fronts = nondominated_sort([(1.0, 1), (1.0, 1)])
    assert fronts == [[0, 1]]


def test_crowding_distance_boundaries():
    pts = [(0.0, 4), (1.0, 2), (3.0, 0)]
    dist = crowding_distance(pts, [0, 1, 2])
    assert dist[0] == float("inf")
    assert dist[2] == float("inf")
    assert dist[1] == pytest.approx(3.0 / 3.0 + 4.0 / 4.0)


def test_crowding_distance_handles_duplicate_scores():
    pts = [(1.0, 2), (1.0, 2), (1.0, 2)]
    dist = crowding_distance(pts, [0, 1, 2])
    assert dist[0] == float("inf")
    assert dist[2] == float("inf")
    assert dist[1] == 0.0


def test_init_population_shape():
    cfg = SearchConfig(population=12, generations=1, runs=1)
    pop = init_population(cfg, ("p", "q"), random.Random(0))
    assert len(pop) == 12
    assert all(isinstance(f, Always) for f in pop)
    assert all(tree_depth(f) <= cfg.max_depth for f in pop)
    again = init_population(cfg, ("p", "q"), random.Random(0))
    assert again == pop


def test_crossover_respects_depth_and_root():
    cfg = SearchConfig(population=8, generations=1, runs=1, max_depth=5)
    rng = random.Random(3)
    pop = init_population(cfg, ("p",), rng)
    for _ in range(200):
        a, b = rng.choice(pop), rng.choice(pop)
        ca, cb = crossover(a, b, rng, cfg)
        for child in (ca, cb):
            assert tree_depth(child) <= cfg.max_depth
            assert isinstance(child, Always)


def test_mutation_probability_zero_is_identity():
    cfg = SearchConfig(population=8, generations=1, runs=1, p_mutation=0.0)
    rng = random.Random(4)
    pop = init_population(cfg, ("p",), rng)
    assert [mutate(f, rng, cfg, ("p",)) for f in pop] == pop


def test_mutation_respects_depth_and_root():
    cfg = SearchConfig(population=8, generations=1, runs=1, p_mutation=1.0)
    rng = random.Random(5)
    pop = init_population(cfg, ("p", "q"), rng)
    for f in pop:
        for _ in range(50):
            g = mutate(f, rng, cfg, ("p", "q"))
            assert tree_depth(g) <= cfg.max_depth
            assert isinstance(g, Always)


def test_scorer_caches_and_scores(slim, slim_demos):
    cfg = SearchConfig(population=4, generations=1, runs=1, objective="action")
    scorer = FormulaScorer(slim, slim_demos, cfg)
    f = parse("G (good)", slim.propositions)
    first = scorer.score(f)
    assert first[0] == pytest.approx(-0.495, abs=1e-6)
    assert first[1] == 2
    assert scorer.score(f) is first


def test_scorer_absorbs_compilation_blowups(slim, slim_demos):
    cfg = SearchConfig(
        population=4, generations=1, runs=1, objective="state", state_budget=2
    )
    scorer = FormulaScorer(slim, slim_demos, cfg)
    f = parse("(G (F (good))) -> (G (F (! (good))))", slim.propositions)
    obj, fc = scorer.score(f)
    assert obj == scorer.worst == 4.0 / (1.0 - cfg.gamma)
    assert fc == complexity(f)


def test_scorer_rejects_foreign_demos(slim):
    cfg = SearchConfig(population=4, generations=1, runs=1)
    wrong_start = Trajectory((0, 1), (1,))
    with pytest.raises(ValueError, match="initial state"):
        FormulaScorer(slim, [wrong_start], cfg)
    impossible = Trajectory((1, 0), (0,))
    with pytest.raises(ValueError, match="invalid demonstration"):
        FormulaScorer(slim, [impossible], cfg)


def test_search_is_deterministic(slim, slim_demos, tmp_path):
    cfg = SearchConfig(population=10, generations=2, runs=2, objective="action", seed=7)
    r1 = run_nsga2(cfg, slim, slim_demos)
    r2 = run_nsga2(cfg, slim, slim_demos)
    assert r1.rows == r2.rows
    assert [run.front for run in r1.per_run] == [run.front for run in r2.per_run]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_report_csv(r1, p1)
    write_report_csv(r2, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_threads_do_not_change_results(slim, slim_demos):
    plain = SearchConfig(population=10, generations=2, runs=1, objective="state", seed=3)
    threaded = SearchConfig(
        population=10, generations=2, runs=1, objective="state", seed=3, threads=2
    )
    assert run_nsga2(plain, slim, slim_demos).rows == run_nsga2(threaded, slim, slim_demos).rows


def test_report_rows_are_consistent(slim, slim_demos):
    cfg = SearchConfig(population=10, generations=2, runs=2, objective="action", seed=2)
    report = run_nsga2(cfg, slim, slim_demos)
    assert report.rows
    assert len(report.run_seconds) == cfg.runs
    for text, obj, fc, runs in report.rows:
        f = parse(text, slim.propositions)
        assert render(f) == text
        assert complexity(f) == fc
        assert 1 <= runs <= cfg.runs
    pts = [(obj, fc) for _, obj, fc, _ in report.rows]
    for i, a in enumerate(pts):
        for j, b in enumerate(pts):
            assert i == j or not dominates(a, b)
    # rows come sorted by how often they were Pareto-efficient
    counts = [runs for *_, runs in report.rows]
    assert counts == sorted(counts, reverse=True)


def test_csv_layout(slim, slim_demos, tmp_path):
    cfg = SearchConfig(population=8, generations=1, runs=1, objective="state", seed=0)
    report = run_nsga2(cfg, slim, slim_demos)
    path = tmp_path / "report.csv"
    write_report_csv(report, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "formula,objective,complexity,runs_pareto_efficient"
    assert len(lines) == len(report.rows) + 1
