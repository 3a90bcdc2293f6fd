"""Model container, JSON round trips, trajectories, and policies."""

import json
import math

import pytest

from ltlinfer.mdp import (
    StationaryPolicy,
    Trajectory,
    dump_mdp,
    dump_trajectories,
    load_mdp,
    load_trajectories,
    make_mdp,
    sample_trajectory,
    uniform_random_policy,
    validate_trajectory,
)


def two_state(p_stay=0.25):
    return make_mdp(
        ["p"],
        {
            "a": ({"p"}, {"go": {"a": p_stay, "b": 1.0 - p_stay}, "stay": {"a": 1.0}}),
            "b": (set(), {"go": {"b": 1.0}}),
        },
        "a",
    )


def test_make_mdp_assigns_ids():
    m = two_state()
    assert m.state_names == ("a", "b")
    assert m.action_names == ("go", "stay")
    assert m.initial == 0
    assert m.available(0) == (0, 1)
    assert m.available(1) == (0,)
    assert dict(m.transitions[0][m.action_index["go"]]) == {0: 0.25, 1: 0.75}


def test_propositions_are_sorted_and_deduped():
    m = make_mdp(["q", "p", "q"], {"s": ({"p"}, {"a": {"s": 1.0}})}, "s")
    assert m.propositions == ("p", "q")


def test_make_mdp_validates():
    with pytest.raises(ValueError, match="sum"):
        make_mdp(["p"], {"s": (set(), {"a": {"s": 0.9}})}, "s")
    with pytest.raises(ValueError, match="unknown propositions"):
        make_mdp(["p"], {"s": ({"x"}, {"a": {"s": 1.0}})}, "s")
    with pytest.raises(ValueError, match="no available action"):
        make_mdp(["p"], {"s": (set(), {})}, "s")
    with pytest.raises(ValueError, match="out of"):
        make_mdp(["p"], {"s": (set(), {"a": {"s": -0.5, "t": 1.5}}),
                         "t": (set(), {"a": {"t": 1.0}})}, "s")


def test_mdp_json_roundtrip(tmp_path):
    m = two_state()
    path = tmp_path / "m.json"
    dump_mdp(m, path)
    m2 = load_mdp(path)
    assert m2 == m
    path2 = tmp_path / "m2.json"
    dump_mdp(m2, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_load_mdp_renormalizes_small_drift(tmp_path):
    doc = {
        "propositions": ["p"],
        "states": [
            {"name": "s", "labels": [], "actions": {"a": {"s": 0.4999999, "t": 0.5}}},
            {"name": "t", "labels": ["p"], "actions": {"a": {"t": 1.0}}},
        ],
        "initial": "s",
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    with pytest.warns(UserWarning):
        m = load_mdp(path)
    total = sum(p for _, p in m.transitions[0][0])
    assert math.isclose(total, 1.0, abs_tol=1e-12)


def test_load_mdp_rejects_large_drift(tmp_path):
    doc = {
        "propositions": ["p"],
        "states": [
            {"name": "s", "labels": [], "actions": {"a": {"s": 0.7}}},
        ],
        "initial": "s",
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load_mdp(path)


def test_trajectory_shape_is_checked():
    with pytest.raises(ValueError):
        Trajectory((0, 1), (0, 0))
    traj = Trajectory((0, 1, 0), (0, 0))
    assert traj.horizon == 2


def test_validate_trajectory_messages():
    m = two_state()
    ok = Trajectory((0, 1, 1), (0, 0))
    assert validate_trajectory(m, ok) is None
    unavailable = Trajectory((1, 1), (1,))
    assert "unavailable" in validate_trajectory(m, unavailable)
    impossible = Trajectory((1, 0), (0,))
    assert "impossible transition" in validate_trajectory(m, impossible)
    out_of_range = Trajectory((0, 7), (0,))
    assert "out of range" in validate_trajectory(m, out_of_range)


def test_trajectories_json_roundtrip(tmp_path):
    m = two_state()
    trajs = [Trajectory((0, 1, 1), (0, 0)), Trajectory((0, 0), (1,))]
    path = tmp_path / "t.json"
    dump_trajectories(trajs, m, path)
    back = load_trajectories(path, m)
    assert back == trajs
    path2 = tmp_path / "t2.json"
    dump_trajectories(back, m, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_load_trajectories_rejects_invalid(tmp_path):
    m = two_state()
    doc = {"trajectories": [{"steps": [{"state": "b", "action": "stay"}], "final": "b"}]}
    path = tmp_path / "t.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="invalid trajectory"):
        load_trajectories(path, m)


def test_uniform_random_policy():
    m = two_state()
    pol = uniform_random_policy(m)
    assert pol.weights[0] == {0: 0.5, 1: 0.5}
    assert pol.weights[1] == {0: 1.0}
    pol.validate(m)
    with pytest.raises(ValueError):
        StationaryPolicy(({0: 0.5, 1: 0.5}, {1: 1.0})).validate(m)
    with pytest.raises(ValueError):
        StationaryPolicy(({0: 0.7, 1: 0.5}, {0: 1.0})).validate(m)


def test_sample_trajectory_is_deterministic():
    m = two_state()
    pol = uniform_random_policy(m)
    t1 = sample_trajectory(m, pol, 12, seed=42)
    t2 = sample_trajectory(m, pol, 12, seed=42)
    assert t1 == t2
    assert t1.horizon == 12
    assert t1.states[0] == m.initial
    assert validate_trajectory(m, t1) is None
    with pytest.raises(ValueError):
        sample_trajectory(m, pol, -1, seed=0)


def test_sample_trajectory_matches_transition_frequencies():
    m = two_state(p_stay=0.25)
    pol = StationaryPolicy(({0: 1.0}, {0: 1.0}))  # always "go"
    n = 10_000
    stays = sum(sample_trajectory(m, pol, 1, seed=i).states[1] == 0 for i in range(n))
    freq = stays / n
    se = math.sqrt(0.25 * 0.75 / n)
    assert abs(freq - 0.25) < 3 * se
