"""Labeled MDPs, trajectories, and stationary policies.

States and actions are dense integer ids internally; display names are
kept for file I/O and reporting.  Action ids are assigned by sorting the
action names, so a model dumped to JSON and reloaded is identical.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass


@dataclass
class Mdp:
    propositions: tuple[str, ...]
    state_names: tuple[str, ...]
    labels: tuple[frozenset[str], ...]
    action_names: tuple[str, ...]
    # transitions[s][a] = ((successor, probability), ...); keys are
    # exactly the available actions at s.
    transitions: tuple[dict[int, tuple[tuple[int, float], ...]], ...]
    initial: int

    def __post_init__(self):
        self.state_index = {n: i for i, n in enumerate(self.state_names)}
        self.action_index = {n: i for i, n in enumerate(self.action_names)}

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    @property
    def n_actions(self) -> int:
        return len(self.action_names)

    def available(self, s: int) -> tuple[int, ...]:
        return tuple(sorted(self.transitions[s]))

    def validate(self):
        if not (0 <= self.initial < self.n_states):
            raise ValueError("initial state out of range")
        props = set(self.propositions)
        for s, lab in enumerate(self.labels):
            if not lab <= props:
                raise ValueError(
                    f"state {self.state_names[s]} labeled with unknown propositions "
                    f"{sorted(lab - props)}"
                )
        for s, acts in enumerate(self.transitions):
            if not acts:
                raise ValueError(f"state {self.state_names[s]} has no available action")
            for a, succs in acts.items():
                total = 0.0
                for t, p in succs:
                    if not (0 <= t < self.n_states):
                        raise ValueError("transition target out of range")
                    if p < 0.0 or p > 1.0:
                        raise ValueError(
                            f"probability {p} out of [0,1] at "
                            f"({self.state_names[s]}, {self.action_names[a]})"
                        )
                    total += p
                if abs(total - 1.0) > 1e-9:
                    raise ValueError(
                        f"probabilities sum to {total} at "
                        f"({self.state_names[s]}, {self.action_names[a]})"
                    )


def make_mdp(propositions, states, initial: str) -> Mdp:
    """Build an Mdp from name-keyed data.

    `states` maps state name -> (labels, {action name: {successor name:
    probability}}); insertion order fixes state ids, sorted order fixes
    action ids.
    """
    state_names = tuple(states)
    state_ix = {n: i for i, n in enumerate(state_names)}
    action_names = tuple(sorted({a for _, acts in states.values() for a in acts}))
    action_ix = {n: i for i, n in enumerate(action_names)}
    labels = []
    transitions = []
    for name in state_names:
        lab, acts = states[name]
        labels.append(frozenset(lab))
        row: dict[int, tuple[tuple[int, float], ...]] = {}
        for a, dist in acts.items():
            row[action_ix[a]] = tuple(
                (state_ix[t], float(p)) for t, p in dist.items()
            )
        transitions.append(row)
    m = Mdp(
        propositions=tuple(sorted(set(propositions))),
        state_names=state_names,
        labels=tuple(labels),
        action_names=action_names,
        transitions=tuple(transitions),
        initial=state_ix[initial],
    )
    m.validate()
    return m


def load_mdp(path) -> Mdp:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    states = {}
    for entry in doc["states"]:
        name = entry["name"]
        if name in states:
            raise ValueError(f"duplicate state name {name!r}")
        acts = {}
        for a, dist in entry["actions"].items():
            total = sum(dist.values())
            if abs(total - 1.0) > 1e-6:
                raise ValueError(
                    f"probabilities for ({name}, {a}) sum to {total}"
                )
            if abs(total - 1.0) > 1e-9:
                warnings.warn(
                    f"renormalizing ({name}, {a}): probabilities sum to {total}"
                )
                dist = {t: p / total for t, p in dist.items()}
            acts[a] = dist
        states[name] = (entry["labels"], acts)
    return make_mdp(doc["propositions"], states, doc["initial"])


def dump_mdp(m: Mdp, path):
    doc = {
        "propositions": list(m.propositions),
        "states": [
            {
                "name": m.state_names[s],
                "labels": sorted(m.labels[s]),
                "actions": {
                    m.action_names[a]: {
                        m.state_names[t]: p for t, p in succs
                    }
                    for a, succs in sorted(m.transitions[s].items())
                },
            }
            for s in range(m.n_states)
        ],
        "initial": m.state_names[m.initial],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class Trajectory:
    """s_0 a_0 s_1 ... a_{T-1} s_T; states has one more entry than actions."""

    states: tuple[int, ...]
    actions: tuple[int, ...]

    def __post_init__(self):
        if len(self.states) != len(self.actions) + 1:
            raise ValueError("trajectory needs exactly one more state than actions")

    @property
    def horizon(self) -> int:
        return len(self.actions)


def validate_trajectory(m: Mdp, traj: Trajectory):
    """Return None if traj is a trajectory of m, else a reason string."""
    for i, s in enumerate(traj.states):
        if not (0 <= s < m.n_states):
            return f"state id {s} out of range at index {i}"
    for t, a in enumerate(traj.actions):
        s, s2 = traj.states[t], traj.states[t + 1]
        succs = m.transitions[s].get(a)
        if succs is None:
            return (
                f"action {m.action_names[a]} unavailable in state "
                f"{m.state_names[s]} at step {t}"
            )
        if not any(tgt == s2 and p > 0.0 for tgt, p in succs):
            return (
                f"impossible transition {m.state_names[s]} -"
                f"{m.action_names[a]}-> {m.state_names[s2]} at step {t}"
            )
    return None


def load_trajectories(path, m: Mdp) -> list[Trajectory]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    out = []
    for entry in doc["trajectories"]:
        states = []
        actions = []
        for step in entry["steps"]:
            states.append(m.state_index[step["state"]])
            actions.append(m.action_index[step["action"]])
        states.append(m.state_index[entry["final"]])
        traj = Trajectory(tuple(states), tuple(actions))
        problem = validate_trajectory(m, traj)
        if problem is not None:
            raise ValueError(f"invalid trajectory: {problem}")
        out.append(traj)
    return out


def dump_trajectories(trajs, m: Mdp, path):
    doc = {
        "trajectories": [
            {
                "steps": [
                    {
                        "state": m.state_names[traj.states[t]],
                        "action": m.action_names[traj.actions[t]],
                    }
                    for t in range(traj.horizon)
                ],
                "final": m.state_names[traj.states[-1]],
            }
            for traj in trajs
        ]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class StationaryPolicy:
    """weights[s] maps action id -> probability; support must be available."""

    weights: tuple[dict[int, float], ...]

    def validate(self, m: Mdp):
        for s, dist in enumerate(self.weights):
            avail = set(m.transitions[s])
            if not set(dist) <= avail:
                raise ValueError(f"policy uses unavailable action in state {s}")
            if abs(sum(dist.values()) - 1.0) > 1e-9:
                raise ValueError(f"policy weights at state {s} do not sum to 1")


def uniform_random_policy(m: Mdp) -> StationaryPolicy:
    weights = []
    for s in range(m.n_states):
        acts = m.available(s)
        weights.append({a: 1.0 / len(acts) for a in acts})
    return StationaryPolicy(tuple(weights))


def sample_trajectory(m: Mdp, policy: StationaryPolicy, horizon: int, seed: int) -> Trajectory:
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    rng = random.Random(seed)
    s = m.initial
    states = [s]
    actions = []
    for _ in range(horizon):
        dist = policy.weights[s]
        acts = sorted(dist)
        a = rng.choices(acts, weights=[dist[x] for x in acts])[0]
        succs = m.transitions[s][a]
        s = rng.choices(
            [t for t, _ in succs], weights=[p for _, p in succs]
        )[0]
        actions.append(a)
        states.append(s)
    return Trajectory(tuple(states), tuple(actions))
