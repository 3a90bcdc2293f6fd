"""Shared fixtures: benchmark domains and reference demonstrations."""

import pytest

from ltlinfer.domains import cleaningworld, slimchance
from ltlinfer.mdp import Trajectory


@pytest.fixture(scope="session")
def slim():
    return slimchance()


@pytest.fixture(scope="session")
def slim_demos(slim):
    """Three 10-step always-try demonstrations; the second one gets lucky
    at the first step and immediately falls back."""
    good = slim.state_index["s_GOOD"]
    bad = slim.state_index["s_BAD"]
    do_try = slim.action_index["try"]
    flat = Trajectory((bad,) * 11, (do_try,) * 10)
    lucky = Trajectory((bad, good) + (bad,) * 9, (do_try,) * 10)
    return [flat, lucky, flat]


@pytest.fixture(scope="session")
def cw():
    return cleaningworld()


@pytest.fixture(scope="session")
def cw_small():
    return cleaningworld(dirt0=3, battery0=2, capacity=2)


@pytest.fixture(scope="session")
def cw_small_demos(cw_small):
    """Reduced-scale analogue of the reference sweep: with a two-cell
    battery the robot must recharge after every single vacuum pass."""
    names = [
        "d3_b2_undocked_none",
        "d2_b1_undocked_vacuum",
        "d2_b1_docked_dock",
        "d2_b2_docked_wait",
        "d2_b2_undocked_undock",
        "d1_b1_undocked_vacuum",
        "d1_b1_docked_dock",
        "d1_b2_docked_wait",
        "d1_b2_undocked_undock",
        "d0_b1_undocked_vacuum",
        "d0_b1_docked_dock",
    ]
    acts = [
        "vacuum",
        "dock",
        "wait",
        "undock",
        "vacuum",
        "dock",
        "wait",
        "undock",
        "vacuum",
        "dock",
    ]
    traj = Trajectory(
        tuple(cw_small.state_index[n] for n in names),
        tuple(cw_small.action_index[a] for a in acts),
    )
    return [traj, traj, traj]


@pytest.fixture(scope="session")
def cw_demos(cw):
    """Three copies of a hand-written sweep: vacuum twice, recharge, and
    repeat, ending with a comfortable battery and one dirt level left."""
    names = [
        "d5_b3_undocked_none",
        "d4_b2_undocked_vacuum",
        "d3_b1_undocked_vacuum",
        "d3_b1_docked_dock",
        "d3_b3_docked_wait",
        "d3_b3_undocked_undock",
        "d2_b2_undocked_vacuum",
        "d1_b1_undocked_vacuum",
        "d1_b1_docked_dock",
        "d1_b3_docked_wait",
        "d1_b3_undocked_undock",
    ]
    acts = [
        "vacuum",
        "vacuum",
        "dock",
        "wait",
        "undock",
        "vacuum",
        "vacuum",
        "dock",
        "wait",
        "undock",
    ]
    traj = Trajectory(
        tuple(cw.state_index[n] for n in names),
        tuple(cw.action_index[a] for a in acts),
    )
    return [traj, traj, traj]
