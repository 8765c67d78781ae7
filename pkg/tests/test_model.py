import math

import pytest
from hypothesis import given, settings, strategies as st

from stlgo import (
    Edge,
    GraphTrajectory,
    MasRun,
    MasTrajectory,
    MultigraphSnapshot,
    TimeOutOfRangeError,
    UnknownGraphTypeError,
    agent_neighbors,
    neighbor_multiplicities,
    neighbors,
)

from conftest import random_run
import random


def two_edge_run(directed=False, edges=None):
    edges = edges if edges is not None else [(1, 3, 1, 6.0), (2, 3, 1, 8.0)]
    snap = MultigraphSnapshot.make("c", directed, edges)
    traj = MasTrajectory.from_states([[(0.0,)] * 3])
    return MasRun(traj, GraphTrajectory(0, static={"c": snap}))


def test_neighbors_weight_window_filters():
    run = two_edge_run()
    got = neighbors(run, "c", 0, 3, "in", (0.0, 7.0))
    assert got == {Edge(1, 3, 1, 6.0)}


def test_neighbors_isolated_agent_is_empty():
    run = two_edge_run(edges=[(1, 3, 1, 6.0)])
    assert neighbors(run, "c", 0, 2, "in", (-math.inf, math.inf)) == frozenset()
    assert neighbors(run, "c", 0, 2, "out", (-math.inf, math.inf)) == frozenset()


def test_parallel_edges_stay_distinct():
    run = two_edge_run(directed=True, edges=[(1, 2, 1, 5.0), (1, 2, 2, 9.0)])
    got = neighbors(run, "c", 0, 1, "out", (0.0, 10.0))
    assert got == {Edge(1, 2, 1, 5.0), Edge(1, 2, 2, 9.0)}
    assert agent_neighbors(run, "c", 0, 1, "out", (0.0, 10.0)) == {2}
    assert neighbor_multiplicities(run, "c", 0, 1, "out", (0.0, 10.0)) == {2: 2}


def test_agent_neighbors_union_over_sets(fig_run):
    got = agent_neighbors(fig_run, "d", 0, [4, 5], "in", (0.0, 10.0))
    assert got == {3, 6, 7}


def test_fig_graph_neighbor_set(fig_run):
    assert agent_neighbors(fig_run, "d", 0, 3, "in", (0.0, 10.0)) == {1, 2, 4, 5}


def test_unknown_graph_and_time_errors(fig_run):
    with pytest.raises(UnknownGraphTypeError, match="unknown graph type"):
        neighbors(fig_run, "nope", 0, 1, "in")
    with pytest.raises(TimeOutOfRangeError, match="time out of range"):
        neighbors(fig_run, "d", 5, 1, "in")


def test_undirected_in_equals_out_modulo_orientation(fig_run):
    for i in range(1, 8):
        ins = neighbors(fig_run, "d", 0, i, "in")
        outs = neighbors(fig_run, "d", 0, i, "out")
        assert {(e.src, e.index, e.weight) for e in ins} == {
            (e.dst, e.index, e.weight) for e in outs
        }


def test_duplicate_edge_key_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        MultigraphSnapshot.make("c", False, [(1, 2, 1, 5.0), (2, 1, 1, 7.0)])


def test_nan_weight_rejected():
    with pytest.raises(ValueError, match="NaN"):
        MultigraphSnapshot.make("c", False, [(1, 2, 1, float("nan"))])


def test_self_loops_are_permitted_and_counted():
    run = two_edge_run(directed=True, edges=[(2, 2, 1, 1.0)])
    assert neighbors(run, "c", 0, 2, "in") == {Edge(2, 2, 1, 1.0)}
    assert neighbors(run, "c", 0, 2, "out") == {Edge(2, 2, 1, 1.0)}


def test_trajectory_validation():
    with pytest.raises(ValueError, match="dimension"):
        MasTrajectory.from_states([[(1.0,), (2.0, 3.0)]])
    with pytest.raises(ValueError, match="non-finite"):
        MasTrajectory.from_states([[(float("nan"),)]])


def test_run_cross_checks_graph_agents():
    snap = MultigraphSnapshot.make("c", False, [(1, 9, 1, 1.0)])
    traj = MasTrajectory.from_states([[(0.0,)] * 3])
    with pytest.raises(ValueError, match="agent 9"):
        MasRun(traj, GraphTrajectory(0, static={"c": snap}))


def test_graph_trajectory_needs_full_coverage():
    snap = MultigraphSnapshot.make("c", False, [])
    with pytest.raises(ValueError, match="snapshots"):
        GraphTrajectory(2, dynamic={"c": (snap,)})


def test_with_graph_replaces_and_adds(fig_run):
    extra = MultigraphSnapshot.make("x", True, [(1, 2, 1, 1.0)])
    run2 = fig_run.with_graph("x", extra)
    assert "x" in run2.graphs.types
    assert "x" not in fig_run.graphs.types  # immutability: original untouched


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), lo=st.integers(-2, 8), width=st.integers(0, 8))
def test_neighbors_monotone_in_weight_window(seed, lo, width):
    rng = random.Random(seed)
    run = random_run(rng, max_agents=5, max_len=3)
    tag = sorted(run.graphs.types)[seed % len(run.graphs.types)]
    t = seed % (run.length + 1)
    i = 1 + seed % run.num_agents
    direction = "in" if seed % 2 else "out"
    small = neighbors(run, tag, t, i, direction, (float(lo), float(lo + width)))
    big = neighbors(run, tag, t, i, direction, (float(lo - 1), float(lo + width + 2)))
    assert small <= big
    assert agent_neighbors(run, tag, t, i, direction) <= set(
        range(1, run.num_agents + 1)
    )


def test_infinite_weights_allowed_and_filtered():
    run = two_edge_run(
        directed=True,
        edges=[(1, 2, 1, math.inf), (1, 2, 2, -math.inf), (1, 2, 3, 4.0)],
    )
    everything = neighbors(run, "c", 0, 1, "out", (-math.inf, math.inf))
    assert len(everything) == 3
    finite_window = neighbors(run, "c", 0, 1, "out", (0.0, 10.0))
    assert {e.index for e in finite_window} == {3}
    upper_open = neighbors(run, "c", 0, 1, "out", (0.0, math.inf))
    assert {e.index for e in upper_open} == {1, 3}


def test_reversed_weight_window_rejected():
    run = two_edge_run()
    with pytest.raises(ValueError, match="reversed"):
        neighbors(run, "c", 0, 1, "in", (5.0, 2.0))
