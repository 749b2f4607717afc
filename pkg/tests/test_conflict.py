"""Conflict predicate and graph construction, both build paths."""

import random

import pytest

from blocksched import Transaction, conflict_graph, conflicts, dependency_dag


def tx(i, reads=(), writes=()):
    return Transaction(i, 1, 0, frozenset(reads), frozenset(writes))


def test_write_write_overlap_conflicts():
    assert conflicts(tx(0, writes={"k"}), tx(1, writes={"k"}))


def test_write_read_overlap_conflicts_both_directions():
    a, b = tx(0, writes={"k"}), tx(1, reads={"k"})
    assert conflicts(a, b) and conflicts(b, a)


def test_read_read_overlap_is_harmless():
    assert not conflicts(tx(0, reads={"k"}), tx(1, reads={"k"}))


def test_disjoint_access_sets_never_conflict():
    assert not conflicts(tx(0, reads={"a"}, writes={"b"}), tx(1, reads={"c"}, writes={"d"}))


def test_self_read_of_own_write_does_not_fabricate_conflicts():
    a = tx(0, reads={"k"}, writes={"k"})
    assert not conflicts(a, tx(1, reads={"x"}, writes={"y"}))


def hot_pool():
    # two writers of one key, a reader of it, and one bystander
    return [
        tx(0, writes={"hot"}),
        tx(1, writes={"hot"}),
        tx(2, reads={"hot"}),
        tx(3, writes={"cold"}),
    ]


def test_graph_edges_and_degrees():
    graph = conflict_graph(hot_pool())
    assert sorted(graph.edges()) == [(0, 1), (0, 2), (1, 2)]
    assert graph.edge_count == 3
    assert graph.degree(0) == 2
    assert graph.neighbors(3) == frozenset()


def test_dag_orients_edges_by_position():
    dag = dependency_dag(hot_pool())
    assert sorted(dag.edges()) == [(0, 1), (0, 2), (1, 2)]
    assert dag.successors[0] == (1, 2)
    assert dag.predecessors[2] == (0, 1)
    assert dag.in_degree(0) == 0 and dag.out_degree(2) == 0


def test_dag_edges_always_point_forward():
    rng = random.Random(7)
    txs = random_txs(rng, 60)
    dag = dependency_dag(txs)
    assert all(i < j for i, j in dag.edges())


def random_txs(rng, n, universe=12):
    txs = []
    for i in range(n):
        picks = [f"k{rng.randrange(universe)}" for _ in range(rng.randint(1, 3))]
        cut = rng.randint(0, len(picks))
        txs.append(tx(i, reads=picks[:cut], writes=picks[cut:]))
    return txs


@pytest.mark.parametrize("seed", range(20))
def test_indexed_build_matches_naive_reference(seed):
    txs = random_txs(random.Random(seed), 40)
    fast = conflict_graph(txs, method="indexed")
    slow = conflict_graph(txs, method="naive")
    assert fast.adjacency == slow.adjacency


def test_dag_is_graph_restricted_to_forward_edges():
    txs = random_txs(random.Random(3), 50)
    graph = conflict_graph(txs)
    dag = dependency_dag(txs)
    assert sorted(dag.edges()) == sorted(graph.edges())


def test_unknown_build_method_rejected():
    with pytest.raises(ValueError, match="method"):
        conflict_graph([tx(0)], method="magic")


def test_empty_and_singleton_graphs():
    assert conflict_graph([]).edge_count == 0
    assert list(dependency_dag([tx(0, writes={"k"})]).edges()) == []
