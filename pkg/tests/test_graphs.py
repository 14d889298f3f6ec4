import itertools

import pytest

from bimix import graphs
from bimix.graphs import (BipartiteStarGraph, EnumerationBoundError, Hypergraph, crucial_star_check,
                          edge_precedes, enumerate_bipartite_star, enumerate_connected,
                          enumerate_connected_hypergraphs, enumerate_trees, hypergraph_to_bipartite,
                          kruskal_tree_of, partition_check, set_partitions)


@pytest.mark.parametrize("n,count", [(1, 1), (2, 1), (3, 4), (4, 38), (5, 728)])
def test_connected_counts(n, count):
    assert len(enumerate_connected(n)) == count


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_cayley_tree_counts(n):
    assert len(enumerate_trees(n)) == n ** (n - 2)


def test_edge_order_is_strict_total():
    es = graphs.all_edges(6)
    for a in es:
        assert not edge_precedes(a, a)
    for a, b in itertools.combinations(es, 2):
        assert edge_precedes(a, b) != edge_precedes(b, a)
    for a, b, c in itertools.permutations(es[:10], 3):
        if edge_precedes(a, b) and edge_precedes(b, c):
            assert edge_precedes(a, c)


@pytest.mark.parametrize("n,count", [(3, 4), (4, 38), (5, 728)])
def test_partition_scheme(n, count):
    rep = partition_check(n)
    assert rep["passed"]
    assert rep["sum_2_pow_eprime"] == count
    assert rep["misplaced"] == 0


def test_kruskal_of_tree_is_itself():
    for t in enumerate_trees(4):
        assert kruskal_tree_of(t).edges == t.edges


def test_crucial_star_lemma():
    rep = crucial_star_check(6)
    assert rep["passed"]
    assert not rep["violations"]


def test_star_class_small_cases():
    assert len(enumerate_bipartite_star(1, 1)) == 0
    # two stars, one cloud: cloud must see both; the star edge is optional
    assert len(enumerate_bipartite_star(2, 1)) == 2
    assert len(enumerate_bipartite_star(2, 1, trees_only=True)) == 1


def test_leaf_cloud_trees_are_spanning_trees_without_cloud_edges():
    for m, r in ((2, 1), (3, 1), (2, 2), (3, 2)):
        leafy = enumerate_bipartite_star(m, r, trees_only=True, leaf_clouds=True)
        brute = [t for t in enumerate_trees(m + r) if all(i <= m for i, j in t.edges)]
        assert len(leafy) == len(brute)
        strict = enumerate_bipartite_star(m, r, trees_only=True)
        assert len(strict) <= len(leafy)


def test_star_graph_validation():
    with pytest.raises(ValueError):
        BipartiteStarGraph(2, 1, {(1, 3)})
    with pytest.raises(ValueError):
        BipartiteStarGraph(2, 2, {(1, 3), (2, 3), (3, 4)})


def test_hypergraph_to_bipartite_example():
    h = Hypergraph(6, ({1, 2, 3}, {3, 4}, {5, 6}), (1, 2, 1))
    g = hypergraph_to_bipartite(h)
    assert (g.m, g.r, len(g.edges)) == (6, 4, 9)
    assert hypergraph_to_bipartite(Hypergraph(2, ({1, 2},))).r == 1


def test_connected_hypergraph_counts():
    assert len(enumerate_connected_hypergraphs(2)) == 1
    # pair-only connected hypergraphs are connected graphs
    assert len(enumerate_connected_hypergraphs(3, pairs_only=True)) == 4
    # plus every one of the 8 edge sets containing the triple
    assert len(enumerate_connected_hypergraphs(3)) == 12


def test_set_partitions_bell_numbers():
    assert [sum(1 for _ in set_partitions(range(n))) for n in range(1, 6)] == [1, 2, 5, 15, 52]


def test_enumeration_bound():
    with pytest.raises(EnumerationBoundError):
        enumerate_connected(9)
