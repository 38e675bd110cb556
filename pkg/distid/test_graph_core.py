#!/usr/bin/env python3
"""Tests for graph_core: BFS distances, twins, components and the graph corpora."""

import sys
from pathlib import Path

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.strategies import composite

_repo_root = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(_repo_root))

from distid.graph_core import (  # noqa: E402
    INFINITY, PLAIN, UNREACHABLE, Graph, RoleKind, RoleLabel, all_pairs_distances, check_radius,
    closed_ball, complete_graph, components, cycle_graph, disjoint_union, empty_graph,
    enumerate_all_graphs, enumerate_small_graphs, format_radius, in_ball, induced_subgraph,
    is_bipartite, is_connected, named_families, path_graph, standard_corpus, twin_pairs,
)


@composite
def graphs(draw, max_n=8):
    n = draw(st.integers(min_value=1, max_value=max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, [p for p, k in zip(pairs, keep) if k])


def to_networkx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(g.vertices())
    h.add_edges_from(g.edges)
    return h


@settings(max_examples=100, deadline=None)
@given(graphs())
def test_distances_match_networkx(g):
    """BFS distances agree with networkx; other components are UNREACHABLE."""
    dm = all_pairs_distances(g)
    reference = dict(nx.all_pairs_shortest_path_length(to_networkx(g)))
    for u in g.vertices():
        for v in g.vertices():
            expected = reference[u].get(v, UNREACHABLE)
            assert dm[u, v] == expected, f'd({u},{v}) = {dm[u, v]}, networkx says {expected}'


@settings(max_examples=100, deadline=None)
@given(graphs())
def test_components_and_bipartite_match_networkx(g):
    h = to_networkx(g)
    expected = sorted((frozenset(c) for c in nx.connected_components(h)), key=min)
    assert components(g) == expected
    assert is_connected(g) == nx.is_connected(h)
    assert is_bipartite(g) == nx.is_bipartite(h)


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_twin_pairs_have_equal_neighbourhoods(g):
    pairs = set(twin_pairs(g))
    for x in g.vertices():
        for y in range(x + 1, len(g)):
            assert ((x, y) in pairs) == (g.neighbors(x) == g.neighbors(y))


def test_small_distances():
    dm = all_pairs_distances(path_graph(5))
    assert dm.row(0).tolist() == [0, 1, 2, 3, 4]
    dm = all_pairs_distances(cycle_graph(6))
    assert dm[0, 3] == 3
    dm = all_pairs_distances(empty_graph(2))
    assert dm[0, 1] == UNREACHABLE


def test_in_ball_never_counts_unreachable():
    d = np.array([0, 2, UNREACHABLE], dtype=np.int64)
    assert in_ball(d, 2).tolist() == [True, True, False]
    assert in_ball(d, INFINITY).tolist() == [True, True, False]
    assert in_ball(d, 1).tolist() == [True, False, False]


def test_closed_ball():
    g = path_graph(5)
    dm = all_pairs_distances(g)
    assert closed_ball(g, dm, 2, 1) == frozenset({1, 2, 3})
    assert closed_ball(g, dm, 0, INFINITY) == frozenset(range(5))
    g = disjoint_union(path_graph(2), path_graph(2))
    assert closed_ball(g, all_pairs_distances(g), 0, INFINITY) == frozenset({0, 1})


def test_radius_parsing_helpers():
    assert check_radius(3) == 3
    assert check_radius(INFINITY) == INFINITY
    for bad in (0, -1, 1.5, True):
        with pytest.raises(ValueError):
            check_radius(bad)
    assert format_radius(INFINITY) == 'inf'
    assert format_radius(2) == '2'


def test_graph_rejects_bad_input():
    with pytest.raises(ValueError):
        Graph(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph(3, [(0, 3)])
    with pytest.raises(ValueError):
        Graph(2, [(0, 1)], [PLAIN])
    with pytest.raises(ValueError):
        cycle_graph(2)


def test_graph_equality_ignores_edge_orientation():
    assert Graph(3, [(0, 1), (2, 1)]) == Graph(3, [(1, 2), (1, 0)])
    assert len({Graph(3, [(0, 1)]), Graph(3, [(1, 0)])}) == 1
    assert Graph(3, [(0, 1)]).sorted_edges() == [(0, 1)]


def test_labels_default_to_plain():
    g = path_graph(3)
    assert g.labels is None
    assert g.label(1) == PLAIN
    labelled = g.with_labels([RoleLabel.element(1), RoleLabel.apex(), PLAIN])
    assert labelled.label(0).kind is RoleKind.ELEMENT
    assert labelled.label(1) == RoleLabel.apex()


def test_twins_of_small_graphs():
    assert twin_pairs(cycle_graph(4)) == [(0, 2), (1, 3)]
    assert twin_pairs(complete_graph(2)) == []
    # closed twins are not open twins
    assert twin_pairs(complete_graph(3)) == []


def test_induced_subgraph_relabels():
    g = cycle_graph(5)
    sub, index = induced_subgraph(g, [4, 0, 1])
    assert index == {0: 0, 1: 1, 4: 2}
    assert sub.edges == frozenset({(0, 1), (0, 2)})


def test_enumerate_all_graphs_counts():
    counts = {}
    for g in enumerate_all_graphs(4):
        counts[len(g)] = counts.get(len(g), 0) + 1
    assert counts == {1: 1, 2: 2, 3: 8, 4: 64}


def test_named_families_contents():
    graphs_ = named_families(4)
    assert path_graph(4) in graphs_
    assert cycle_graph(4) in graphs_
    assert complete_graph(4) in graphs_
    assert empty_graph(2) in graphs_


def test_corpora_are_deterministic():
    first = list(enumerate_small_graphs(6, seed=7, count=30))
    second = list(enumerate_small_graphs(6, seed=7, count=30))
    assert first == second
    assert len(first) == 30
    assert len(set(first)) == 30

    corpus = standard_corpus(max_n=5, seed=3, count=10, exhaustive_n=3)
    assert corpus == standard_corpus(max_n=5, seed=3, count=10, exhaustive_n=3)
    assert len(set(corpus)) == len(corpus)
    assert all(1 <= len(g) <= 5 for g in corpus)


def test_corpus_order_is_limited():
    with pytest.raises(ValueError):
        list(enumerate_small_graphs(10, seed=1, count=1))
