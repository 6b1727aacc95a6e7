import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperindep.core import (
    GammaVector,
    Hypergraph,
    HypergraphError,
    PartiteHypergraph,
    is_gamma_balanced,
    is_independent,
    neighborhood,
    read_hypergraph,
    symmetric_difference_size,
    write_hypergraph,
)

from oracles import ball_edges


def test_independence_examples():
    H = Hypergraph(3, 3, [(0, 1, 2)])
    assert is_independent(H, {0, 1})
    assert not is_independent(H, {0, 1, 2})
    assert is_independent(Hypergraph(5, 3, []), set(range(5)))


def test_invalid_vertex_rejected():
    H = Hypergraph(3, 3, [(0, 1, 2)])
    with pytest.raises(HypergraphError):
        is_independent(H, {0, 7})
    with pytest.raises(HypergraphError):
        is_independent(H, {-1})


def test_edge_validation():
    with pytest.raises(HypergraphError):
        Hypergraph(3, 3, [(0, 1, 1)])
    with pytest.raises(HypergraphError):
        Hypergraph(3, 3, [(0, 1, 3)])
    with pytest.raises(HypergraphError):
        Hypergraph(3, 1, [])
    with pytest.raises(HypergraphError):
        PartiteHypergraph(2, 3, [(0, 3)])


def test_canonical_order_and_dedup():
    H = Hypergraph(5, 3, [(4, 2, 0), (1, 0, 2), (2, 1, 0)])
    assert H.edge_tuples == [(0, 1, 2), (0, 2, 4)]
    assert Hypergraph(5, 3, H.edge_tuples) == H
    assert hash(Hypergraph(5, 3, H.edge_tuples)) == hash(H)


def test_partite_orders_rows_not_entries():
    PH = PartiteHypergraph(2, 3, [(2, 0), (0, 1), (0, 1)])
    assert PH.edges.tolist() == [[0, 1], [2, 0]]
    assert is_independent(PH, {(0, 2), (1, 1)})
    assert not is_independent(PH, {(0, 2), (1, 0)})


def test_gamma_balanced_examples():
    PH = PartiteHypergraph(2, 4, [])
    g = GammaVector((0.5, 0.5))
    three_three = {(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)}
    assert is_gamma_balanced(PH, three_three, g)
    assert not is_gamma_balanced(PH, {(0, 0), (0, 1), (1, 0), (1, 1), (1, 2)}, g)
    assert is_gamma_balanced(PH, set(), g)


def test_gamma_balanced_non_integral_is_false():
    PH = PartiteHypergraph(3, 4, [])
    g = GammaVector((0.5, 0.25, 0.25))
    assert not is_gamma_balanced(PH, {(0, 0), (1, 0)}, g)
    assert is_gamma_balanced(PH, {(0, 0), (0, 1), (1, 0), (2, 3)}, g)


def test_gamma_vector_validation():
    with pytest.raises(HypergraphError):
        GammaVector((0.5, 0.6))
    with pytest.raises(HypergraphError):
        GammaVector((1.0, 0.0))
    assert GammaVector((0.2, 0.5, 0.3)).istar == 1
    assert GammaVector.uniform(3).istar == 0


def test_neighborhood_examples():
    star = Hypergraph(5, 3, [(0, 1, 2), (0, 3, 4)])
    assert len(neighborhood(star, 0, 0)) == 0
    assert len(neighborhood(star, 0, 1)) == 2
    path = Hypergraph(5, 3, [(0, 1, 2), (2, 3, 4)])
    ball = neighborhood(path, 0, 1)
    assert ball.original_edges() == [(0, 1, 2)]
    assert ball.orig[0] == 0
    assert neighborhood(path, 0, 2).original_edges() == [(0, 1, 2), (2, 3, 4)]


def test_symmetric_difference():
    assert symmetric_difference_size({1, 2}, {1, 2}) == 0
    assert symmetric_difference_size({1, 2}, {3, 4, 5}) == 5
    assert symmetric_difference_size({0, 1}, {1, 2}) == 2


def test_text_round_trip():
    H = Hypergraph(6, 3, [(0, 1, 2), (2, 4, 5)])
    text = write_hypergraph(H)
    assert text == "6 3 2\n0 1 2\n2 4 5\n"
    assert read_hypergraph(text) == H
    assert write_hypergraph(read_hypergraph(text)) == text
    PH = PartiteHypergraph(3, 2, [(0, 1, 1), (1, 0, 0)])
    buf = io.StringIO()
    write_hypergraph(PH, buf)
    assert buf.getvalue().startswith("PARTITE 3 2 2\n")
    assert read_hypergraph(buf.getvalue()) == PH


@pytest.mark.parametrize("text", ["", "3 3 2\n0 1 2\n", "3 3 1\n0 1\n", "x y z\n", "PARTITE 2 2\n", "3 3 2\n0 1 2\n2 1 0\n"])
def test_malformed_files(text):
    with pytest.raises(HypergraphError):
        read_hypergraph(text)


edge_lists = st.integers(4, 9).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.lists(st.integers(0, n - 1), min_size=3, max_size=3, unique=True), max_size=12))
)


@settings(max_examples=60, deadline=None)
@given(edge_lists, st.data())
def test_independence_monotone_under_subsets(ne, data):
    n, edges = ne
    H = Hypergraph(n, 3, edges)
    S = data.draw(st.sets(st.integers(0, n - 1)))
    T = data.draw(st.sets(st.sampled_from(sorted(S)))) if S else set()
    if is_independent(H, S):
        assert is_independent(H, T)
    assert is_independent(H, S) == (not any(set(e) <= S for e in H.edge_tuples))


@settings(max_examples=60, deadline=None)
@given(edge_lists, st.integers(0, 3))
def test_neighborhood_nested_and_matches_bfs(ne, s):
    n, edges = ne
    H = Hypergraph(n, 3, edges)
    for v in range(n):
        small = set(neighborhood(H, v, s).original_edges())
        big = set(neighborhood(H, v, s + 1).original_edges())
        assert small <= big
        assert sorted(small) == ball_edges(n, H.edge_tuples, v, s)


@settings(max_examples=40, deadline=None)
@given(edge_lists)
def test_canonicalization_idempotent(ne):
    n, edges = ne
    H = Hypergraph(n, 3, edges)
    again = Hypergraph(n, 3, H.edges)
    assert again == H
    assert np.array_equal(again.edges, H.edges)
