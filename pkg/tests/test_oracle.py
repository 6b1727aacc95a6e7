import json

import pytest

from hyperindep.core import GammaVector, Hypergraph, PartiteHypergraph, is_gamma_balanced, is_independent
from hyperindep.local import VertexLabels, random_greedy
from hyperindep.lowdeg import balanced_selection, degree1_balanced
from hyperindep.models import sample_partite_hypergraph, sample_uniform_hypergraph
from hyperindep.oracle import (
    CapExceeded,
    max_gamma_balanced,
    max_gamma_balanced_exhaustive,
    max_independent_set,
    max_independent_set_exhaustive,
    max_P_independent,
    max_P_independent_exhaustive,
)
from hyperindep.seeding import Seed

from oracles import balanced_bruteforce, mis_bruteforce


def _check_partite(PH, res, gamma, block=None):
    W = res.witness
    assert len(W) == res.optimum
    assert is_independent(PH, W)
    if W:
        assert is_gamma_balanced(PH, W, gamma)
    if block:
        cells = [(i, j // block) for i, j in W]
        assert len(cells) == len(set(cells))


def test_mis_examples():
    assert max_independent_set(Hypergraph(7, 3, [])).optimum == 7
    res = max_independent_set(Hypergraph(3, 3, [(0, 1, 2)]))
    assert res.optimum == 2 and is_independent(Hypergraph(3, 3, [(0, 1, 2)]), res.witness)
    assert max_independent_set(Hypergraph(0, 2, [])).optimum == 0


def test_mis_matches_brute_force_small():
    for i in range(30):
        H = sample_uniform_hypergraph(9, 3, 0.15, Seed(1).trial(i))
        res = max_independent_set(H)
        assert res.optimum == mis_bruteforce(H.n, H.edge_tuples) == max_independent_set_exhaustive(H).optimum
        assert is_independent(H, res.witness) and len(res.witness) == res.optimum


def test_mis_graph_case():
    # 5-cycle: independence number 2
    C5 = Hypergraph(5, 2, [(i, (i + 1) % 5) for i in range(5)])
    assert max_independent_set(C5).optimum == 2


def test_cap_refusal():
    with pytest.raises(CapExceeded, match="cap"):
        max_independent_set(Hypergraph(41, 3, []))
    assert max_independent_set(Hypergraph(41, 3, []), cap=41).optimum == 41
    with pytest.raises(CapExceeded):
        max_gamma_balanced(PartiteHypergraph(2, 19, []), GammaVector.uniform(2))
    with pytest.raises(CapExceeded):
        max_independent_set_exhaustive(Hypergraph(21, 3, []))


def test_balanced_examples():
    g = GammaVector.uniform(3)
    assert max_gamma_balanced(PartiteHypergraph(3, 4, []), g).optimum == 12
    K = PartiteHypergraph(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    res = max_gamma_balanced(K, GammaVector.uniform(2))
    assert res.optimum == 0 and res.witness == frozenset()


def test_balanced_no_admissible_size():
    # gamma = (1/3, 2/3) on n = 1: sizes 3, 6, ... never fit, only 0
    res = max_gamma_balanced(PartiteHypergraph(2, 1, []), GammaVector((1 / 3, 2 / 3)))
    assert res.optimum == 0


def test_balanced_skewed_gamma_against_brute_force():
    g = GammaVector((1 / 3, 2 / 3))
    for i in range(15):
        PH = sample_partite_hypergraph(2, 6, 0.3, Seed(2).trial(i))
        res = max_gamma_balanced(PH, g)
        assert res.optimum == balanced_bruteforce(2, 6, PH.edges.tolist(), g.entries)
        _check_partite(PH, res, g)


def test_P_independent_examples():
    g = GammaVector.uniform(2)
    assert max_P_independent(PartiteHypergraph(2, 6, []), g, 6).optimum == 2
    for i in range(10):
        PH = sample_partite_hypergraph(2, 6, 0.3, Seed(3).trial(i))
        assert max_P_independent(PH, g, 1).optimum == max_gamma_balanced(PH, g).optimum
    with pytest.raises(ValueError):
        max_P_independent(PartiteHypergraph(2, 6, []), g, 4)


def test_P_independent_matches_brute_force():
    g = GammaVector.uniform(2)
    for i in range(50):
        PH = sample_partite_hypergraph(2, 6, 0.3, Seed(4).trial(i))
        res = max_P_independent(PH, g, 2)
        assert res.optimum == balanced_bruteforce(2, 6, PH.edges.tolist(), g.entries, block=2)
        assert res.optimum == max_P_independent_exhaustive(PH, g, 2).optimum
        assert res.optimum <= max_gamma_balanced(PH, g).optimum
        _check_partite(PH, res, g, block=2)


def test_dominance():
    for i in range(20):
        H = sample_uniform_hypergraph(25, 3, 0.02, Seed(5).trial(i))
        x = VertexLabels.sample(H.n, Seed(6).trial(i))
        assert len(random_greedy(H, x)) <= max_independent_set(H).optimum
    g = GammaVector.uniform(3)
    for i in range(10):
        PH = sample_partite_hypergraph(3, 8, 0.02, Seed(7).trial(i))
        k = (2, 2, 2)
        _, out = degree1_balanced(PH, k)
        S = balanced_selection(out.selected, k)
        if S is not None:
            assert is_gamma_balanced(PH, S, g)
            assert len(S) <= max_gamma_balanced(PH, g).optimum


def test_result_serializes():
    res = max_independent_set(Hypergraph(3, 3, [(0, 1, 2)]))
    d = json.loads(json.dumps(res.to_dict()))
    assert d["optimum"] == 2 and len(d["witness"]) == 2 and d["nodes"] >= 1


def test_forty_vertex_instance():
    H = sample_uniform_hypergraph(40, 3, 0.02, 8)
    res = max_independent_set(H)
    assert is_independent(H, res.witness)
    x = VertexLabels.sample(H.n, 9)
    assert res.optimum >= len(random_greedy(H, x))
