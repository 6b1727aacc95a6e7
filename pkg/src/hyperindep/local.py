"""Local algorithms: random greedy, its Galton-Watson adaptation, local-function
evaluation on finite hypergraphs and neighbourhood-type statistics.

Greedy order: larger label first; equal labels go to the smaller vertex index.
A vertex is deleted once some edge through it has all its other vertices
selected.  Because everything selected before ``v`` has a larger label, ``v``
ends up selected iff no edge ``e ∋ v`` has every vertex of ``e - {v}`` both
larger than ``v`` and selected.  That recursion runs on increasing labels only;
the certified local rule and the lazy tree estimator below are built on it.
"""

from __future__ import annotations

import math
import sys
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .core import Hypergraph, HypergraphError, RootedHypergraph, neighborhood
from .models import Estimate, RootedHypertree, build_regular_hypertree, sample_gw_hypertree, _TreeBuilder
from .seeding import Seed, as_seed

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@dataclass(frozen=True, eq=False)
class VertexLabels:
    """I.i.d. Unif[0, 1] vertex labels."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or (vals.size and (vals.min() < 0 or vals.max() > 1)):
            raise HypergraphError("labels must be a 1-d array of values in [0, 1]")
        object.__setattr__(self, "values", vals)

    @classmethod
    def sample(cls, n: int, seed: Seed | int | None = None) -> "VertexLabels":
        return cls(as_seed(seed).generator().random(n))

    def __len__(self) -> int:
        return len(self.values)

    def restrict(self, ids) -> "VertexLabels":
        return VertexLabels(self.values[np.asarray(ids, dtype=np.int64)])


def _labels_array(labels) -> np.ndarray:
    return labels.values if isinstance(labels, VertexLabels) else np.asarray(labels, dtype=float)


GreedyInput = Union[Hypergraph, RootedHypertree, RootedHypergraph]


def _as_hypergraph(H: GreedyInput) -> Hypergraph:
    if isinstance(H, RootedHypertree):
        return H.hypergraph
    if isinstance(H, RootedHypergraph):
        return H.hypergraph
    return H


def random_greedy(H: GreedyInput, labels) -> frozenset:
    """Sequential random greedy independent set."""
    G = _as_hypergraph(H)
    x = _labels_array(labels)
    if len(x) < G.n:
        raise HypergraphError("labels must cover every vertex")
    order = np.lexsort((np.arange(G.n), -x[: G.n])).tolist()
    r = G.r
    edges = G.edge_tuples
    inc = G.incidence
    count = [0] * G.m
    state = [0] * G.n  # 0 undecided, 1 selected, 2 deleted
    for v in order:
        if state[v]:
            continue
        state[v] = 1
        for ei in inc[v]:
            count[ei] += 1
            if count[ei] == r - 1:
                for u in edges[ei]:
                    if state[u] == 0:
                        state[u] = 2
    return frozenset(v for v in range(G.n) if state[v] == 1)


# -- local functions ---------------------------------------------------------------

@dataclass(frozen=True)
class LocalFunction:
    """An s-local rule ``evaluator(N_s(H, v), labels on N_s) -> {0, 1}``.

    The rooted hypergraph handed to the evaluator has its root at local id 0
    and the labels are indexed by local id.
    """

    radius: int
    evaluator: Callable[[RootedHypergraph, np.ndarray], int]
    name: str = "local"

    def __call__(self, rooted: RootedHypergraph, labels) -> int:
        return int(self.evaluator(rooted, _labels_array(labels)))


class _NeedsBoundary(Exception):
    pass


def _greedy_status(inc, edges, prio, v, limit_dist=None, dist=None, memo=None):
    """Greedy membership of ``v`` from the increasing-label recursion.

    With ``limit_dist`` set, asking for a vertex at distance >= limit_dist
    (whose edge set may be incomplete) raises ``_NeedsBoundary``.
    """
    if memo is None:
        memo = {}

    def status(u):
        if u in memo:
            return memo[u]
        if limit_dist is not None and dist[u] >= limit_dist:
            raise _NeedsBoundary
        pu = prio[u]
        result = True
        for ei in inc[u]:
            others = [w for w in edges[ei] if w != u]
            if all(prio[w] > pu for w in others) and all(status(w) for w in others):
                result = False
                break
        memo[u] = result
        return result

    return status(v)


def _priorities(x: np.ndarray, ids) -> list:
    # larger label first; smaller original id wins ties
    return [(float(x[i]), -int(o)) for i, o in enumerate(ids)]


def greedy_status(H: Hypergraph, labels, v: int) -> bool:
    """Whether ``v`` is selected by :func:`random_greedy` without running it globally."""
    x = _labels_array(labels)
    prio = _priorities(x, range(H.n))
    return _greedy_status(H.incidence, H.edge_tuples, prio, v)


def certified_greedy(s: int) -> LocalFunction:
    """s-local rule: 1 iff the greedy run certifies ``v`` inside ``N_s``.

    The recursion may only consult vertices at distance < s from the root (their
    edge sets are complete inside ``N_s``); if it needs a farther vertex the rule
    abstains with 0.  Selected vertices are therefore always greedy-selected in
    the whole hypergraph, so the output is independent.
    """

    def evaluate(rooted: RootedHypergraph, x: np.ndarray) -> int:
        G = rooted.hypergraph
        prio = _priorities(x, rooted.orig)
        try:
            return int(_greedy_status(G.incidence, G.edge_tuples, prio, 0, s, rooted.dist))
        except _NeedsBoundary:
            return 0

    return LocalFunction(s, evaluate, name=f"certified_greedy_{s}")


def isolated_rule() -> LocalFunction:
    """1-local rule selecting exactly the isolated vertices."""
    return LocalFunction(1, lambda rooted, x: int(len(rooted) == 0), name="isolated")


def zero_rule(s: int = 0) -> LocalFunction:
    return LocalFunction(s, lambda rooted, x: 0, name="zero")


def run_local_on_hypergraph(H: Hypergraph, g: LocalFunction, labels) -> frozenset:
    """``{v : g(N_s(H, v), X|N_s) = 1}``."""
    x = _labels_array(labels)
    out = []
    for v in range(H.n):
        ball = neighborhood(H, v, g.radius)
        if g(ball, x[list(ball.orig)]):
            out.append(v)
    return frozenset(out)


def local_root_value(T: RootedHypertree, g: LocalFunction, labels) -> int:
    """``g`` evaluated at the root of a (truncated) tree."""
    ball = T.as_rooted(g.radius)
    x = _labels_array(labels)
    return g(ball, x[list(ball.orig)])


# -- adaptation from the Delta-regular tree to the GW tree -------------------------

@dataclass(frozen=True)
class AdaptedGreedyRun:
    selected: frozenset
    removed_edges: frozenset
    regularized: RootedHypertree
    inner: frozenset


def _removal_key(X_e: float, edge: tuple) -> tuple:
    return (-X_e, tuple(sorted(edge)))


def adapt_greedy_details(T: RootedHypertree, delta: int, seed: Seed | int | None = None) -> AdaptedGreedyRun:
    """The three-step construction on a materialized tree (see :func:`adapt_greedy_to_gw`)."""
    if delta < 1:
        raise HypergraphError("delta must be >= 1")
    seed = as_seed(seed)
    x = seed.child("labels").generator().random(T.num_vertices)
    G = T.hypergraph
    edges = T.edges
    inc: list[list[int]] = [[] for _ in range(T.num_vertices)]
    for idx, e in enumerate(edges):
        for u in e:
            inc[u].append(idx)

    # Step 1: at every vertex of degree > delta drop the edges whose largest
    # other label is highest
    removed = set()
    for v in range(T.num_vertices):
        deg = len(inc[v])
        if deg <= delta:
            continue
        scored = sorted(inc[v], key=lambda ei: _removal_key(max(x[u] for u in edges[ei] if u != v), edges[ei]))
        removed.update(scored[: deg - delta])

    # Step 2: top every vertex back up to degree delta with fresh
    # (delta - 1)-ary subtrees, truncated at the depth of T
    b = _TreeBuilder(T.r)
    b.level = list(T.level)
    b.parent_edge = [-1] * T.num_vertices
    b.edges = [e for idx, e in enumerate(edges) if idx not in removed]
    deg_s = [0] * T.num_vertices
    for e in b.edges:
        for u in e:
            deg_s[u] += 1
    for idx, e in enumerate(b.edges):
        for u in e[1:]:
            b.parent_edge[u] = idx
    for v in range(T.num_vertices):
        if T.level[v] >= T.depth:
            continue
        for _ in range(delta - deg_s[v]):
            frontier = b.spawn(v)
            while frontier:
                nxt = []
                for u in frontier:
                    if b.level[u] < T.depth:
                        for _ in range(delta - 1):
                            nxt.extend(b.spawn(u))
                frontier = nxt
    Tp = b.freeze(T.depth)

    # Step 3: greedy on the regularized forest with fresh labels, keep the
    # original vertices none of whose edges were removed
    xp = seed.child("fresh").generator().random(Tp.num_vertices)
    inner = random_greedy(Tp.hypergraph, xp)
    touched = {u for ei in removed for u in edges[ei]}
    selected = {v for v in inner if v < T.num_vertices and v not in touched}
    # a vertex with no edge in T is free: keep it whatever the padded copy did
    selected.update(v for v in range(T.num_vertices) if not inc[v])
    return AdaptedGreedyRun(frozenset(selected), frozenset(removed), Tp, inner)


def adapt_greedy_to_gw(T: RootedHypertree, delta: int, seed: Seed | int | None = None) -> frozenset:
    """Independent set in a GW tree from the greedy on a Delta-regular forest.

    (1) edge removal down to degree ``delta`` using labels X; (2) regularization
    by attaching ``(delta-1)``-ary hypertrees; (3) greedy with fresh labels X' on
    the regularized forest, keeping only vertices untouched by step 1.
    """
    return adapt_greedy_details(T, delta, seed).selected


def _regular_root_selected(rng: np.random.Generator, delta: int, r: int, depth: int) -> bool:
    """Greedy membership of the root of the depth-truncated Delta-regular tree.

    Only child edges whose r-1 children all beat the parent's label matter, so
    their number is Binomial(c, (1-x)^(r-1)) and their children are Unif(x, 1);
    the tree is grown lazily along those edges only.
    """

    def selected(x: float, level: int) -> bool:
        if level >= depth:
            return True
        c = delta if level == 0 else delta - 1
        relevant = rng.binomial(c, (1.0 - x) ** (r - 1))
        for _ in range(relevant):
            blocked = True
            for _ in range(r - 1):
                y = x + (1.0 - x) * rng.random()
                if not selected(y, level + 1):
                    blocked = False
                    break
            if blocked:
                return False
        return True

    return selected(rng.random(), 0)


def _root_step1(rng: np.random.Generator, d: float, r: int, delta: int, depth: int) -> int:
    """Step 1 at the root of a fresh GW tree.

    Returns -1 if an edge at the root is removed, 0 if the root has no edges
    (and is selected outright) and 1 if every root edge survives.
    """
    if depth == 0:
        return 0
    root_deg = int(rng.poisson(d)) if d > 0 else 0
    if root_deg > delta:
        return -1
    if root_deg == 0:
        return 0
    if depth < 2:
        return 1
    x_root = rng.random()
    for _ in range(root_deg):
        labels = rng.random(r - 1)
        offspring = rng.poisson(d, size=r - 1)
        for j in range(r - 1):
            excess = 1 + int(offspring[j]) - delta
            if excess <= 0:
                continue
            x_parent = max(x_root, *(labels[i] for i in range(r - 1) if i != j)) if r > 2 else x_root
            # child edges of this vertex ranked above the parent edge
            above = rng.binomial(int(offspring[j]), 1.0 - x_parent ** (r - 1))
            if above < excess:
                return -1
    return 1


def estimate_root_density(d: float, r: int, delta: int, depth: int, trials: int, seed: Seed | int | None = None) -> Estimate:
    """Fraction of fresh GW trees whose root survives the adapted greedy.

    Each trial samples just what decides the root: its degree, its neighbours'
    degrees and the labels ranking their edges (step 1), then the greedy status
    of the root of the regularized tree, whose root component is always the
    depth-truncated Delta-regular tree with fresh labels (steps 2-3). A root
    without edges is always selected.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = root_density_hits(d, r, delta, depth, as_seed(seed), 0, trials)
    return binomial_estimate(hits, trials)


def root_density_hits(d: float, r: int, delta: int, depth: int, seed: Seed, start: int, stop: int) -> int:
    """Number of trials ``start <= i < stop`` whose root is selected (trial i uses ``seed.trial(i)``)."""
    hits = 0
    for i in range(start, stop):
        rng = seed.trial(i).generator()
        status = _root_step1(rng, d, r, delta, depth)
        if status == 0 or (status == 1 and _regular_root_selected(rng, delta, r, depth)):
            hits += 1
    return hits


def binomial_estimate(hits: int, trials: int) -> Estimate:
    est = hits / trials
    return Estimate(est, math.sqrt(est * (1 - est) / trials), trials)


def estimate_root_density_materialized(d: float, r: int, delta: int, depth: int, trials: int, seed=None) -> Estimate:
    """Same quantity as :func:`estimate_root_density` by building every tree in full."""
    seed = as_seed(seed)
    hits = 0
    for i in range(trials):
        s = seed.trial(i)
        T = sample_gw_hypertree(d, r, depth, s.child("tree"))
        hits += 0 in adapt_greedy_to_gw(T, delta, s.child("alg"))
    return binomial_estimate(hits, trials)


# -- neighbourhood types -------------------------------------------------------------

OTHER = "other"


def _is_hypertree(ball: RootedHypergraph) -> bool:
    # a connected r-uniform hypergraph is a hypertree iff m (r - 1) = |V| - 1
    return len(ball) * (ball.r - 1) == ball.n - 1


def canonical_form(ball: RootedHypergraph) -> tuple:
    """Isomorphism-invariant nested-tuple code of a rooted hypertree.

    A vertex's code is the sorted tuple of its child-edge codes and an edge's
    code is the sorted tuple of its child-vertex codes.
    """
    if not _is_hypertree(ball):
        raise HypergraphError("canonical_form needs a hypertree")
    G = ball.hypergraph
    dist = ball.dist
    children: list[list[tuple[int, ...]]] = [[] for _ in range(G.n)]
    for e in G.edge_tuples:
        parent = min(e, key=lambda u: dist[u])
        children[parent].append(tuple(u for u in e if u != parent))
    order = sorted(range(G.n), key=lambda u: -dist[u])
    code: dict[int, tuple] = {}
    for u in order:
        code[u] = tuple(sorted(tuple(sorted(code[w] for w in kids)) for kids in children[u]))
    return code[0]


def tree_canonical_form(T: RootedHypertree, s: int | None = None) -> tuple:
    return canonical_form(T.as_rooted(s))


def count_neighborhood_types(H: Hypergraph, s: int, q: int) -> Counter:
    """Tally of ``N_{2s}(H, v)`` isomorphism types over all vertices.

    Vertices whose neighbourhood is cyclic or has more than ``q`` edges are
    tallied under :data:`OTHER`.
    """
    if s < 0 or q < 0:
        raise HypergraphError("need s >= 0 and q >= 0")
    counts: Counter = Counter()
    for v in range(H.n):
        ball = neighborhood(H, v, 2 * s)
        if len(ball) > q or not _is_hypertree(ball):
            counts[OTHER] += 1
        else:
            counts[canonical_form(ball)] += 1
    return counts


__all__ = [
    "VertexLabels",
    "LocalFunction",
    "random_greedy",
    "greedy_status",
    "certified_greedy",
    "isolated_rule",
    "zero_rule",
    "run_local_on_hypergraph",
    "local_root_value",
    "adapt_greedy_to_gw",
    "adapt_greedy_details",
    "estimate_root_density",
    "estimate_root_density_materialized",
    "root_density_hits",
    "binomial_estimate",
    "count_neighborhood_types",
    "canonical_form",
    "tree_canonical_form",
    "OTHER",
    "build_regular_hypertree",
]
