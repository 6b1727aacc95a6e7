"""Hypergraph representations and the predicates shared by every algorithm.

Vertices of an ordinary hypergraph are dense integers ``0..n-1``.  Vertices of
an r-partite hypergraph are ``(part, index)`` pairs; internally they are also
flattened to ``part * n + index`` so that a :class:`PartiteHypergraph` can be
viewed as an ordinary hypergraph on ``r * n`` vertices.
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, TextIO, Union

import numpy as np

Vertex = Union[int, tuple]
VertexSet = frozenset


class HypergraphError(ValueError):
    """Raised for malformed hypergraphs, vertex sets or file contents."""


def _canonical_edges(edges, r: int, n: int, *, sort_within: bool) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, r), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != r:
        raise HypergraphError(f"every edge must have exactly {r} entries")
    if arr.min() < 0 or arr.max() >= n:
        raise HypergraphError(f"edge entry outside [0, {n})")
    if sort_within:
        arr = np.sort(arr, axis=1)
        if r > 1 and np.any(arr[:, 1:] == arr[:, :-1]):
            raise HypergraphError("edge with repeated vertex")
    order = np.lexsort(arr.T[::-1])
    arr = arr[order]
    if len(arr) > 1:
        keep = np.ones(len(arr), dtype=bool)
        keep[1:] = np.any(arr[1:] != arr[:-1], axis=1)
        arr = arr[keep]
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """An r-uniform hypergraph on vertices ``0..n-1``.

    Edges are stored as an ``(m, r)`` integer array, each row sorted ascending and
    rows sorted lexicographically with duplicates dropped.
    """

    n: int
    r: int
    edges: np.ndarray = field(repr=False)

    def __init__(self, n: int, r: int, edges=()):
        if n < 0:
            raise HypergraphError("n must be nonnegative")
        if r < 2:
            raise HypergraphError("uniformity r must be at least 2")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "r", int(r))
        object.__setattr__(self, "edges", _canonical_edges(edges, r, n, sort_within=True))

    @property
    def m(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return self.m

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self.n, self.r) == (other.n, other.r) and np.array_equal(self.edges, other.edges)

    def __hash__(self) -> int:
        return hash((self.n, self.r, self.edges.tobytes()))

    def __repr__(self) -> str:
        return f"Hypergraph(n={self.n}, r={self.r}, m={self.m})"

    @cached_property
    def edge_tuples(self) -> list[tuple[int, ...]]:
        return [tuple(e) for e in self.edges.tolist()]

    @cached_property
    def incidence(self) -> list[list[int]]:
        """``incidence[v]`` lists the indices of the edges containing ``v``."""
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for idx, e in enumerate(self.edge_tuples):
            for u in e:
                inc[u].append(idx)
        return inc

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def flat_vertices(self, S: Iterable) -> set[int]:
        out = set()
        for v in S:
            if isinstance(v, (tuple, list)) or not 0 <= int(v) < self.n:
                raise HypergraphError(f"invalid vertex {v!r} for hypergraph on {self.n} vertices")
            out.add(int(v))
        return out


@dataclass(frozen=True, eq=False)
class PartiteHypergraph:
    """An r-uniform r-partite hypergraph with parts ``V_1..V_r`` of size ``n``.

    An edge is an r-tuple whose i-th entry is an index into part i.
    """

    r: int
    n: int
    edges: np.ndarray = field(repr=False)

    def __init__(self, r: int, n: int, edges=()):
        if r < 2:
            raise HypergraphError("uniformity r must be at least 2")
        if n < 0:
            raise HypergraphError("part size must be nonnegative")
        object.__setattr__(self, "r", int(r))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", _canonical_edges(edges, r, n, sort_within=False))

    @property
    def m(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return self.m

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartiteHypergraph):
            return NotImplemented
        return (self.n, self.r) == (other.n, other.r) and np.array_equal(self.edges, other.edges)

    def __hash__(self) -> int:
        return hash(("partite", self.n, self.r, self.edges.tobytes()))

    def __repr__(self) -> str:
        return f"PartiteHypergraph(r={self.r}, n={self.n}, m={self.m})"

    @property
    def total_vertices(self) -> int:
        return self.r * self.n

    def flat_id(self, part: int, index: int) -> int:
        return part * self.n + index

    def pair(self, flat: int) -> tuple[int, int]:
        return divmod(int(flat), self.n)

    @cached_property
    def flat(self) -> Hypergraph:
        """The same hypergraph on ``r * n`` flat vertex ids."""
        offsets = np.arange(self.r, dtype=np.int64) * self.n
        return Hypergraph(self.r * self.n, self.r, self.edges + offsets)

    def flat_vertices(self, S: Iterable) -> set[int]:
        out = set()
        for v in S:
            try:
                part, idx = v
            except (TypeError, ValueError):
                raise HypergraphError(f"partite vertices are (part, index) pairs, got {v!r}") from None
            if not (0 <= part < self.r and 0 <= idx < self.n):
                raise HypergraphError(f"invalid partite vertex {v!r}")
            out.add(self.flat_id(part, idx))
        return out

    def to_pairs(self, flat: Iterable[int]) -> frozenset:
        return frozenset(self.pair(v) for v in flat)


AnyHypergraph = Union[Hypergraph, PartiteHypergraph]


def _as_flat(H: AnyHypergraph) -> Hypergraph:
    return H.flat if isinstance(H, PartiteHypergraph) else H


def is_independent(H: AnyHypergraph, S: Iterable) -> bool:
    """True iff no edge of ``H`` lies entirely inside ``S``."""
    members = H.flat_vertices(S)
    G = _as_flat(H)
    if G.m == 0 or len(members) < G.r:
        return True
    mask = np.zeros(G.n, dtype=bool)
    mask[list(members)] = True
    return not bool(np.any(mask[G.edges].all(axis=1)))


def is_gamma_balanced(H: PartiteHypergraph, S: Iterable, gamma: "GammaVector | Sequence[float]") -> bool:
    """True iff ``|S ∩ V_i| = gamma_i |S|`` for every part.

    A part whose target ``gamma_i |S|`` is not an integer makes the predicate false.
    """
    gamma = GammaVector.coerce(gamma, H.r)
    counts = np.zeros(H.r, dtype=np.int64)
    members = H.flat_vertices(S)
    for v in members:
        counts[v // H.n] += 1
    size = len(members)
    for g, c in zip(gamma.entries, counts):
        target = g * size
        nearest = round(target)
        if abs(target - nearest) > 1e-9 or nearest != c:
            return False
    return True


def symmetric_difference_size(S1: Iterable, S2: Iterable) -> int:
    return len(set(S1) ^ set(S2))


@dataclass(frozen=True)
class GammaVector:
    """Target part proportions; entries in (0, 1) summing to 1."""

    entries: tuple[float, ...]

    def __post_init__(self):
        entries = tuple(float(x) for x in self.entries)
        object.__setattr__(self, "entries", entries)
        if len(entries) < 2:
            raise HypergraphError("gamma needs at least two entries")
        if any(not 0.0 < x < 1.0 for x in entries):
            raise HypergraphError("gamma entries must lie strictly inside (0, 1)")
        if abs(sum(entries) - 1.0) > 1e-12:
            raise HypergraphError("gamma entries must sum to 1")

    @classmethod
    def uniform(cls, r: int) -> "GammaVector":
        return cls((1.0 / r,) * r)

    @classmethod
    def coerce(cls, gamma, r: int | None = None) -> "GammaVector":
        g = gamma if isinstance(gamma, GammaVector) else cls(tuple(gamma))
        if r is not None and len(g) != r:
            raise HypergraphError(f"gamma has {len(g)} entries, expected {r}")
        return g

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def istar(self) -> int:
        """Index of the largest entry; the smallest index wins ties (1e-12 tolerance)."""
        best = max(self.entries)
        return next(i for i, x in enumerate(self.entries) if x >= best - 1e-12)


@dataclass(frozen=True, eq=False)
class RootedHypergraph:
    """A hypergraph with a distinguished root at local vertex 0.

    ``orig[i]`` is the original id of local vertex ``i`` and ``dist[i]`` its
    distance from the root.  Local ids are assigned in BFS order.
    """

    hypergraph: Hypergraph
    orig: tuple[int, ...]
    dist: tuple[int, ...]
    radius: int

    root = 0

    def __len__(self) -> int:
        return self.hypergraph.m

    @property
    def n(self) -> int:
        return self.hypergraph.n

    @property
    def r(self) -> int:
        return self.hypergraph.r

    def original_edges(self) -> list[tuple[int, ...]]:
        return sorted(tuple(sorted(self.orig[u] for u in e)) for e in self.hypergraph.edge_tuples)


def neighborhood(H: Hypergraph, v: int, s: int) -> RootedHypergraph:
    """Depth-``s`` neighborhood ``N_s(H, v)``.

    An edge belongs to the neighborhood iff it lies on a path of length at most
    ``s`` from ``v``, i.e. it contains a vertex at distance at most ``s - 1``.
    """
    if not 0 <= v < H.n:
        raise HypergraphError(f"root {v} outside [0, {H.n})")
    if s < 0:
        raise HypergraphError("radius must be nonnegative")
    return _bfs_ball(H.edge_tuples, H.incidence, H.r, v, s)


def _bfs_ball(edge_tuples, incidence, r: int, v: int, s: int) -> RootedHypergraph:
    local = {v: 0}
    orig = [v]
    dist = [0]
    seen_edges = set()
    ball_edges = []
    queue = deque([v])
    while queue:
        u = queue.popleft()
        du = dist[local[u]]
        if du >= s:
            continue
        for ei in incidence[u]:
            if ei in seen_edges:
                continue
            seen_edges.add(ei)
            ball_edges.append(edge_tuples[ei])
            for w in edge_tuples[ei]:
                if w not in local:
                    local[w] = len(orig)
                    orig.append(w)
                    dist.append(du + 1)
                    queue.append(w)
    relabeled = [[local[w] for w in e] for e in ball_edges]
    G = Hypergraph(len(orig), r, relabeled)
    return RootedHypergraph(G, tuple(orig), tuple(dist), s)


def rooted_from_edges(r: int, edges: Sequence[Sequence[int]], root: int, s: int) -> RootedHypergraph:
    """Build ``N_s`` of an explicit edge list around ``root`` (ids need not be dense)."""
    ids = sorted({root} | {u for e in edges for u in e})
    index = {u: i for i, u in enumerate(ids)}
    G = Hypergraph(len(ids), r, [[index[u] for u in e] for e in edges])
    ball = _bfs_ball(G.edge_tuples, G.incidence, r, index[root], s)
    return RootedHypergraph(ball.hypergraph, tuple(ids[i] for i in ball.orig), ball.dist, s)


# -- plain-text format -------------------------------------------------------

def write_hypergraph(H: AnyHypergraph, fh: TextIO | None = None) -> str:
    """Serialize ``H``; returns the text and also writes it to ``fh`` if given."""
    buf = io.StringIO()
    if isinstance(H, PartiteHypergraph):
        buf.write(f"PARTITE {H.r} {H.n} {H.m}\n")
    else:
        buf.write(f"{H.n} {H.r} {H.m}\n")
    for e in H.edges.tolist():
        buf.write(" ".join(map(str, e)) + "\n")
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def read_hypergraph(source: str | TextIO) -> AnyHypergraph:
    text = source if isinstance(source, str) else source.read()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise HypergraphError("empty hypergraph file")
    head = lines[0].split()
    try:
        if head[0].upper() == "PARTITE":
            if len(head) != 4:
                raise HypergraphError("partite header must be 'PARTITE r n m'")
            r, n, m = map(int, head[1:])
            partite = True
        else:
            if len(head) != 3:
                raise HypergraphError("header must be 'n r m'")
            n, r, m = map(int, head)
            partite = False
        rows = [list(map(int, ln.split())) for ln in lines[1:]]
    except ValueError as exc:
        raise HypergraphError(f"malformed hypergraph file: {exc}") from None
    if len(rows) != m:
        raise HypergraphError(f"header announces {m} edges, found {len(rows)}")
    if any(len(row) != r for row in rows):
        raise HypergraphError(f"every edge line must contain {r} indices")
    H = PartiteHypergraph(r, n, rows) if partite else Hypergraph(n, r, rows)
    if H.m != m:
        raise HypergraphError("duplicate edges in file")
    return H
