"""Seeded samplers for the random models.

* ``H_r(n, p)``: every r-subset of ``[n]`` is an edge independently w.p. ``p``.
* ``H(r, n, p)``: every r-tuple in ``V_1 x ... x V_r`` is an edge w.p. ``p``.
* Poisson Galton-Watson and Delta-regular rooted hypertrees.
* Interpolation paths that resample one edge coordinate per step.

Edge coordinates are identified with integer ranks in ``[0, m)``.  r-subsets
are ranked in colexicographic order (``rank = sum_i C(c_i, i)`` for
``c_1 < ... < c_r``); partite tuples are ranked in mixed radix ``n`` with part 1
most significant.  Sparse sampling walks these ranks with geometric skips, so it
costs ``O(#edges * r)`` rather than ``O(m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Union

import numpy as np

from .core import Hypergraph, HypergraphError, PartiteHypergraph, rooted_from_edges, RootedHypergraph
from .seeding import Seed, as_seed


# -- coordinate spaces ---------------------------------------------------------

def _binom_vec(c: np.ndarray, i: int) -> np.ndarray:
    """``C(c, i)`` elementwise, exact; zero for ``c < i``."""
    out = np.ones_like(c)
    for j in range(i):
        out = out * (c - j) // (j + 1)
    return np.where(c < i, 0, out)


@dataclass(frozen=True)
class UniformSpace:
    """Coordinates of ``H_r(n, p)``: r-subsets of ``[n]`` in colex order."""

    n: int
    r: int

    @cached_property
    def m(self) -> int:
        return math.comb(self.n, self.r)

    @property
    def degree_normalizer(self) -> int:
        return math.comb(self.n - 1, self.r - 1)

    def _dtype(self):
        # exact int64 arithmetic for the unranking products, else Python ints
        return np.int64 if self.m * max(self.n, 1) < 2**62 else object

    def unrank(self, ranks: np.ndarray) -> np.ndarray:
        ranks = np.asarray(ranks)
        out = np.empty((len(ranks), self.r), dtype=np.int64)
        if len(ranks) == 0:
            return out
        dt = self._dtype()
        R = ranks.astype(dt)
        upper = np.full(len(ranks), self.n - 1, dtype=np.int64)
        for i in range(self.r, 0, -1):
            lo = np.full(len(ranks), i - 1, dtype=np.int64)
            hi = upper.copy()
            # largest c in [lo, hi] with C(c, i) <= R
            while True:
                active = lo < hi
                if not active.any():
                    break
                mid = (lo + hi + 1) // 2
                ok = _binom_vec(mid.astype(dt), i) <= R
                lo = np.where(active & ok, mid, lo)
                hi = np.where(active & ~ok, mid - 1, hi)
            out[:, i - 1] = lo
            R = R - _binom_vec(lo.astype(dt), i)
            upper = lo - 1
        return out

    def rank(self, edges) -> np.ndarray:
        e = np.sort(np.asarray(edges, dtype=np.int64).reshape(-1, self.r), axis=1)
        dt = self._dtype()
        total = np.zeros(len(e), dtype=dt)
        for i in range(self.r):
            total = total + _binom_vec(e[:, i].astype(dt), i + 1)
        return total.astype(np.int64)

    def build(self, ranks) -> Hypergraph:
        return Hypergraph(self.n, self.r, self.unrank(np.asarray(ranks, dtype=np.int64)))

    def ranks_of(self, H: Hypergraph) -> np.ndarray:
        return np.sort(self.rank(H.edges))


@dataclass(frozen=True)
class PartiteSpace:
    """Coordinates of ``H(r, n, p)``: tuples of ``V_1 x ... x V_r`` in mixed radix."""

    r: int
    n: int

    @cached_property
    def m(self) -> int:
        return self.n**self.r

    @property
    def degree_normalizer(self) -> int:
        return self.n ** (self.r - 1)

    def unrank(self, ranks: np.ndarray) -> np.ndarray:
        R = np.asarray(ranks, dtype=np.int64).copy()
        out = np.empty((len(R), self.r), dtype=np.int64)
        for i in range(self.r - 1, -1, -1):
            out[:, i] = R % self.n
            R //= self.n
        return out

    def rank(self, edges) -> np.ndarray:
        e = np.asarray(edges, dtype=np.int64).reshape(-1, self.r)
        total = np.zeros(len(e), dtype=np.int64)
        for i in range(self.r):
            total = total * self.n + e[:, i]
        return total

    def build(self, ranks) -> PartiteHypergraph:
        return PartiteHypergraph(self.r, self.n, self.unrank(np.asarray(ranks, dtype=np.int64)))

    def ranks_of(self, H: PartiteHypergraph) -> np.ndarray:
        return np.sort(self.rank(H.edges))


Space = Union[UniformSpace, PartiteSpace]


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise HypergraphError(f"edge probability must lie in [0, 1], got {p}")
    return p


def skip_sample_ranks(m: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted ranks of a Bernoulli(p) subset of ``[0, m)`` via geometric skips."""
    p = _check_p(p)
    if m == 0 or p == 0.0:
        return np.empty(0, dtype=np.int64)
    if p == 1.0:
        return np.arange(m, dtype=np.int64)
    chunks = []
    pos = -1
    mean = m * p
    batch = int(mean + 6 * math.sqrt(mean) + 16)
    while True:
        gaps = rng.geometric(p, size=batch).astype(np.int64)
        local = pos + np.cumsum(gaps)
        inside = local[local < m]
        chunks.append(inside)
        if len(inside) < len(local):
            break
        pos = int(local[-1])
        batch = max(16, batch // 4)
    return np.concatenate(chunks)


def sample_uniform_hypergraph(n: int, r: int, p: float, seed: Seed | int | None = None) -> Hypergraph:
    """Sample ``H_r(n, p)``."""
    if n < r:
        raise HypergraphError("need n >= r")
    space = UniformSpace(n, r)
    ranks = skip_sample_ranks(space.m, p, as_seed(seed).generator())
    return space.build(ranks)


def sample_partite_hypergraph(r: int, n: int, p: float, seed: Seed | int | None = None) -> PartiteHypergraph:
    """Sample ``H(r, n, p)``."""
    if n < 1:
        raise HypergraphError("part size must be positive")
    space = PartiteSpace(r, n)
    ranks = skip_sample_ranks(space.m, p, as_seed(seed).generator())
    return space.build(ranks)


def uniform_p(n: int, r: int, d: float) -> float:
    """Edge probability giving expected vertex degree ``d`` in ``H_r(n, p)``."""
    return min(1.0, d / math.comb(n - 1, r - 1))


def partite_p(n: int, r: int, d: float) -> float:
    """Edge probability ``d / n^(r-1)`` for ``H(r, n, p)``."""
    return min(1.0, d / n ** (r - 1))


# -- rooted hypertrees ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RootedHypertree:
    """A rooted r-uniform hypertree grown level by level.

    Vertex 0 is the root.  Every edge is stored as ``(parent, child_1, ...,
    child_{r-1})`` with the parent at some level ``k`` and fresh children at
    level ``k + 1``.
    """

    r: int
    depth: int
    level: tuple[int, ...]
    edges: tuple[tuple[int, ...], ...]
    parent_edge: tuple[int, ...] = field(repr=False)

    root = 0

    @property
    def num_vertices(self) -> int:
        return len(self.level)

    @property
    def n(self) -> int:
        return len(self.level)

    @cached_property
    def child_edges(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for idx, e in enumerate(self.edges):
            out[e[0]].append(idx)
        return out

    def degree(self, v: int) -> int:
        return len(self.child_edges[v]) + (self.parent_edge[v] >= 0)

    def vertices_at(self, k: int) -> list[int]:
        return [v for v, lv in enumerate(self.level) if lv == k]

    @cached_property
    def hypergraph(self) -> Hypergraph:
        return Hypergraph(self.num_vertices, self.r, self.edges)

    def as_rooted(self, s: int | None = None) -> RootedHypergraph:
        s = self.depth if s is None else s
        kept = [e for e in self.edges if self.level[e[0]] < s]
        return rooted_from_edges(self.r, kept, 0, s)


class _TreeBuilder:
    def __init__(self, r: int):
        self.r = r
        self.level = [0]
        self.parent_edge = [-1]
        self.edges: list[tuple[int, ...]] = []

    def spawn(self, parent: int) -> list[int]:
        lv = self.level[parent] + 1
        first = len(self.level)
        kids = list(range(first, first + self.r - 1))
        eidx = len(self.edges)
        self.edges.append((parent, *kids))
        self.level.extend([lv] * (self.r - 1))
        self.parent_edge.extend([eidx] * (self.r - 1))
        return kids

    def freeze(self, depth: int) -> RootedHypertree:
        return RootedHypertree(self.r, depth, tuple(self.level), tuple(self.edges), tuple(self.parent_edge))


def sample_gw_hypertree(d: float, r: int, depth: int, seed: Seed | int | None = None) -> RootedHypertree:
    """Poisson(d) Galton-Watson hypertree truncated after ``depth`` levels."""
    if d < 0 or depth < 0:
        raise HypergraphError("need d >= 0 and depth >= 0")
    rng = as_seed(seed).generator()
    b = _TreeBuilder(r)
    frontier = [0]
    for _ in range(depth):
        if not frontier:
            break
        counts = rng.poisson(d, size=len(frontier)) if d > 0 else np.zeros(len(frontier), dtype=int)
        nxt = []
        for v, c in zip(frontier, counts.tolist()):
            for _ in range(c):
                nxt.extend(b.spawn(v))
        frontier = nxt
    return b.freeze(depth)


def build_regular_hypertree(delta: int, r: int, depth: int) -> RootedHypertree:
    """The Delta-regular rooted hypertree truncated after ``depth`` levels."""
    if delta < 1 or depth < 0:
        raise HypergraphError("need delta >= 1 and depth >= 0")
    b = _TreeBuilder(r)
    frontier = [0]
    for k in range(depth):
        per = delta if k == 0 else delta - 1
        nxt = []
        for v in frontier:
            for _ in range(per):
                nxt.extend(b.spawn(v))
        frontier = nxt
    return b.freeze(depth)


def greedy_delta(d: float) -> int:
    """Degree cap ``ceil(d + d^(3/4))`` used when adapting the greedy to GW trees."""
    return max(1, math.ceil(d + d**0.75))


# -- the event E(d, Delta) ---------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    value: float
    se: float
    trials: int

    def __iter__(self):
        return iter((self.value, self.se))


def estimate_event_E(d: float, delta: int, r: int, trials: int, seed: Seed | int | None = None) -> Estimate:
    """Monte Carlo estimate of P[root and all its neighbours have degree <= delta].

    The root's degree is its offspring count; a level-1 vertex has its parent
    edge plus its own Poisson(d) offspring.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if d == 0:
        return Estimate(1.0, 0.0, trials)
    rng = as_seed(seed).generator()
    root_deg = rng.poisson(d, size=trials)
    kids = (r - 1) * root_deg
    z = rng.poisson(d, size=int(kids.sum()))
    bad_kid = (1 + z) > delta
    owner = np.repeat(np.arange(trials), kids)
    any_bad = np.zeros(trials, dtype=bool)
    np.logical_or.at(any_bad, owner, bad_kid)
    ok = (root_deg <= delta) & ~any_bad
    est = float(ok.mean())
    return Estimate(est, math.sqrt(est * (1 - est) / trials), trials)


# -- interpolation paths -----------------------------------------------------------

class InterpolationPath:
    """Correlated instances ``A^(0), ..., A^(T)``.

    Step ``t`` redraws coordinate ``sigma(t) = (t - 1) mod m`` (0-based rank).
    All redraws of sweep ``k`` (steps ``k*m + 1 .. (k+1)*m``) come from the
    substream ``seed.child("sweep", k)``; the fresh Bernoulli(p) set for that sweep
    is skip-sampled, so only steps that change the state need to be visited.
    """

    def __init__(self, space: Space, p: float, T: int, seed: Seed | int | None = None, base: np.ndarray | None = None):
        self.space = space
        self.p = _check_p(p)
        self.m = space.m
        if T < 0:
            raise ValueError("T must be nonnegative")
        self.T = int(T)
        self.seed = as_seed(seed)
        if base is None:
            base = skip_sample_ranks(self.m, self.p, self.seed.child("base").generator())
        self.base = np.sort(np.asarray(base, dtype=np.int64))
        self._sweeps: dict[int, np.ndarray] = {}

    @classmethod
    def from_sweeps(cls, space, p, Gamma: int, seed=None) -> "InterpolationPath":
        return cls(space, p, Gamma * space.m, seed)

    @property
    def num_sweeps(self) -> int:
        return -(-self.T // self.m) if self.m else 0

    def sweep_set(self, k: int) -> np.ndarray:
        if k not in self._sweeps:
            self._sweeps[k] = skip_sample_ranks(self.m, self.p, self.seed.child("sweep", k).generator())
        return self._sweeps[k]

    def _before_sweep(self, k: int) -> np.ndarray:
        return self.base if k == 0 else self.sweep_set(k - 1)

    def sigma(self, t: int) -> int:
        if not 1 <= t <= self.T:
            raise IndexError(f"step {t} outside [1, {self.T}]")
        return (t - 1) % self.m

    def state(self, t: int) -> np.ndarray:
        """Sorted ranks of the edges present in ``A^(t)``."""
        if not 0 <= t <= self.T:
            raise IndexError(f"step {t} outside [0, {self.T}]")
        if t == 0:
            return self.base
        k, j = divmod(t, self.m)
        if j == 0:
            return self.sweep_set(k - 1)
        old = self._before_sweep(k)
        new = self.sweep_set(k)
        return np.concatenate([new[new < j], old[old >= j]])

    def instance(self, t: int):
        return self.space.build(self.state(t))

    def deltas(self) -> Iterator[tuple[int, int, int]]:
        """Yield ``(t, coordinate, new_value)`` for every step that changes the state.

        Steps that redraw a coordinate to its current value are skipped.
        """
        for k in range(self.num_sweeps):
            old = self._before_sweep(k)
            new = self.sweep_set(k)
            changed = np.setxor1d(old, new, assume_unique=True)
            values = np.isin(changed, new, assume_unique=True)
            steps = k * self.m + changed + 1
            for t, coord, val in zip(steps.tolist(), changed.tolist(), values.tolist()):
                if t > self.T:
                    return
                yield t, coord, int(val)


def path_step(path: InterpolationPath, t: int) -> np.ndarray:
    return path.state(t)
