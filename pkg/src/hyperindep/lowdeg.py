"""Low-degree polynomial algorithms: representation, the local-to-polynomial
compiler, the eta-rounding step, the optimization-contract checker and the
degree-1 balanced algorithm.

Edge coordinates are ranks in the model's coordinate space (see
:mod:`hyperindep.models`).  Vertex values of partite instances are indexed by
flat id ``part * n + idx``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import GammaVector, Hypergraph, HypergraphError, PartiteHypergraph, RootedHypergraph, rooted_from_edges
from .local import LocalFunction, VertexLabels, _labels_array
from .models import PartiteSpace, UniformSpace
from .seeding import Seed, as_seed


# -- explicit polynomials ----------------------------------------------------------------

Monomial = tuple[float, frozenset]


class VertexPolynomialSet:
    """Per-vertex polynomials in the edge indicators ``A_e``.

    ``monomials[v]`` lists ``(coefficient, coordinates)`` pairs; the empty
    coordinate set is the constant term.  ``omega`` records the randomness the
    polynomials were built from.
    """

    def __init__(self, space, monomials: Sequence[Sequence[Monomial]], omega=None):
        self.space = space
        self._monomials = [[(float(c), frozenset(int(x) for x in s)) for c, s in mono] for mono in monomials]
        self.omega = omega
        for mono in self._monomials:
            for _, s in mono:
                if any(not 0 <= x < space.m for x in s):
                    raise HypergraphError("monomial uses a coordinate outside the model's space")

    @property
    def num_vertices(self) -> int:
        return len(self._monomials)

    def monomials(self, v: int) -> list[Monomial]:
        return self._monomials[v]

    @property
    def degree(self) -> int:
        return max((len(s) for v in range(self.num_vertices) for _, s in self.monomials(v)), default=0)

    @cached_property
    def _by_coord(self) -> dict[int, list[int]]:
        out: dict[int, set[int]] = {}
        for v in range(self.num_vertices):
            for _, s in self.monomials(v):
                for x in s:
                    out.setdefault(x, set()).add(v)
        return {x: sorted(vs) for x, vs in out.items()}

    def affected(self, coord: int) -> list[int]:
        """Vertices whose polynomial involves ``coord``."""
        return self._by_coord.get(int(coord), [])

    def vertex_value(self, v: int, present) -> float:
        return float(sum(c for c, s in self.monomials(v) if s <= present))

    def evaluate(self, ranks: Iterable[int]) -> np.ndarray:
        present = set(int(x) for x in ranks)
        return np.array([self.vertex_value(v, present) for v in range(self.num_vertices)], dtype=float)

    def evaluate_instance(self, H) -> np.ndarray:
        return self.evaluate(self.space.ranks_of(H).tolist())

    def step_change(self, coord: int, value: int, present: set) -> list[tuple[int, float]]:
        """New values ``(v, f_v)`` after setting ``A_coord = value``; ``present``
        already reflects the change."""
        return [(v, self.vertex_value(v, present)) for v in self.affected(coord)]


def zero_polynomial(space, num_vertices: int) -> VertexPolynomialSet:
    return VertexPolynomialSet(space, [[] for _ in range(num_vertices)])


def squared_norm(values: np.ndarray) -> float:
    """``||f||^2``; overflow sentinels (NaN) contribute 0."""
    v = np.nan_to_num(np.asarray(values, dtype=float), nan=0.0)
    return float(v @ v)


# -- rounding ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class RoundingOutcome:
    """Result of V_f^eta.  On failure ``selected`` is empty and ``failed`` is set."""

    I: frozenset
    I_tilde: frozenset
    J: frozenset
    overflow: frozenset
    errors: int
    budget: float
    accepted: bool

    @property
    def failed(self) -> bool:
        return not self.accepted

    @property
    def selected(self) -> frozenset:
        return self.I_tilde if self.accepted else frozenset()


def _host(instance) -> tuple[Hypergraph, int, Callable]:
    if isinstance(instance, PartiteHypergraph):
        return instance.flat, instance.total_vertices, instance.pair
    return instance, instance.n, int


def round_values(f_values, instance, eta: float) -> RoundingOutcome:
    """V_f^eta: keep ``I = {f >= 1}`` minus edge violators, provided the number
    of violators plus ambiguous values ``f in (1/2, 1)`` is at most ``eta * n``.

    NaN values (compiler overflow) count as ambiguous.  Partite instances use
    ``n = r * n`` and report vertices as ``(part, idx)``.
    """
    if eta < 0:
        raise ValueError("eta must be >= 0")
    G, n_total, name = _host(instance)
    f = np.asarray(f_values, dtype=float)
    if f.shape != (n_total,):
        raise HypergraphError(f"expected {n_total} vertex values, got shape {f.shape}")
    over = np.isnan(f)
    in_I = np.where(over, False, f >= 1)
    in_J = np.where(over, False, (f > 0.5) & (f < 1))
    violators = np.zeros(n_total, dtype=bool)
    if G.m:
        full = in_I[G.edges].all(axis=1)
        violators[G.edges[full].ravel()] = True
    kept = in_I & ~violators
    errors = int((in_I & violators).sum() + in_J.sum() + over.sum())
    budget = eta * n_total

    def conv(mask):
        return frozenset(name(int(u)) for u in np.flatnonzero(mask))

    return RoundingOutcome(conv(in_I), conv(kept), conv(in_J), conv(over), errors, budget, errors <= budget + 1e-12)


# -- local-to-polynomial compiler -----------------------------------------------------------

OVERFLOW = float("nan")


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _enumeration_edges(A: Hypergraph, v: int, s: int) -> tuple[list[tuple[int, ...]], dict[int, int]]:
    """Edges of A whose vertices are all within distance s of v: the support of
    every monomial that can be nonzero at A."""
    dist = {v: 0}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        if dist[u] >= s:
            continue
        for ei in A.incidence[u]:
            for w in A.edge_tuples[ei]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
    seen = set()
    edges = []
    for u in dist:
        for ei in A.incidence[u]:
            if ei not in seen and all(w in dist for w in A.edge_tuples[ei]):
                seen.add(ei)
                edges.append(A.edge_tuples[ei])
    edges.sort()
    return edges, dist


class _VertexExpansion:
    """Members of H_{v,s,q} inside a fixed edge list, with g-values and alphas."""

    def __init__(self, g: LocalFunction, r: int, edges: Sequence[tuple[int, ...]], root: int, x: np.ndarray, q: int):
        self.g = g
        self.r = r
        self.edges = list(edges)
        self.root = root
        self.x = x
        self.q = q
        self.k = len(self.edges)
        ids = sorted({root} | {u for e in self.edges for u in e})
        self.index = {u: i for i, u in enumerate(ids)}
        self.vmask = [sum(1 << self.index[u] for u in e) for e in self.edges]
        self._g: dict[int, float] = {}

    def is_member(self, mask: int) -> bool:
        if mask.bit_count() > self.q:
            return False
        union = 0
        for i in _bits(mask):
            union |= self.vmask[i]
        reach = 1 << self.index[self.root]
        for _ in range(self.g.radius):
            nxt = reach
            for i in _bits(mask):
                if self.vmask[i] & reach:
                    nxt |= self.vmask[i]
            if nxt == reach:
                break
            reach = nxt
        return union & ~reach == 0

    def gval(self, mask: int) -> float:
        if mask not in self._g:
            sub = [self.edges[i] for i in _bits(mask)]
            ball = rooted_from_edges(self.r, sub, self.root, self.g.radius)
            self._g[mask] = float(self.g(ball, self.x[list(ball.orig)]))
        return self._g[mask]

    @cached_property
    def members(self) -> list[int]:
        out = [m for m in range(1 << self.k) if self.is_member(m)]
        out.sort(key=int.bit_count)
        return out

    def alphas_recursive(self) -> dict[int, float]:
        alpha: dict[int, float] = {}
        for m in self.members:
            total = 0.0
            sub = (m - 1) & m
            while True:
                if sub != m:
                    total += alpha.get(sub, 0.0)
                if sub == 0:
                    break
                sub = (sub - 1) & m
            alpha[m] = self.gval(m) - total
        return alpha

    def alphas_mobius(self) -> dict[int, float]:
        # valid when every subset has <= q edges: then sum_{H' <= H} alpha(H')
        # equals g on the part of H reachable from the root, for every H
        if self.k > self.q:
            raise ValueError("Moebius inversion needs k <= q")
        size = 1 << self.k
        beta = np.empty(size)
        for m in range(size):
            beta[m] = self.gval(self._reachable_part(m))
        for i in range(self.k):
            bit = 1 << i
            idx = np.arange(size)
            hi = idx[(idx & bit) != 0]
            beta[hi] -= beta[hi ^ bit]
        return {m: float(beta[m]) for m in self.members}

    def _reachable_part(self, mask: int) -> int:
        reach = 1 << self.index[self.root]
        for _ in range(self.g.radius):
            nxt = reach
            for i in _bits(mask):
                if self.vmask[i] & reach:
                    nxt |= self.vmask[i]
            reach = nxt
        return sum(1 << i for i in _bits(mask) if self.vmask[i] & ~reach == 0)


class CompiledLocalPolynomial:
    """The polynomial ``f_v = sum_{H in H_{v,s,q}} alpha(H, v, X) prod_{e in H} A_e``
    evaluated at a fixed instance.

    Only monomials supported inside the instance can be nonzero, so each vertex
    enumerates the sub-hypergraphs of its radius-s edge set.  Vertices with more
    than ``q_max`` such edges get the overflow sentinel NaN.
    """

    def __init__(self, g: LocalFunction, A: Hypergraph, labels, q: int = 12, q_max: int = 16, method: str = "recursion"):
        if q < 0 or q_max < 0:
            raise ValueError("q and q_max must be nonnegative")
        if method not in ("recursion", "mobius"):
            raise ValueError("method must be 'recursion' or 'mobius'")
        self.g = g
        self.s = g.radius
        self.A = A
        self.x = _labels_array(labels)
        self.q = q
        self.q_max = q_max
        self.method = method
        self._cache: dict[int, float] = {}
        self.support_sizes: dict[int, int] = {}

    def expansion(self, v: int) -> _VertexExpansion | None:
        edges, _ = _enumeration_edges(self.A, v, self.s)
        self.support_sizes[v] = len(edges)
        if len(edges) > self.q_max:
            return None
        return _VertexExpansion(self.g, self.A.r, edges, v, self.x, self.q)

    def evaluate(self, v: int) -> float:
        if v not in self._cache:
            exp = self.expansion(v)
            if exp is None:
                self._cache[v] = OVERFLOW
            else:
                use_mobius = self.method == "mobius" and exp.k <= self.q
                alpha = exp.alphas_mobius() if use_mobius else exp.alphas_recursive()
                self._cache[v] = float(sum(alpha.values()))
        return self._cache[v]

    def values(self) -> np.ndarray:
        return np.array([self.evaluate(v) for v in range(self.A.n)], dtype=float)

    def coefficient(self, v: int, edges: Sequence[Sequence[int]]) -> float:
        """alpha(H, v, X) for an explicit small H given by its edges."""
        H = [tuple(sorted(e)) for e in edges]
        exp = _VertexExpansion(self.g, self.A.r, sorted(set(H)), v, self.x, self.q)
        full = (1 << exp.k) - 1
        if not exp.is_member(full):
            return 0.0
        return exp.alphas_recursive()[full]

    @property
    def overflow_fraction(self) -> float:
        vals = [self.evaluate(v) for v in range(self.A.n)]
        return sum(math.isnan(x) for x in vals) / max(1, self.A.n)

    @property
    def over_q_fraction(self) -> float:
        self.values()
        return sum(1 for k in self.support_sizes.values() if k > self.q) / max(1, self.A.n)


def compile_local_to_polynomial(g: LocalFunction, A: Hypergraph, labels, q: int = 12, q_max: int = 16, method: str = "recursion") -> CompiledLocalPolynomial:
    return CompiledLocalPolynomial(g, A, labels, q=q, q_max=q_max, method=method)


def local_coefficient(g: LocalFunction, edges: Sequence[Sequence[int]], root: int, labels, q: int = 12) -> float:
    """alpha(H, root, X) for H given by ``edges`` (labels indexed by vertex id)."""
    H = sorted({tuple(sorted(e)) for e in edges})
    r = len(H[0]) if H else 2
    exp = _VertexExpansion(g, r, H, root, _labels_array(labels), q)
    full = (1 << exp.k) - 1
    if not exp.is_member(full):
        return 0.0
    return exp.alphas_recursive()[full]


# -- degree-1 balanced algorithm --------------------------------------------------------------

class Degree1BalancedPolynomial(VertexPolynomialSet):
    """``f_v = 1_{v in L_i}`` off the designated part and
    ``f_v = 1 - #{edges of A inside L_1 x ... x {v} x ... x L_r}`` on it,
    with ``L_i`` the first ``k_i`` vertices of part i."""

    def __init__(self, r: int, n: int, k: Sequence[int], istar: int):
        if len(k) != r:
            raise HypergraphError(f"need {r} targets, got {len(k)}")
        if not 0 <= istar < r:
            raise HypergraphError("istar out of range")
        k = tuple(int(x) for x in k)
        if any(x < 0 or x > n for x in k):
            raise HypergraphError(f"targets must lie in [0, n = {n}]")
        self.space = PartiteSpace(r, n)
        self.r, self.n, self.k, self.istar = r, n, k, istar
        self.omega = {"L": "first k_i indices", "k": list(k), "istar": istar}

    @property
    def num_vertices(self) -> int:
        return self.r * self.n

    @property
    def block_size(self) -> int:
        """Number of coordinates in L_1 x ... x L_{r-1} (excluding the designated part)."""
        return math.prod(self.k[i] for i in range(self.r) if i != self.istar)

    @property
    def critical_coordinates(self) -> int:
        return self.block_size * self.n

    @property
    def degree(self) -> int:
        return 1 if self.block_size else 0

    def _in_block(self, edges: np.ndarray) -> np.ndarray:
        # edges: (m, r) per-part indices
        ok = np.ones(len(edges), dtype=bool)
        for i in range(self.r):
            if i != self.istar:
                ok &= edges[:, i] < self.k[i]
        return ok

    def monomials(self, v: int) -> list[Monomial]:
        part, idx = divmod(v, self.n)
        if part != self.istar:
            return [(1.0, frozenset())] if idx < self.k[part] else []
        grids = [np.arange(self.k[i]) if i != self.istar else np.array([idx]) for i in range(self.r)]
        mesh = np.stack([g.ravel() for g in np.meshgrid(*grids, indexing="ij")], axis=1) if self.block_size else np.zeros((0, self.r), dtype=np.int64)
        ranks = self.space.rank(mesh).tolist() if len(mesh) else []
        return [(1.0, frozenset())] + [(-1.0, frozenset([int(x)])) for x in ranks]

    def affected(self, coord: int) -> list[int]:
        e = self.space.unrank(np.array([coord]))
        if self._in_block(e)[0]:
            return [self.istar * self.n + int(e[0, self.istar])]
        return []

    def coordinate_delta(self, coord: int, value: int) -> list[tuple[int, float]]:
        """``(v, change of f_v)`` when coordinate ``coord`` is set to ``value`` from ``1 - value``."""
        return [(v, -1.0 if value else 1.0) for v in self.affected(coord)]

    def base_values(self) -> np.ndarray:
        vals = np.zeros(self.num_vertices)
        for i in range(self.r):
            if i == self.istar:
                vals[i * self.n:(i + 1) * self.n] = 1.0
            else:
                vals[i * self.n:i * self.n + self.k[i]] = 1.0
        return vals

    def evaluate_edges(self, edges: np.ndarray) -> np.ndarray:
        vals = self.base_values()
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, self.r)
        hit = edges[self._in_block(edges), self.istar]
        vals[self.istar * self.n:(self.istar + 1) * self.n] -= np.bincount(hit, minlength=self.n)
        return vals

    def evaluate(self, ranks) -> np.ndarray:
        ranks = np.asarray(list(ranks) if not isinstance(ranks, np.ndarray) else ranks, dtype=np.int64)
        return self.evaluate_edges(self.space.unrank(ranks) if len(ranks) else np.zeros((0, self.r), dtype=np.int64))

    def evaluate_instance(self, PH: PartiteHypergraph) -> np.ndarray:
        return self.evaluate_edges(PH.edges)

    def vertex_value(self, v: int, present) -> float:
        return float(sum(c for c, s in self.monomials(v) if s <= present))

    def selection_probability(self, p: float) -> float:
        """P[f_v = 1] for a designated-part vertex under H(r, n, p)."""
        return (1 - p) ** self.block_size

    def expected_squared_norm(self, p: float) -> float:
        """Exact E||f||^2 under H(r, n, p)."""
        N = self.block_size
        mu = N * p
        second = N * p * (1 - p) + mu * mu
        return float(sum(self.k[i] for i in range(self.r) if i != self.istar) + self.n * (1 - 2 * mu + second))


def _resolve_istar(r: int, istar: int | None, gamma) -> int:
    if istar is not None:
        return int(istar)
    if gamma is not None:
        return GammaVector.coerce(gamma).istar
    return r - 1


def degree1_balanced(PH: PartiteHypergraph, k: Sequence[int], seed: Seed | int | None = None, istar: int | None = None, gamma=None) -> tuple[Degree1BalancedPolynomial, RoundingOutcome]:
    """Run the degree-1 balanced algorithm on ``PH`` (rounding with eta = 0).

    The designated part defaults to the argmax of ``gamma`` when given and to
    the last part otherwise.  The construction is deterministic; ``seed`` is
    accepted for interface uniformity and recorded in ``omega``.
    """
    poly = Degree1BalancedPolynomial(PH.r, PH.n, k, _resolve_istar(PH.r, istar, gamma))
    poly.omega["seed"] = None if seed is None else repr(as_seed(seed))
    return poly, round_values(poly.evaluate_instance(PH), PH, 0.0)


def balanced_selection(selected: Iterable[tuple[int, int]], k: Sequence[int]) -> frozenset | None:
    """Exactly ``k_i`` vertices of each part (smallest indices first), or None
    if some part has fewer.  A subset of an independent set stays independent,
    so with gamma-proportional targets the result is gamma-balanced."""
    by_part: dict[int, list[int]] = {}
    for part, idx in selected:
        by_part.setdefault(part, []).append(idx)
    out = []
    for part, need in enumerate(k):
        have = sorted(by_part.get(part, []))
        if len(have) < need:
            return None
        out.extend((part, idx) for idx in have[:need])
    return frozenset(out)


# -- optimization contract ---------------------------------------------------------------------

@dataclass(frozen=True)
class OptimizationReport:
    mean_norm: float
    norm_se: float
    success_rate: float
    success_se: float
    targets: tuple[int, ...]
    delta: float
    xi: float
    eta: float
    trials: int
    norm_bound: float
    norm_pass: bool
    success_pass: bool
    extra: dict = field(default_factory=dict)

    @property
    def xi_min(self) -> float:
        total = sum(self.targets)
        return self.mean_norm / total if total else math.inf

    @property
    def passed(self) -> bool:
        return self.norm_pass and self.success_pass

    def to_dict(self) -> dict:
        return {
            "params": {"targets": list(self.targets), "delta": self.delta, "xi": self.xi, "eta": self.eta, **self.extra},
            "trials": self.trials,
            "mean_norm": self.mean_norm,
            "success_rate": self.success_rate,
            "se": {"mean_norm": self.norm_se, "success_rate": self.success_se},
            "xi_min": self.xi_min,
            "pass": {"norm": self.norm_pass, "success": self.success_pass, "overall": self.passed},
        }


def _meets(selected: frozenset, instance, targets: tuple[int, ...], per_part: bool) -> bool:
    if not per_part:
        return len(selected) >= targets[0]
    counts = [0] * len(targets)
    for part, _ in selected:
        counts[part] += 1
    return all(c >= t for c, t in zip(counts, targets))


def check_optimization(
    builder: Callable[[object, Seed], np.ndarray],
    sampler: Callable[[Seed], object],
    targets,
    delta: float,
    xi: float,
    eta: float,
    trials: int,
    seed: Seed | int | None = None,
    extra: dict | None = None,
) -> OptimizationReport:
    """Monte Carlo check of E||f||^2 <= xi k and P[|V_f^eta| >= k] >= 1 - delta.

    ``targets`` is an int ``k`` or per-part sizes ``(k_1, ..., k_r)``; in the
    latter case success means ``|V ∩ V_i| >= k_i`` for all i and the norm bound
    is ``xi * sum k_i``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    per_part = not isinstance(targets, (int, np.integer))
    tg = tuple(int(x) for x in targets) if per_part else (int(targets),)
    seed = as_seed(seed)
    norms = np.empty(trials)
    wins = 0
    for i in range(trials):
        s = seed.trial(i)
        inst = sampler(s.child("instance"))
        vals = builder(inst, s.child("algorithm"))
        norms[i] = squared_norm(vals)
        out = round_values(vals, inst, eta)
        wins += out.accepted and _meets(out.selected, inst, tg, per_part)
    mean = float(norms.mean())
    nse = float(norms.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    rate = wins / trials
    rse = math.sqrt(rate * (1 - rate) / trials)
    bound = xi * sum(tg)
    return OptimizationReport(
        mean, nse, rate, rse, tg, delta, xi, eta, trials, bound, mean <= bound, rate >= 1 - delta, dict(extra or {})
    )


__all__ = [
    "VertexPolynomialSet",
    "zero_polynomial",
    "squared_norm",
    "RoundingOutcome",
    "round_values",
    "OVERFLOW",
    "CompiledLocalPolynomial",
    "compile_local_to_polynomial",
    "local_coefficient",
    "Degree1BalancedPolynomial",
    "degree1_balanced",
    "balanced_selection",
    "OptimizationReport",
    "check_optimization",
]
