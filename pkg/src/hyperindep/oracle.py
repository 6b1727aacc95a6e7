"""Exact maximum (balanced, block-constrained) independent sets for small instances."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import GammaVector, Hypergraph, HypergraphError, PartiteHypergraph


class CapExceeded(HypergraphError):
    pass


@dataclass(frozen=True)
class OracleResult:
    optimum: int
    witness: frozenset
    nodes: int

    def to_dict(self) -> dict:
        wit = sorted(self.witness)
        return {"optimum": self.optimum, "witness": [list(w) if isinstance(w, tuple) else w for w in wit], "nodes": self.nodes}


DEFAULT_CAP = 40
DEFAULT_BALANCED_CAP = 36
EXHAUSTIVE_CAP = 20


def _edge_masks(H: Hypergraph) -> list[int]:
    return [sum(1 << u for u in e) for e in H.edge_tuples]


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Search:
    """Depth-first branch and bound over include/exclude decisions.

    ``chosen`` and ``open_`` are bitsets.  Taking ``v`` removes from ``open_``
    every vertex that would complete an edge with ``chosen``, exactly as the
    greedy deletion rule does; excluding ``v`` just drops it.
    """

    def __init__(self, n: int, masks: list[int]):
        self.n = n
        self.masks = masks
        self.inc: list[list[int]] = [[] for _ in range(n)]
        for em in masks:
            for u in _bits(em):
                self.inc[u].append(em)
        self.nodes = 0

    def take(self, v: int, chosen: int, open_: int) -> tuple[int, int]:
        chosen |= 1 << v
        open_ &= ~(1 << v)
        for em in self.inc[v]:
            rest = em & ~chosen
            if rest and rest & (rest - 1) == 0:
                open_ &= ~rest
        return chosen, open_

    def alive_degree(self, v: int, chosen: int, open_: int) -> int:
        allowed = chosen | open_
        return sum(1 for em in self.inc[v] if em & allowed == em)

    def pick(self, chosen: int, open_: int, candidates: int) -> tuple[int, int]:
        best_v, best_deg = -1, -1
        for v in _bits(candidates):
            dg = self.alive_degree(v, chosen, open_)
            if dg > best_deg:
                best_v, best_deg = v, dg
        return best_v, best_deg


def max_independent_set(H: Hypergraph, cap: int = DEFAULT_CAP) -> OracleResult:
    """Exact maximum independent set by branch and bound."""
    if H.n > cap:
        raise CapExceeded(f"n = {H.n} exceeds the exact-solver cap {cap}; raise cap explicitly if intended")
    S = _Search(H.n, _edge_masks(H))
    best = [0, 0]

    def rec(chosen: int, open_: int) -> None:
        S.nodes += 1
        size = chosen.bit_count()
        if size + open_.bit_count() <= best[0]:
            return
        if not open_:
            best[0], best[1] = size, chosen
            return
        v, deg = S.pick(chosen, open_, open_)
        if deg == 0:
            # every open vertex is free: take them all
            best[0], best[1] = size + open_.bit_count(), chosen | open_
            return
        rec(*S.take(v, chosen, open_))
        rec(chosen, open_ & ~(1 << v))

    rec(0, (1 << H.n) - 1)
    return OracleResult(best[0], frozenset(_bits(best[1])), S.nodes)


def _all_masks(n: int) -> np.ndarray:
    if n > EXHAUSTIVE_CAP + 4:
        raise CapExceeded(f"exhaustive enumeration refused for n = {n}")
    return np.arange(1 << n, dtype=np.uint64)


def _independent_masks(n: int, masks: list[int]) -> np.ndarray:
    allm = _all_masks(n)
    ok = np.ones(allm.size, dtype=bool)
    for em in masks:
        e = np.uint64(em)
        ok &= (allm & e) != e
    return allm, ok


def _best_mask(allm: np.ndarray, ok: np.ndarray) -> tuple[int, int]:
    sizes = np.where(ok, np.bitwise_count(allm).astype(np.int64), -1)
    i = int(np.argmax(sizes))
    return int(sizes[i]), int(allm[i])


def max_independent_set_exhaustive(H: Hypergraph) -> OracleResult:
    """Enumerate all 2^n subsets (n <= 20)."""
    if H.n > EXHAUSTIVE_CAP:
        raise CapExceeded(f"exhaustive enumeration limited to n <= {EXHAUSTIVE_CAP}")
    allm, ok = _independent_masks(H.n, _edge_masks(H))
    size, m = _best_mask(allm, ok)
    return OracleResult(size, frozenset(_bits(m)), int(allm.size))


# -- balanced variants ------------------------------------------------------------------

def _admissible_totals(g: GammaVector, n_total: int):
    fracs = [Fraction(x).limit_denominator(10**6) for x in g.entries]
    unit = 1
    for f in fracs:
        unit = unit * f.denominator // np.gcd(unit, f.denominator)
    return fracs, list(range((n_total // unit) * unit, -1, -unit))


def _quota_feasible(PH: PartiteHypergraph, quota: list[int], block: int | None, S: _Search) -> int | None:
    """A chosen bitset with exactly ``quota[i]`` vertices in part i, or None."""
    n, r = PH.n, PH.r
    part_mask = [((1 << n) - 1) << (i * n) for i in range(r)]
    blocks = []
    if block:
        for i in range(r):
            for j in range(n // block):
                blocks.append(((1 << block) - 1) << (i * n + j * block))
    block_of = {}
    for bm in blocks:
        for u in _bits(bm):
            block_of[u] = bm

    def room(chosen: int, open_: int, i: int) -> int:
        avail = open_ & part_mask[i]
        if not block:
            return avail.bit_count()
        return sum(1 for bm in blocks if bm & part_mask[i] and bm & avail and not bm & chosen)

    def rec(chosen: int, open_: int):
        S.nodes += 1
        need_any = False
        candidates = 0
        for i in range(r):
            have = (chosen & part_mask[i]).bit_count()
            if have > quota[i]:
                return None
            if have == quota[i]:
                open_ &= ~part_mask[i]
            else:
                need_any = True
        if not need_any:
            return chosen
        for i in range(r):
            have = (chosen & part_mask[i]).bit_count()
            if have < quota[i]:
                if have + room(chosen, open_, i) < quota[i]:
                    return None
                candidates |= open_ & part_mask[i]
        v, _ = S.pick(chosen, open_, candidates)
        c2, o2 = S.take(v, chosen, open_)
        if block:
            o2 &= ~block_of[v]
        found = rec(c2, o2)
        if found is not None:
            return found
        return rec(chosen, open_ & ~(1 << v))

    return rec(0, (1 << (r * n)) - 1)


def _balanced_search(PH: PartiteHypergraph, gamma, block: int | None, cap: int) -> OracleResult:
    g = GammaVector.coerce(gamma)
    if len(g) != PH.r:
        raise HypergraphError("gamma length must equal r")
    n_total = PH.r * PH.n
    if n_total > cap:
        raise CapExceeded(f"r*n = {n_total} exceeds the balanced-solver cap {cap}")
    S = _Search(n_total, _edge_masks(PH.flat))
    fracs, totals = _admissible_totals(g, n_total)
    for t in totals:
        quota = [int(f * t) for f in fracs]
        limit = PH.n if not block else PH.n // block
        if any(qi > limit for qi in quota):
            continue
        found = _quota_feasible(PH, quota, block, S)
        if found is not None:
            return OracleResult(t, frozenset(PH.pair(u) for u in _bits(found)), S.nodes)
    return OracleResult(0, frozenset(), S.nodes)


def max_gamma_balanced(PH: PartiteHypergraph, gamma, cap: int = DEFAULT_BALANCED_CAP) -> OracleResult:
    """Largest independent I with |I ∩ V_i| = gamma_i |I| for every part."""
    return _balanced_search(PH, gamma, None, cap)


def max_P_independent(PH: PartiteHypergraph, gamma, block: int, cap: int = DEFAULT_BALANCED_CAP) -> OracleResult:
    """As :func:`max_gamma_balanced` with at most one vertex per block.

    Blocks are consecutive index ranges of length ``block`` inside each part.
    """
    if block < 1 or PH.n % block:
        raise HypergraphError(f"block size {block} must divide n = {PH.n}")
    return _balanced_search(PH, gamma, block, cap)


def _balanced_exhaustive(PH: PartiteHypergraph, gamma, block: int | None) -> OracleResult:
    g = GammaVector.coerce(gamma)
    n_total = PH.r * PH.n
    if n_total > EXHAUSTIVE_CAP:
        raise CapExceeded(f"exhaustive enumeration limited to r*n <= {EXHAUSTIVE_CAP}")
    allm, ok = _independent_masks(n_total, _edge_masks(PH.flat))
    total = np.bitwise_count(allm).astype(np.int64)
    for i, gi in enumerate(g.entries):
        pm = np.uint64(((1 << PH.n) - 1) << (i * PH.n))
        cnt = np.bitwise_count(allm & pm).astype(np.int64)
        ok &= np.abs(cnt - gi * total) < 1e-9
    if block:
        for i in range(PH.r):
            for j in range(PH.n // block):
                bm = np.uint64(((1 << block) - 1) << (i * PH.n + j * block))
                ok &= np.bitwise_count(allm & bm) <= 1
    size, m = _best_mask(allm, ok)
    return OracleResult(max(size, 0), frozenset(PH.pair(u) for u in _bits(m)) if size > 0 else frozenset(), int(allm.size))


def max_gamma_balanced_exhaustive(PH: PartiteHypergraph, gamma) -> OracleResult:
    return _balanced_exhaustive(PH, gamma, None)


def max_P_independent_exhaustive(PH: PartiteHypergraph, gamma, block: int) -> OracleResult:
    if block < 1 or PH.n % block:
        raise HypergraphError(f"block size {block} must divide n = {PH.n}")
    return _balanced_exhaustive(PH, gamma, block)


__all__ = [
    "CapExceeded",
    "OracleResult",
    "max_independent_set",
    "max_independent_set_exhaustive",
    "max_gamma_balanced",
    "max_gamma_balanced_exhaustive",
    "max_P_independent",
    "max_P_independent_exhaustive",
]
