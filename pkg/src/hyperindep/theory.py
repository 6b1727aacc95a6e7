"""Closed-form density thresholds and parameter formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

from .core import GammaVector


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdSet:
    stat: float
    lowdeg: float

    @property
    def gap_factor(self) -> float:
        return self.lowdeg / self.stat


def _check(r: int, d: float) -> None:
    if r < 2:
        raise DomainError("need r >= 2")
    if not d > 1:
        raise DomainError("need d > 1 (log d must be positive)")


def uniform_thresholds(r: int, d: float) -> ThresholdSet:
    """Maximum and low-degree-achievable independent set densities in H_r(n, d)."""
    _check(r, d)
    base = math.log(d) / d
    return ThresholdSet(
        stat=(r / (r - 1) * base) ** (1 / (r - 1)),
        lowdeg=(1 / (r - 1) * base) ** (1 / (r - 1)),
    )


@dataclass(frozen=True)
class BalancedParams:
    """Parameters of the gamma-balanced problem; densities are relative to r n."""

    c_gamma: float
    f: float
    stat_density: float
    lowdeg_density: float
    istar: int

    def __iter__(self):
        return iter((self.c_gamma, self.f, self.stat_density, self.lowdeg_density))

    @property
    def gap_factor(self) -> float:
        return self.lowdeg_density / self.stat_density


def balanced_params(gamma, r: int, d: float) -> BalancedParams:
    g = GammaVector.coerce(gamma)
    if len(g) != r:
        raise DomainError(f"gamma has {len(g)} entries, expected r = {r}")
    _check(r, d)
    prod = math.prod(g.entries)
    c_gamma = 1.0 / (r ** (r - 1) * (r - 1) * prod)
    inner = c_gamma * math.log(d) / d
    stat = inner ** (1 / (r - 1))
    lowdeg = (g.entries[g.istar] * inner) ** (1 / (r - 1))
    return BalancedParams(c_gamma, stat, stat, lowdeg, g.istar)


def ogp_scale_uniform(r: int, n: int, d: float) -> float:
    """The scale (log d / d)^{1/(r-1)} n of the uniform overlap windows."""
    _check(r, d)
    return (math.log(d) / d) ** (1 / (r - 1)) * n


def ogp_scale_balanced(gamma, r: int, d: float) -> float:
    """Per-vertex scale psi of the balanced windows (sizes are multiples of n psi)."""
    bp = balanced_params(gamma, r, d)
    return bp.lowdeg_density


def _denominator_lcm(g: GammaVector, limit: int = 10**6) -> int:
    dens = [Fraction(x).limit_denominator(limit).denominator for x in g.entries]
    return reduce(lambda a, b: a * b // math.gcd(a, b), dens, 1)


@dataclass(frozen=True)
class TargetSizes:
    exact: tuple[float, ...]
    counts: tuple[int, ...]
    side: str

    def __iter__(self):
        return iter(self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def __getitem__(self, i):
        return self.counts[i]


def target_sizes(gamma, r: int, n: int, d: float, epsilon: float, side: str = "achievability") -> TargetSizes:
    """Per-part targets k_j = gamma_j r n (1 -/+ eps) psi.

    ``counts`` are integer sizes ``gamma_j t`` for an admissible total ``t``
    (every ``gamma_j t`` integral): the largest one at or below the exact total
    on the achievability side, the smallest at or above it on the impossibility
    side.
    """
    if not 0 < epsilon < 1:
        raise DomainError("need 0 < epsilon < 1")
    if side not in ("achievability", "impossibility"):
        raise DomainError("side must be 'achievability' or 'impossibility'")
    g = GammaVector.coerce(gamma)
    psi = balanced_params(g, r, d).lowdeg_density
    factor = (1 - epsilon) if side == "achievability" else (1 + epsilon)
    exact = tuple(gj * r * n * factor * psi for gj in g.entries)
    total = r * n * factor * psi
    unit = _denominator_lcm(g)
    fracs = [Fraction(x).limit_denominator(10**6) for x in g.entries]
    tol = 1e-9 * max(1.0, total)
    if side == "achievability":
        t = math.floor((total + tol) / unit) * unit
    else:
        t = math.ceil((total - tol) / unit) * unit
    counts = tuple(int(f * t) for f in fracs)
    return TargetSizes(exact, counts, side)


def threshold_table(rs: Sequence[int], ds: Sequence[float]) -> list[dict]:
    rows = []
    for r in rs:
        for d in ds:
            t = uniform_thresholds(r, d)
            rows.append({"r": r, "d": d, "stat": t.stat, "lowdeg": t.lowdeg, "gap_factor": t.gap_factor})
    return rows


__all__ = [
    "DomainError",
    "ThresholdSet",
    "uniform_thresholds",
    "BalancedParams",
    "balanced_params",
    "TargetSizes",
    "target_sizes",
    "ogp_scale_uniform",
    "ogp_scale_balanced",
    "threshold_table",
]
