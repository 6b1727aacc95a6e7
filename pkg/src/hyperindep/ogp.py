"""Interpolation-path experiments for the overlap gap side: c-bad steps,
stability estimates, overlap sequences S_1..S_K and fixed-set overlaps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import GammaVector, Hypergraph, PartiteHypergraph, is_independent
from .local import VertexLabels, random_greedy
from .lowdeg import Degree1BalancedPolynomial, VertexPolynomialSet
from .models import InterpolationPath, PartiteSpace, UniformSpace, partite_p, uniform_p
from .seeding import Seed, as_seed
from .theory import balanced_params, ogp_scale_uniform, target_sizes


# -- c-bad steps -------------------------------------------------------------------------------

@dataclass(frozen=True)
class BadStep:
    t: int
    squared_change: float


def is_bad(squared_change: float, c: float, norm_ref: float) -> bool:
    """``||f(A') - f(A)||^2 >= c E||f||^2``; with a zero reference only actual changes count."""
    if norm_ref <= 0:
        return squared_change > 0
    return squared_change >= c * norm_ref


def _apply_step(f: VertexPolynomialSet, coord: int, value: int, present: set, vals: np.ndarray) -> float:
    if value:
        present.add(coord)
    else:
        present.discard(coord)
    sq = 0.0
    if isinstance(f, Degree1BalancedPolynomial):
        for v, diff in f.coordinate_delta(coord, value):
            vals[v] += diff
            sq += diff * diff
        return sq
    for v, new in f.step_change(coord, value, present):
        diff = new - vals[v]
        vals[v] = new
        sq += diff * diff
    return sq


def path_squared_changes(f: VertexPolynomialSet, path: InterpolationPath, full: bool = False):
    """Yield ``(t, ||f(A^t) - f(A^{t-1})||^2)`` for every state-changing step.

    ``full=True`` recomputes f from scratch at each step (for cross-checks).
    """
    present = set(path.base.tolist())
    vals = np.asarray(f.evaluate(path.base), dtype=float).copy()
    for t, coord, value in path.deltas():
        if full:
            if value:
                present.add(coord)
            else:
                present.discard(coord)
            new = np.asarray(f.evaluate(sorted(present)), dtype=float)
            yield t, float(((new - vals) ** 2).sum())
            vals = new
        else:
            yield t, _apply_step(f, coord, value, present, vals)


def detect_c_bad(f: VertexPolynomialSet, path: InterpolationPath, c: float, norm_ref: float) -> list[BadStep]:
    """Steps of ``path`` that are c-bad for ``f``.

    Steps that redraw a coordinate to its current value are not hypercube
    edges and are never flagged.
    """
    return [BadStep(t, sq) for t, sq in path_squared_changes(f, path) if is_bad(sq, c, norm_ref)]


def estimate_norm(f: VertexPolynomialSet, space, p: float, trials: int, seed=None) -> float:
    """Monte Carlo E||f(A)||^2 (exact for the degree-1 polynomial)."""
    if isinstance(f, Degree1BalancedPolynomial):
        return f.expected_squared_norm(p)
    seed = as_seed(seed)
    from .models import skip_sample_ranks

    tot = 0.0
    for i in range(trials):
        ranks = skip_sample_ranks(space.m, p, seed.trial(i).generator())
        v = np.asarray(f.evaluate(ranks), dtype=float)
        tot += float(v @ v)
    return tot / trials


@dataclass(frozen=True)
class StabilityReport:
    estimate: float
    se: float
    bound: float
    threshold: float
    trials: int

    @property
    def passed(self) -> bool:
        return self.estimate + 4 * self.se >= self.bound


def estimate_stability(
    f: VertexPolynomialSet,
    space,
    p: float,
    D: int,
    Gamma: int,
    c: float,
    trials: int,
    seed: Seed | int | None = None,
    norm_ref: float | None = None,
) -> StabilityReport:
    """P[no step of a Gamma-sweep path is c-bad] against the bound p^{4 Gamma D / c}."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seed = as_seed(seed)
    if norm_ref is None:
        norm_ref = estimate_norm(f, space, p, 200, seed.child("norm"))
    good = 0
    for i in range(trials):
        path = InterpolationPath.from_sweeps(space, p, Gamma, seed.trial(i))
        good += not any(is_bad(sq, c, norm_ref) for _, sq in path_squared_changes(f, path))
    est = good / trials
    bound = p ** (4 * Gamma * D / c) if c > 0 else 0.0
    # Agresti-Coull: unlike the plain binomial SE it does not vanish at 0 or all hits
    tilde = (good + 2) / (trials + 4)
    se = math.sqrt(tilde * (1 - tilde) / (trials + 4))
    return StabilityReport(est, se, bound, c * norm_ref, trials)


def degree1_stable_probability(f: Degree1BalancedPolynomial, p: float, Gamma: int) -> float:
    """Exact P[no critical coordinate changes along a Gamma-sweep path].

    A coordinate never changes iff its Gamma + 1 independent draws agree.
    """
    stay = p ** (Gamma + 1) + (1 - p) ** (Gamma + 1)
    return stay ** f.critical_coordinates


# -- overlap sequences ---------------------------------------------------------------------------

@dataclass
class PathExperiment:
    """One interpolation-path probe.

    ``algorithm`` is ``"degree1"`` (partite only), ``"greedy"`` or a callable
    ``(instance, seed) -> vertex set``.  ``Gamma`` defaults to ``K - 1``.
    ``stride`` counts state-changing steps between recomputations; ``None``
    means every change for ``n <= 500`` and about 100 recomputations per
    sweep above that.
    """

    model: str
    n: int
    r: int
    d: float
    algorithm: object = "greedy"
    gamma: Sequence[float] | None = None
    Gamma: int | None = None
    c: float = 1.0
    eta: float = 0.0
    epsilon: float = 0.2
    K: int = 3
    seed: object = None
    stride: int | None = None
    k: Sequence[int] | None = None

    def __post_init__(self):
        if self.model not in ("uniform", "partite"):
            raise ValueError("model must be 'uniform' or 'partite'")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.Gamma is None:
            self.Gamma = max(self.K - 1, 1)
        if self.model == "partite" and self.gamma is None:
            self.gamma = (1 / self.r,) * self.r
        if self.algorithm == "degree1" and self.model != "partite":
            raise ValueError("the degree-1 algorithm needs the partite model")

    @property
    def space(self):
        return PartiteSpace(self.r, self.n) if self.model == "partite" else UniformSpace(self.n, self.r)

    @property
    def p(self) -> float:
        return partite_p(self.n, self.r, self.d) if self.model == "partite" else uniform_p(self.n, self.r, self.d)

    @property
    def T(self) -> int:
        return self.Gamma * self.space.m

    def windows(self) -> dict:
        if self.model == "uniform":
            phi = ogp_scale_uniform(self.r, self.n, self.d)
            return {
                "scale": phi,
                "lower": self.epsilon / 4 * phi,
                "upper": self.epsilon / 2 * phi,
                "size": [(1 + self.epsilon) * phi],
            }
        g = GammaVector.coerce(self.gamma)
        psi = balanced_params(g, self.r, self.d).lowdeg_density
        eps_t = self.epsilon * min(g.entries)
        return {
            "scale": psi,
            "lower": eps_t * self.n * psi / 4,
            "upper": eps_t * self.n * psi / 2,
            "size": [(1 + self.epsilon) * gi * self.r * self.n * psi for gi in g.entries],
        }


@dataclass
class OverlapRecord:
    rows: list[tuple] = field(default_factory=list)
    sets: list[frozenset] = field(default_factory=list)
    times: list[int] = field(default_factory=list)
    new_mass: list[int] = field(default_factory=list)
    upper_ok: list[bool] = field(default_factory=list)
    size_ok: list[bool] = field(default_factory=list)
    independent_ok: list[bool] = field(default_factory=list)
    windows: dict = field(default_factory=dict)
    failed: bool = False
    failed_at: int | None = None
    stride: int = 1
    T: int = 0
    norm_ref: float = 0.0

    COLUMNS = ("t", "step_hamming", "set_size", "new_mass", "k_index", "bad_step_flag")

    @property
    def max_step_hamming(self) -> int:
        return max((row[1] for row in self.rows), default=0)

    @property
    def forbidden_realized(self) -> bool:
        """All K sets found with their window, size and independence conditions."""
        return (
            not self.failed
            and all(self.upper_ok[1:])
            and all(self.size_ok)
            and all(self.independent_ok)
        )


class _Degree1Tracker:
    def __init__(self, exp: PathExperiment, path: InterpolationPath):
        g = GammaVector.coerce(exp.gamma)
        k = exp.k if exp.k is not None else target_sizes(g, exp.r, exp.n, exp.d, exp.epsilon, "achievability").counts
        self.poly = Degree1BalancedPolynomial(exp.r, exp.n, k, g.istar)
        self.vals = self.poly.evaluate(path.base)
        self.n = exp.n

    def current_set(self) -> frozenset:
        return frozenset(np.flatnonzero(self.vals >= 1).tolist())

    def step(self, coord: int, value: int) -> tuple[list[int], float]:
        changed = []
        sq = 0.0
        for v, diff in self.poly.coordinate_delta(coord, value):
            before = self.vals[v] >= 1
            self.vals[v] += diff
            sq += diff * diff
            if (self.vals[v] >= 1) != before:
                changed.append(v)
        return changed, sq


def _flat_instance(space, ranks) -> Hypergraph:
    inst = space.build(ranks)
    return inst.flat if isinstance(inst, PartiteHypergraph) else inst


def _default_stride(exp: PathExperiment, changes_per_sweep: float) -> int:
    if exp.n <= 500:
        return 1
    return max(1, int(changes_per_sweep // 100))


def build_overlap_sequence(exp: PathExperiment, trial: int = 0) -> OverlapRecord:
    """Run one path and build S_1 = V_0, S_k = first V_t with enough new mass."""
    seed = as_seed(exp.seed).trial(trial)
    space = exp.space
    p = exp.p
    path = InterpolationPath.from_sweeps(space, p, exp.Gamma, seed.child("path"))
    win = exp.windows()
    changes_per_sweep = 2 * p * (1 - p) * space.m
    stride = exp.stride if exp.stride is not None else _default_stride(exp, changes_per_sweep)
    rec = OverlapRecord(windows=win, stride=stride, T=path.T)
    n_total = exp.r * exp.n if exp.model == "partite" else exp.n

    if exp.algorithm == "degree1":
        tracker = _Degree1Tracker(exp, path)
        norm_ref = tracker.poly.expected_squared_norm(p)
        current = tracker.current_set()
    else:
        if exp.algorithm == "greedy":
            labels = VertexLabels.sample(n_total, seed.child("labels"))

            def alg(ranks):
                return random_greedy(_flat_instance(space, ranks), labels)
        else:
            fn = exp.algorithm

            def alg(ranks):
                out = fn(space.build(ranks), seed.child("algorithm"))
                inst = space.build(ranks)
                return frozenset(inst.flat_id(*u) for u in out) if isinstance(inst, PartiteHypergraph) else frozenset(out)

        present = set(path.base.tolist())
        current = alg(path.base)
        norm_ref = float(len(current))
    rec.norm_ref = norm_ref

    union: set[int] = set()
    lower = win["lower"]

    def accept(S: frozenset, t: int, ranks) -> None:
        mass = len(S - union)
        rec.sets.append(S)
        rec.times.append(t)
        rec.new_mass.append(mass)
        rec.upper_ok.append(len(rec.sets) == 1 or mass <= win["upper"])
        if exp.model == "partite":
            counts = [0] * exp.r
            for u in S:
                counts[u // exp.n] += 1
            rec.size_ok.append(all(cnt >= thr for cnt, thr in zip(counts, win["size"])))
        else:
            rec.size_ok.append(len(S) >= win["size"][0])
        rec.independent_ok.append(is_independent(_flat_instance(space, ranks), S))
        union.update(S)

    accept(current, 0, path.base)
    rec.rows.append((0, 0, len(current), 0, 1, 0))
    if exp.K == 1:
        return rec

    pending_bad = False
    since = 0
    previous = current
    if exp.algorithm == "degree1":
        present = None
    for t, coord, value in path.deltas():
        if exp.algorithm == "degree1":
            changed, sq = tracker.step(coord, value)
            pending_bad |= sq > 0 and (sq >= exp.c * norm_ref if norm_ref > 0 else True)
            for v in changed:
                current = current ^ {v}
        else:
            if value:
                present.add(coord)
            else:
                present.discard(coord)
        since += 1
        if since < stride:
            continue
        since = 0
        if exp.algorithm != "degree1":
            current = alg(np.fromiter(sorted(present), dtype=np.int64, count=len(present)))
            sq = float(len(current ^ previous))
            pending_bad |= sq > 0 and (sq >= exp.c * norm_ref if norm_ref > 0 else True)
        mass = len(current - union)
        k_index = ""
        if mass >= lower and len(rec.sets) < exp.K:
            ranks = path.state(t)
            accept(current, t, ranks)
            k_index = len(rec.sets)
        rec.rows.append((t, len(current ^ previous), len(current), mass, k_index, int(pending_bad)))
        pending_bad = False
        previous = current
        if len(rec.sets) >= exp.K:
            break
    if len(rec.sets) < exp.K:
        rec.failed = True
        rec.failed_at = len(rec.sets) + 1
    return rec


# -- fixed-set overlaps ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OverlapProfile:
    overlaps: tuple
    thresholds: tuple[float, ...]
    scale_ratio: tuple[float, ...]
    trials: int

    @property
    def max_overlap(self):
        if not self.overlaps:
            return ()
        return tuple(max(o[i] for o in self.overlaps) for i in range(len(self.overlaps[0])))

    @property
    def fraction_below(self) -> float:
        ok = sum(all(x < t for x, t in zip(o, self.thresholds)) for o in self.overlaps)
        return ok / max(1, len(self.overlaps))


def measure_fixed_set_overlap(
    alg: Callable[[object, Seed], frozenset],
    S,
    sampler: Callable[[Seed], object],
    trials: int,
    seed: Seed | int | None = None,
    *,
    r: int,
    n: int,
    d: float,
    epsilon: float,
    gamma=None,
) -> OverlapProfile:
    """|alg(A) ∩ S| on fresh instances A, against the epsilon-scaled thresholds.

    For the uniform model (``gamma=None``) the threshold is ``eps * Phi`` with
    ``Phi = (log d / d)^{1/(r-1)} n`` and ``scale_ratio = |S| / Phi``.  For the
    partite model vertices are ``(part, idx)`` pairs and part i uses
    ``eps * gamma_i * r * n * psi``.
    """
    seed = as_seed(seed)
    S = frozenset(S)
    if gamma is None:
        phi = ogp_scale_uniform(r, n, d)
        thresholds = (epsilon * phi,)
        ratio = (len(S) / phi,)

        def profile(out):
            return (len(out & S),)
    else:
        g = GammaVector.coerce(gamma)
        psi = balanced_params(g, r, d).lowdeg_density
        unit = [gi * r * n * psi for gi in g.entries]
        thresholds = tuple(epsilon * u for u in unit)
        ratio = tuple(sum(1 for (part, _) in S if part == i) / unit[i] for i in range(r))

        def profile(out):
            inter = out & S
            return tuple(sum(1 for (part, _) in inter if part == i) for i in range(r))

    overlaps = []
    for i in range(trials):
        s = seed.trial(i)
        overlaps.append(profile(frozenset(alg(sampler(s.child("instance")), s.child("algorithm")))))
    return OverlapProfile(tuple(overlaps), thresholds, ratio, trials)


__all__ = [
    "BadStep",
    "is_bad",
    "path_squared_changes",
    "detect_c_bad",
    "estimate_norm",
    "StabilityReport",
    "estimate_stability",
    "degree1_stable_probability",
    "PathExperiment",
    "OverlapRecord",
    "build_overlap_sequence",
    "OverlapProfile",
    "measure_fixed_set_overlap",
]
