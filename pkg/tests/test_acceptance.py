"""Acceptance criteria.  Each test prints one PASS/FAIL line; run directly with
``python tests/test_acceptance.py`` or through pytest."""

import math
import sys
import time

import numpy as np
import pytest
from scipy.stats import chi2_contingency

from hyperindep.core import GammaVector, is_gamma_balanced, is_independent
from hyperindep.local import VertexLabels, adapt_greedy_to_gw, certified_greedy, local_root_value, random_greedy
from hyperindep.lowdeg import Degree1BalancedPolynomial, balanced_selection, compile_local_to_polynomial, degree1_balanced, round_values
from hyperindep.models import (
    InterpolationPath,
    PartiteSpace,
    UniformSpace,
    greedy_delta,
    partite_p,
    sample_gw_hypertree,
    sample_partite_hypergraph,
    sample_uniform_hypergraph,
    uniform_p,
)
from hyperindep.ogp import degree1_stable_probability, estimate_stability
from hyperindep.oracle import (
    max_gamma_balanced,
    max_gamma_balanced_exhaustive,
    max_independent_set,
    max_independent_set_exhaustive,
)
from hyperindep.seeding import Seed
from hyperindep.theory import balanced_params, target_sizes, uniform_thresholds

MASTER = Seed(20240601).child("acceptance")


@pytest.fixture
def report(request):
    """Write one PASS/FAIL line past output capture, then assert."""
    tr = request.config.pluginmanager.get_plugin("terminalreporter")

    def emit(number, name, ok, detail, started):
        line = f"{'PASS' if ok else 'FAIL'} [{number}] {name}: {detail} ({time.perf_counter() - started:.1f}s)"
        if tr is not None:
            tr.ensure_newline()
            tr.write_line(line)
        else:
            print(line)
        assert ok, line

    return emit


def test_01_independence_soundness(report):
    t0 = time.perf_counter()
    seed = MASTER.child(1)
    violations = 0
    runs = 0
    for i in range(1000):
        r = (2, 3, 4)[i % 3]
        alg = (i // 3) % 4
        s = seed.trial(i)
        if alg == 0:
            H = sample_uniform_hypergraph(60, r, uniform_p(60, r, 3), s.child("instance"))
            S = random_greedy(H, VertexLabels.sample(H.n, s.child("labels")))
            ok = is_independent(H, S)
        elif alg == 1:
            T = sample_gw_hypertree(3, r, 3, s.child("instance"))
            S = adapt_greedy_to_gw(T, greedy_delta(3), s.child("labels"))
            ok = is_independent(T.hypergraph, S)
        elif alg == 2:
            H = sample_uniform_hypergraph(40, r, uniform_p(40, r, 1.5), s.child("instance"))
            P = compile_local_to_polynomial(certified_greedy(1), H, VertexLabels.sample(H.n, s.child("labels")), method="mobius")
            S = round_values(P.values(), H, 0.2).selected
            ok = is_independent(H, S)
        else:
            gamma = GammaVector.uniform(r)
            k = target_sizes(gamma, r, 20, 3.0, 0.3).counts
            PH = sample_partite_hypergraph(r, 20, partite_p(20, r, 3.0), s.child("instance"))
            _, out = degree1_balanced(PH, k)
            ok = is_independent(PH, out.selected)
            B = balanced_selection(out.selected, k)
            if B is not None:
                ok = ok and is_independent(PH, B) and is_gamma_balanced(PH, B, gamma)
        violations += not ok
        runs += 1
    elapsed = time.perf_counter() - t0
    report(1, "independence soundness", violations == 0 and elapsed < 120, f"{runs} runs, {violations} violations", t0)


def test_02_oracle_equivalence(report):
    t0 = time.perf_counter()
    seed = MASTER.child(2)
    matches = total = 0
    for i in range(100):
        H = sample_uniform_hypergraph(15, 3, 0.2, seed.child("uniform").trial(i))
        matches += max_independent_set(H).optimum == max_independent_set_exhaustive(H).optimum
        total += 1
    gamma = GammaVector.uniform(2)
    for i in range(50):
        PH = sample_partite_hypergraph(2, 8, 0.25, seed.child("partite").trial(i))
        same = max_gamma_balanced(PH, gamma).optimum == max_gamma_balanced_exhaustive(PH, gamma).optimum
        same = same and max_independent_set(PH.flat).optimum == max_independent_set_exhaustive(PH.flat).optimum
        matches += same
        total += 1
    elapsed = time.perf_counter() - t0
    report(2, "oracle equivalence", matches == total and elapsed < 120, f"{matches}/{total} exact matches", t0)


def test_03_compiler_identity(report):
    t0 = time.perf_counter()
    seed = MASTER.child(3)
    worst = 0.0
    checked = 0
    for r in (2, 3):
        for s in (1, 2):
            g = certified_greedy(s)
            got = 0
            i = 0
            while got < 500:
                cell = seed.child(r, s).trial(i)
                i += 1
                T = sample_gw_hypertree(1.0, r, s, cell.child("tree"))
                if len(T.edges) > 12:
                    continue
                x = VertexLabels.sample(T.num_vertices, cell.child("labels"))
                P = compile_local_to_polynomial(g, T.hypergraph, x, q=12)
                worst = max(worst, abs(P.evaluate(0) - local_root_value(T, g, x)))
                got += 1
            checked += got
    elapsed = time.perf_counter() - t0
    report(3, "compiler identity", worst <= 1e-9 and elapsed < 60, f"{checked} neighbourhoods, max |diff| = {worst:g}", t0)


def test_04_degree1_analytic_mean(report):
    t0 = time.perf_counter()
    r, n, d = 3, 200, 8.0
    k = target_sizes(GammaVector.uniform(r), r, n, d, 0.2).counts
    p = partite_p(n, r, d)
    sizes = []
    for i in range(200):
        PH = sample_partite_hypergraph(r, n, p, MASTER.child(4).trial(i))
        _, out = degree1_balanced(PH, k, istar=2)
        sizes.append(sum(1 for part, _ in out.selected if part == 2))
    want = n * (1 - d / n**2) ** (k[0] * k[1])
    mean = float(np.mean(sizes))
    se = float(np.std(sizes, ddof=1) / math.sqrt(len(sizes)))
    ok = abs(mean - want) <= 4 * se and time.perf_counter() - t0 < 60
    report(4, "degree-1 analytic mean", ok, f"k={k}, mean {mean:.3f} vs {want:.3f} (SE {se:.3f})", t0)


def test_05_threshold_cross_checks(report):
    t0 = time.perf_counter()
    worst = 0.0
    for d in (2.0, 10.0, 50.0, 100.0, 1e3, 1e5):
        t = uniform_thresholds(2, d)
        worst = max(worst, abs(t.stat - 2 * math.log(d) / d), abs(t.lowdeg - math.log(d) / d))
        worst = max(worst, abs(balanced_params((0.5, 0.5), 2, d).gap_factor - 0.5), abs(t.gap_factor - 0.5))
    report(5, "threshold cross-checks", worst <= 1e-12, f"max deviation {worst:.1e}", t0)


def test_06_greedy_density_band(report):
    t0 = time.perf_counter()
    r, d, n = 3, 50.0, 20000
    t = uniform_thresholds(r, d)
    p = uniform_p(n, r, d)
    dens = []
    for i in range(10):
        s = MASTER.child(6).trial(i)
        H = sample_uniform_hypergraph(n, r, p, s.child("instance"))
        dens.append(len(random_greedy(H, VertexLabels.sample(n, s.child("labels")))) / n)
    lo, hi = 0.6 * t.lowdeg, 1.1 * t.stat
    ok = all(lo <= x <= hi and x > 0 for x in dens) and time.perf_counter() - t0 < 180
    report(6, "greedy density band", ok, f"densities {min(dens):.4f}..{max(dens):.4f} in [{lo:.4f}, {hi:.4f}]", t0)


def test_07_degree1_single_coordinate_stability(report):
    t0 = time.perf_counter()
    r, n, d = 3, 100, 8.0
    space = PartiteSpace(r, n)
    p = partite_p(n, r, d)
    k = target_sizes(GammaVector.uniform(r), r, n, d, 0.2).counts
    poly = Degree1BalancedPolynomial(r, n, k, 2)
    path = InterpolationPath.from_sweeps(space, p, 1, MASTER.child(7))
    present = set(path.base.tolist())

    def output():
        ranks = sorted(present)
        out = round_values(poly.evaluate(ranks), space.build(ranks), 0.0)
        assert out.accepted
        return out.selected

    prev = output()
    worst = steps = 0
    for _, coord, value in path.deltas():
        if value:
            present.add(coord)
        else:
            present.discard(coord)
        cur = output()
        worst = max(worst, len(prev ^ cur))
        prev = cur
        steps += 1
    ok = worst <= 1 and time.perf_counter() - t0 < 60
    report(7, "degree-1 single-coordinate stability", ok, f"{steps} changing steps of {path.T}, max |V_t ^ V_t-1| = {worst}", t0)


def test_08_interpolation_marginals(report):
    t0 = time.perf_counter()
    n, r, p = 30, 3, 0.1
    space = UniformSpace(n, r)
    m = space.m
    groups = 10
    group_of = np.arange(m) * groups // m
    hits = np.zeros(groups)
    table = np.zeros((2, 2))
    paths = 2000
    for i in range(paths):
        path = InterpolationPath.from_sweeps(space, p, 1, MASTER.child(8).trial(i))
        a0 = np.zeros(m, dtype=bool)
        a0[path.state(0)] = True
        am = np.zeros(m, dtype=bool)
        am[path.state(m)] = True
        hits += np.bincount(group_of[am], minlength=groups)
        table += [[np.sum(~a0 & ~am), np.sum(~a0 & am)], [np.sum(a0 & ~am), np.sum(a0 & am)]]
    size = np.bincount(group_of, minlength=groups) * paths
    freq = hits / size
    z = np.abs(freq - p) / np.sqrt(p * (1 - p) / size)
    pval = chi2_contingency(table, correction=False)[1]
    ok = z.max() <= 5 and pval > 0.001 and time.perf_counter() - t0 < 120
    report(8, "interpolation-path marginals", ok, f"max |z| = {z.max():.2f} over {groups} groups, chi-square p = {pval:.3f}", t0)


def test_09_gw_moments(report):
    t0 = time.perf_counter()
    d, r, trials = 10.0, 3, 10000
    deg = np.empty(trials)
    kids = np.empty(trials)
    for i in range(trials):
        T = sample_gw_hypertree(d, r, 1, MASTER.child(9).trial(i))
        deg[i] = len(T.edges)
        kids[i] = sum(1 for lv in T.level if lv == 1)
    z1 = abs(deg.mean() - d) / (deg.std(ddof=1) / math.sqrt(trials))
    z2 = abs(kids.mean() - (r - 1) * d) / (kids.std(ddof=1) / math.sqrt(trials))
    ok = z1 <= 4 and z2 <= 4 and time.perf_counter() - t0 < 30
    report(9, "GW tree moments", ok, f"root degree {deg.mean():.3f} (z={z1:.2f}), level-1 count {kids.mean():.3f} (z={z2:.2f})", t0)


def test_10_stability_lower_bound(report):
    t0 = time.perf_counter()
    r, n, d, Gamma = 2, 30, 4.0, 1
    space = PartiteSpace(r, n)
    p = partite_p(n, r, d)
    k = target_sizes(GammaVector.uniform(r), r, n, d, 0.2).counts
    f = Degree1BalancedPolynomial(r, n, k, 1)
    norm = f.expected_squared_norm(p)
    c = 0.5 / norm  # bad threshold c * E||f||^2 = 0.5
    rep = estimate_stability(f, space, p, 1, Gamma, c, 500, MASTER.child(10), norm_ref=norm)
    exact = degree1_stable_probability(f, p, Gamma)
    ok = 0 < rep.threshold < 1 and rep.passed and time.perf_counter() - t0 < 120
    detail = f"estimate {rep.estimate:.4f} + 4 SE ({rep.se:.4f}) vs bound {rep.bound:.3g}; exact {exact:.3g}"
    report(10, "stability lower bound", ok, detail, t0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
