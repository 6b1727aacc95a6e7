import itertools
import math

import numpy as np
import pytest

from hyperindep.core import GammaVector
from hyperindep.theory import DomainError, balanced_params, ogp_scale_uniform, target_sizes, threshold_table, uniform_thresholds


@pytest.mark.parametrize("d", [2.5, 10.0, 123.0])
def test_graph_case_values(d):
    # graph case: maximum density 2 log d / d, low-degree density log d / d, gap 1/2
    t = uniform_thresholds(2, d)
    assert t.stat == pytest.approx(2 * math.log(d) / d, rel=1e-12)
    assert t.lowdeg == pytest.approx(math.log(d) / d, rel=1e-12)
    assert abs(t.gap_factor - 0.5) <= 1e-12


def test_r3_at_e():
    t = uniform_thresholds(3, math.e)
    assert t.stat == pytest.approx(math.sqrt(1.5 / math.e), rel=1e-12)
    assert t.lowdeg == pytest.approx(math.sqrt(0.5 / math.e), rel=1e-12)
    assert abs(t.gap_factor - 3 ** -0.5) <= 1e-12


@pytest.mark.parametrize("r", [2, 3, 4, 7])
def test_gap_factor_and_order(r):
    for d in (1.5, 5.0, 50.0, 1e4):
        t = uniform_thresholds(r, d)
        assert t.lowdeg < t.stat
        assert abs(t.gap_factor - r ** (-1 / (r - 1))) <= 1e-12


def test_domain_errors():
    for d in (1.0, 0.5, -2.0):
        with pytest.raises(DomainError):
            uniform_thresholds(3, d)
    with pytest.raises(DomainError):
        uniform_thresholds(1, 10.0)
    with pytest.raises(DomainError):
        balanced_params(GammaVector.uniform(2), 2, 1.0)
    with pytest.raises(DomainError):
        target_sizes(GammaVector.uniform(2), 2, 10, 5.0, 1.0)


def test_monotone_in_d():
    for r in (2, 3, 5):
        ds = np.linspace(math.e**2, 500, 60)
        stat = [uniform_thresholds(r, d).stat for d in ds]
        low = [uniform_thresholds(r, d).lowdeg for d in ds]
        assert all(a > b for a, b in zip(stat, stat[1:]))
        assert all(a > b for a, b in zip(low, low[1:]))
        g = GammaVector((0.5, 0.5)) if r == 2 else GammaVector.uniform(r)
        bal = [balanced_params(g, r, d).lowdeg_density for d in ds]
        assert all(a > b for a, b in zip(bal, bal[1:]))


def test_balanced_graph_case():
    bp = balanced_params(GammaVector((0.5, 0.5)), 2, 20.0)
    assert bp.c_gamma == pytest.approx(2.0, rel=1e-12)
    assert bp.stat_density == pytest.approx(2 * math.log(20) / 20, rel=1e-12)
    assert bp.lowdeg_density == pytest.approx(math.log(20) / 20, rel=1e-12)
    assert bp.f == pytest.approx(bp.stat_density, rel=1e-12)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_uniform_gamma_matches_uniform_thresholds(r):
    for d in (3.0, 30.0):
        bp = balanced_params(GammaVector.uniform(r), r, d)
        assert abs(bp.stat_density - uniform_thresholds(r, d).stat) <= 1e-12


def test_balanced_gap_is_gamma_star_power():
    g = GammaVector((0.5, 0.3, 0.2))
    bp = balanced_params(g, 3, 40.0)
    assert bp.gap_factor == pytest.approx(0.5 ** 0.5, rel=1e-12)
    assert bp.istar == 0


def test_symmetry_under_permutation():
    base = (0.5, 0.3, 0.2)
    ref = balanced_params(GammaVector(base), 3, 25.0)
    for perm in itertools.permutations(range(3)):
        g = GammaVector(tuple(base[i] for i in perm))
        bp = balanced_params(g, 3, 25.0)
        assert tuple(bp) == pytest.approx(tuple(ref))
        assert perm[bp.istar] == ref.istar


def test_ties_pick_smallest_index():
    assert balanced_params(GammaVector((0.4, 0.4, 0.2)), 3, 9.0).istar == 0
    assert GammaVector.uniform(4).istar == 0


def test_target_sizes_consistency():
    g = GammaVector.uniform(2)
    n, d, eps = 500, 40.0, 0.25
    ts = target_sizes(g, 2, n, d, eps)
    ld = balanced_params(g, 2, d).lowdeg_density
    for j in range(2):
        assert ts.exact[j] == pytest.approx(g.entries[j] * 2 * n * (1 - eps) * ld, rel=1e-12)
        assert ts.counts[j] <= ts.exact[j] + 1e-9
    assert ts.counts[0] == ts.counts[1]
    tiny = target_sizes(g, 2, n, d, 1 - 1e-9)
    assert tiny.counts == (0, 0) and max(tiny.exact) < 1e-6


def test_target_sizes_ratio():
    g = GammaVector((0.5, 0.3, 0.2))
    r, n, d, eps = 3, 1000, 100.0, 0.1
    lo = target_sizes(g, r, n, d, eps, "achievability")
    hi = target_sizes(g, r, n, d, eps, "impossibility")
    for a, b in zip(lo.exact, hi.exact):
        assert b / a == pytest.approx((1 + eps) / (1 - eps), rel=1e-12)
    assert all(a <= b for a, b in zip(lo.counts, hi.counts))
    # integer counts keep the gamma proportions exactly
    tl = sum(lo.counts)
    assert all(abs(c - gj * tl) < 1e-9 for c, gj in zip(lo.counts, g.entries))
    with pytest.raises(DomainError):
        target_sizes(g, r, n, d, eps, "sideways")


def test_threshold_table_and_overlap_scale():
    rows = threshold_table([2, 3], [10.0, 20.0])
    assert len(rows) == 4 and rows[0]["r"] == 2 and rows[0]["gap_factor"] == pytest.approx(0.5)
    assert ogp_scale_uniform(3, 100, 8.0) == pytest.approx(100 * math.sqrt(math.log(8) / 8))
