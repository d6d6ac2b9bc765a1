"""Acceptance suite: one test per exit criterion, each printed as a
pass/fail line (run with ``pytest tests/test_acceptance.py -v -s``).

All randomized criteria run at the package's fixed default seed (1729);
tolerances are stated inline next to each assertion. The expensive runs
(200 replicas to n = 1e6, the 1e7 trajectory, the coupled strip table) are
shared across criteria through module-scoped fixtures.
"""
import math

import numpy as np
import pytest

from _stats import poisson_gof_pvalue
from heapstream import estimator, hammersley, heap_sorter, oracle, poisson_field
from heapstream.offspring import dirac

SEED = 1729
D1 = dirac(1)
D2 = dirac(2)
FIG1 = [(.1, 1), (.7, 2), (.2, 2), (.4, 3), (.8, 1), (.3, 1)]


def _criterion(num: int, description: str, ok: bool, detail: str = "") -> None:
    line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} {description}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


# -- shared heavy runs ---------------------------------------------------------

@pytest.fixture(scope="module")
def delta2_discrete():
    # 200 replicas to n = 1e6, R recorded at 1e4 / 1e5 / 1e6
    return estimator.estimate_c_discrete(D2, 10 ** 6, replicas=200, seed=SEED)


@pytest.fixture(scope="module")
def delta2_strips():
    widths = [math.e ** k for k in range(1, 6)]
    return estimator.estimate_r_inf(D2, widths, replicas=200, seed=SEED, coupled=True)


@pytest.fixture(scope="module")
def delta2_long_trajectory():
    return estimator.trajectory(D2, 10 ** 7, checkpoints_per_decade=4, seed=SEED)


# -- criteria --------------------------------------------------------------------

def test_criterion_01_worked_example():
    sorter = heap_sorter.HeapSorter()
    for u, nu in FIG1:
        sorter.insert(u, nu)
    r6 = sorter.r_values[-1]
    alive = sorter.alive.as_dict()
    ok = r6 == 2 and alive == {0.3: 1, 0.4: 3, 0.7: 1, 0.8: 1}
    _criterion(1, "worked example: R(6) = 2 and exact final alive set", ok,
               f"R(6)={r6}, alive={alive}")


def test_criterion_02_greedy_optimality():
    rng = np.random.default_rng(SEED)
    failures = 0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        pairs = list(zip(rng.random(n).tolist(), rng.integers(1, 4, size=n).tolist()))
        _, trace = heap_sorter.run(pairs)
        for m in range(1, n + 1):
            if trace.tree_count(m) != oracle.min_heap_partition(pairs[:m]):
                failures += 1
    _criterion(2, "greedy equals exhaustive optimum on 1000 instances, all prefixes",
               failures == 0, f"{failures} prefix mismatches")


def test_criterion_03_ulam_reduction():
    mismatches = 0
    for k in range(100):
        trace = heap_sorter.run_random(D1, 10 ** 4, seed=SEED + k, keep_sequence=True)
        if trace.tree_count(10 ** 4) != oracle.lds_length(trace.labels):
            mismatches += 1
    normalized = [
        heap_sorter.run_random(D1, 10 ** 6, seed=SEED + 1000 + r).tree_count(10 ** 6) / 1000.0
        for r in range(50)
    ]
    mean_norm = float(np.mean(normalized))
    ok = mismatches == 0 and 1.6 <= mean_norm <= 2.4
    _criterion(3, "capacity-1 equals decreasing-subsequence length; R/sqrt(n) in [1.6, 2.4]",
               ok, f"{mismatches} mismatches, mean R/sqrt(n) = {mean_norm:.3f}")


def test_criterion_04_time_change_equivalence():
    bad = 0
    for k in range(100):
        field = poisson_field.sample_field(0, 1, 50, D2, seed=SEED + k)
        if len(field) == 0:
            continue
        rep = hammersley.simulate(field)
        _, trace = heap_sorter.run(zip(field.u, field.nu))
        for n in range(1, len(field) + 1):
            if rep.count_roots(0.0, float(field.t[n - 1])) != trace.tree_count(n):
                bad += 1
                break
    _criterion(4, "window count equals tree count at every atom time, 100 fields",
               bad == 0, f"{bad} fields disagreed")


def test_criterion_05_exact_scaling_coupling():
    worst = 0.0
    structure_ok = True
    for c in (math.e, 1 / math.e, 3.7):
        for k in range(100):
            field = poisson_field.sample_field(0, 1, 30, D2, seed=SEED + k)
            rep = hammersley.simulate(field)
            rep_c = hammersley.simulate(poisson_field.scale(field, c))
            if not (np.array_equal(rep.father, rep_c.father)
                    and np.array_equal(rep.death, rep_c.death)):
                structure_ok = False
            err = max(
                _rel(rep.atom_u * c, rep_c.atom_u),
                _rel(rep.atom_t / c, rep_c.atom_t),
            )
            worst = max(worst, err)
    ok = structure_ok and worst <= 1e-12
    _criterion(5, "rescaled simulation matches line-for-line at rtol 1e-12, 3 factors x 100 trials",
               ok, f"max rel err {worst:.3g}")


def _rel(expected, got):
    if expected.size == 0:
        return 0.0
    return float(np.max(np.abs(got - expected) / np.maximum(np.abs(expected), 1e-300)))


def test_criterion_06_monotone_couplings():
    subset_bad = 0
    deletion_bad = 0
    for k in range(100):
        wide = poisson_field.sample_field(0, 4, 10, D2, seed=SEED + k)
        narrow = poisson_field.restrict(wide, 0.0, 1.0, 0.0, wide.horizon)
        rep_w = hammersley.simulate(wide)
        heights_n = set(hammersley.simulate(narrow).rootless_heights().tolist())
        crossings_w = {
            float(t) for t, x0, x1 in zip(rep_w.atom_t, rep_w.h_x_left(), rep_w.atom_u)
            if x0 <= 0.0 < x1
        }
        if not heights_n <= crossings_w:
            subset_bad += 1

        full = poisson_field.sample_field(0, 2, 8, D2, seed=SEED + 200 + k)
        cut = poisson_field.restrict(full, 0.0, 2.0, 1.0, full.horizon)
        before = hammersley.simulate(full).count_crossings(0.0, 1.0, full.horizon)
        after = hammersley.simulate(cut).count_crossings(0.0, 1.0, full.horizon)
        if after < before:
            deletion_bad += 1
    ok = subset_bad == 0 and deletion_bad == 0
    _criterion(6, "right-extension keeps rootless heights; low-atom deletion never lowers crossings",
               ok, f"{subset_bad} subset violations, {deletion_bad} deletion violations")


def test_criterion_07_strip_monotone_convergence(delta2_strips):
    counts = delta2_strips.counts
    pathwise = bool(np.all(np.diff(counts, axis=1) >= 0))
    means = [e.point for e in delta2_strips.estimates]
    increments = np.diff(means)
    shrinking = bool(increments[-1] < increments[-2])
    ok = pathwise and shrinking
    _criterion(7, "coupled strip counts nondecreasing pathwise; last mean increments shrink",
               ok, f"pathwise={pathwise}, increments={np.round(increments, 4).tolist()}")


def test_criterion_08_log_growth_constant_above_one(delta2_discrete):
    slope = delta2_discrete.slope
    lo_slope, hi_slope = delta2_discrete.decade_slopes
    ci_above_one = slope.ci_low > 1.0
    agreement = abs(hi_slope - lo_slope) / hi_slope
    ok = ci_above_one and agreement < 0.15
    _criterion(8, "slope of mean R vs log n: 95% CI above 1; decade slopes agree within 15%",
               ok, f"slope={slope.point:.4f} CI=[{slope.ci_low:.4f}, {slope.ci_high:.4f}], "
                   f"decades=({lo_slope:.4f}, {hi_slope:.4f}), diff={agreement:.1%}")


def test_criterion_09_trajectory_ratio_stabilizes(delta2_long_trajectory):
    spread = delta2_long_trajectory.last_decade_spread()
    ok = spread < 0.15
    _criterion(9, "single 1e7 trajectory: R/log n relative spread < 15% over final decade",
               ok, f"spread={spread:.1%}, final ratio={delta2_long_trajectory.final_ratio():.4f}")


def test_criterion_10_stationary_window_counts():
    report = estimator.stationarity_report(D2, math.e ** 6, 1, 4,
                                           replicas=500, seed=SEED)
    ok = report.z_max < 3.0
    means = [round(r["mean"], 3) for r in report.rows]
    _criterion(10, "window counts at width e^6: all pairwise |z| < 3 over 500 replicas",
               ok, f"z_max={report.z_max:.2f}, means={means}")


def test_criterion_11_poisson_field_statistics():
    counts = np.array([len(poisson_field.sample_field(0, 1, 1, D2, seed=SEED + s))
                       for s in range(10 ** 4)])
    p = poisson_gof_pvalue(counts, mean=1.0)
    ok = p > 0.001
    _criterion(11, "atom counts pass chi-squared GOF against Poisson(area) at 0.001",
               ok, f"p-value={p:.4f}")


def test_criterion_12_cross_estimator_consistency(delta2_discrete, delta2_strips):
    ratio = delta2_discrete.ratio.point
    slope = delta2_discrete.slope.point
    strip = delta2_strips.estimates[-1].point     # W = e^5
    agreement = abs(ratio - slope) / slope
    below_both = strip < ratio and strip < slope
    ok = agreement < 0.10 and below_both
    _criterion(12, "ratio and slope within 10%; strip at W=e^5 below both",
               ok, f"ratio={ratio:.4f}, slope={slope:.4f}, strip(e^5)={strip:.4f}, "
                   f"diff={agreement:.1%}, below_both={below_both}")
