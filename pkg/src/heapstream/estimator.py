"""Monte Carlo experiments around the logarithmic growth of the tree count.

The number of trees R(n) grows like c * log n for every capacity law except
the point mass at 1, with c the expected number of rootless lines the
infinite-strip system puts in one e-fold time window. No closed form for c
is known, so everything here is estimation and self-consistency:

* `trajectory` follows R(n)/log n along one run (the almost-sure statement);
* `estimate_c_discrete` averages over replicas, both as the plain ratio at n
  and as the slope of R against log n, which cancels additive lower-order
  terms (the expectation statement);
* `estimate_r_inf` approximates c from below through growing strip widths,
  where nesting the fields of a replica makes the per-replica counts exactly
  nondecreasing in the width (monotone coupling, not just in the mean);
* `stationarity_report` / `decorrelation_report` check that the window
  counts over (e^i, e^(i+1)] look identically distributed and decorrelate
  with lag distance;
* `scaling_check` verifies that rescaling (u, t) -> (cu, t/c) of the input
  field maps the simulation output line for line.

Replica r always uses seed + r, and replica results are merged in index
order, so every report is a pure function of its arguments regardless of the
``jobs`` thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from ._version import __version__
from .offspring import OffspringDistribution
from .poisson_field import restrict, sample_field, scale
from .hammersley import GraphicalRep, simulate
from .heap_sorter import run_random

Z95 = 1.959963984540054  # two-sided 95% normal quantile

DIRAC_ONE_WARNING = (
    "capacity-1 law: tree counts grow like sqrt(n), not log n; "
    "the ratio-at-n reading of this estimate is meaningless"
)


def _estimates_csv(estimates) -> str:
    lines = ["method,point,ci_low,ci_high,replicas,n,width"]
    for e in estimates:
        lines.append(
            f"{e.method},{e.point!r},{e.ci_low!r},{e.ci_high!r},{e.replicas},"
            f"{'' if e.n is None else e.n},{'' if e.width is None else repr(e.width)}")
    return "\n".join(lines) + "\n"


def _map_indexed(fn, count: int, jobs: int) -> list:
    if jobs <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, range(count)))


def _mean_ci(values: np.ndarray) -> tuple[float, float, float]:
    m = float(np.mean(values))
    if values.size < 2:
        return m, m, m
    half = Z95 * float(np.std(values, ddof=1)) / math.sqrt(values.size)
    return m, m - half, m + half


def _provenance(dist: OffspringDistribution, seed: int, replicas: int) -> dict:
    return {
        "dist": dist.spec_string(),
        "seed": int(seed),
        "replicas": int(replicas),
        "version": __version__,
    }


# ---------------------------------------------------------------------------
# result types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CEstimate:
    """Point estimate with a normal-approximation 95% confidence interval."""

    point: float
    ci_low: float
    ci_high: float
    replicas: int
    method: str                     # "ratio-at-n" | "slope-vs-logn" | "strip-window"
    n: Optional[int] = None
    width: Optional[float] = None

    def __post_init__(self) -> None:
        if self.replicas < 2:
            raise ValueError("estimates require at least 2 replicas")
        if not self.ci_low <= self.point <= self.ci_high:
            raise ValueError("confidence interval must bracket the point estimate")

    def to_json_dict(self) -> dict:
        return {
            "point": self.point, "ci_low": self.ci_low, "ci_high": self.ci_high,
            "replicas": self.replicas, "method": self.method,
            "n": self.n, "width": self.width,
        }


@dataclass
class ConvergenceSeries:
    """R(n) along one trajectory at geometrically spaced checkpoints."""

    checkpoints: list[int]
    r_at: list[int]
    ratio: list[float]              # R(n)/log n, per checkpoint
    seed: int
    dist_spec: str

    def final_ratio(self) -> float:
        return self.ratio[-1]

    def last_decade_spread(self) -> float:
        """(max - min)/mean of the ratio over checkpoints in the final decade."""
        n_max = self.checkpoints[-1]
        sel = [r for n, r in zip(self.checkpoints, self.ratio) if n * 10 >= n_max]
        lo, hi = min(sel), max(sel)
        return (hi - lo) / (sum(sel) / len(sel))

    def to_json_dict(self) -> dict:
        return {
            "dist": self.dist_spec, "seed": self.seed, "version": __version__,
            "checkpoints": self.checkpoints, "r": self.r_at, "ratio": self.ratio,
        }

    def to_csv_text(self) -> str:
        lines = ["n,R,ratio"]
        lines += [f"{n},{r},{q!r}" for n, r, q in
                  zip(self.checkpoints, self.r_at, self.ratio)]
        return "\n".join(lines) + "\n"


@dataclass
class DiscreteCEstimates:
    """Both discrete-side estimators of the growth constant on one run set."""

    ratio: CEstimate
    slope: CEstimate
    checkpoints: list[int]
    checkpoint_means: list[float]
    decade_slopes: list[float]      # slope over each consecutive checkpoint pair
    warning: Optional[str]
    provenance: dict

    def to_json_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "ratio": self.ratio.to_json_dict(),
            "slope": self.slope.to_json_dict(),
            "checkpoints": self.checkpoints,
            "checkpoint_means": self.checkpoint_means,
            "decade_slopes": self.decade_slopes,
            "warning": self.warning,
        }

    def to_csv_text(self) -> str:
        return _estimates_csv([self.ratio, self.slope])


@dataclass
class StripEstimates:
    """Strip-window estimates of c for each width, approaching c from below."""

    estimates: list[CEstimate]
    widths: list[float]
    counts: np.ndarray              # replicas x widths
    coupled: bool
    window: tuple[float, float]
    provenance: dict

    def to_json_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "coupled": self.coupled,
            "window": list(self.window),
            "widths": self.widths,
            "estimates": [e.to_json_dict() for e in self.estimates],
        }

    def to_csv_text(self) -> str:
        return _estimates_csv(self.estimates)


@dataclass
class StationarityReport:
    rows: list[dict]                # {"i", "mean", "ci_low", "ci_high"}
    z_max: float
    flagged: list[tuple[int, int, float]]   # (i, j, z) with |z| > 3
    counts: np.ndarray              # replicas x windows
    provenance: dict

    @property
    def passed(self) -> bool:
        return not self.flagged

    def to_json_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "rows": self.rows,
            "z_max": self.z_max,
            "flagged": [list(f) for f in self.flagged],
            "passed": self.passed,
        }

    def to_csv_text(self) -> str:
        lines = ["i,mean,ci_low,ci_high"]
        lines += [f"{r['i']},{r['mean']!r},{r['ci_low']!r},{r['ci_high']!r}"
                  for r in self.rows]
        return "\n".join(lines) + "\n"


@dataclass
class DecorrelationReport:
    lags: list[int]
    correlations: list[float]
    provenance: dict

    def to_json_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "lags": self.lags,
            "correlations": self.correlations,
        }

    def to_csv_text(self) -> str:
        lines = ["lag,correlation"]
        lines += [f"{lag},{c!r}" for lag, c in zip(self.lags, self.correlations)]
        return "\n".join(lines) + "\n"


@dataclass
class ScalingCheckReport:
    factor: float
    coupling_passed: bool
    max_rel_err: float
    structure_equal: bool
    ks_statistic: float
    ks_pvalue: float
    ks_passed: bool
    provenance: dict

    @property
    def passed(self) -> bool:
        return self.coupling_passed and self.ks_passed

    def to_json_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "factor": self.factor,
            "coupling_passed": self.coupling_passed,
            "max_rel_err": self.max_rel_err,
            "structure_equal": self.structure_equal,
            "ks_statistic": self.ks_statistic,
            "ks_pvalue": self.ks_pvalue,
            "ks_passed": self.ks_passed,
            "passed": self.passed,
        }


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def geometric_checkpoints(n_max: int, per_decade: int, start: int = 10) -> list[int]:
    """Geometrically spaced integers from `start` to n_max inclusive."""
    if n_max < start:
        return [n_max]
    ns = {start, n_max}
    k = per_decade * int(math.floor(math.log10(start)))
    while True:
        k += 1
        n = int(round(10 ** (k / per_decade)))
        if n >= n_max:
            break
        if n > start:
            ns.add(n)
    return sorted(ns)


def trajectory(dist: OffspringDistribution, n_max: int,
               checkpoints_per_decade: int = 4, seed: int = 0) -> ConvergenceSeries:
    """One run of the sorter with R sampled at geometric checkpoints."""
    if n_max < 10:
        raise ValueError(f"n_max must be >= 10, got {n_max}")
    if checkpoints_per_decade < 1:
        raise ValueError("checkpoints_per_decade must be >= 1")
    ns = geometric_checkpoints(n_max, checkpoints_per_decade)
    trace = run_random(dist, n_max, seed)
    r_at = [trace.tree_count(n) for n in ns]
    ratio = [r / math.log(n) for n, r in zip(ns, r_at)]
    return ConvergenceSeries(ns, r_at, ratio, seed, dist.spec_string())


def estimate_c_discrete(dist: OffspringDistribution, n: int, replicas: int,
                        seed: int = 0, jobs: int = 1) -> DiscreteCEstimates:
    """Estimate the growth constant from `replicas` independent runs to n.

    The ratio estimate is mean R(n)/log n. The slope estimate regresses each
    replica's R at the checkpoints (n/100, n/10, n) on log n, which cancels
    additive lower-order terms; the two approach the same limit.
    """
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    if n < 100:
        raise ValueError("n must be >= 100 so the slope spans two decades")
    checkpoints = [n // 100, n // 10, n]
    logs = np.log(checkpoints)

    def one(i: int) -> list[int]:
        trace = run_random(dist, n, seed + i)
        return [trace.tree_count(c) for c in checkpoints]

    r = np.array(_map_indexed(one, replicas, jobs), dtype=np.float64)

    ratios = r[:, -1] / math.log(n)
    xc = logs - logs.mean()
    slopes = (r @ xc) / float(xc @ xc)

    point, lo, hi = _mean_ci(ratios)
    ratio_est = CEstimate(point, lo, hi, replicas, "ratio-at-n", n=n)
    point, lo, hi = _mean_ci(slopes)
    slope_est = CEstimate(point, lo, hi, replicas, "slope-vs-logn", n=n)

    means = r.mean(axis=0)
    decade_slopes = [
        float((means[k + 1] - means[k]) / (logs[k + 1] - logs[k]))
        for k in range(len(checkpoints) - 1)
    ]
    warning = DIRAC_ONE_WARNING if dist.is_dirac_one else None
    return DiscreteCEstimates(
        ratio=ratio_est, slope=slope_est,
        checkpoints=checkpoints, checkpoint_means=[float(m) for m in means],
        decade_slopes=decade_slopes, warning=warning,
        provenance=_provenance(dist, seed, replicas),
    )


def estimate_r_inf(dist: OffspringDistribution, widths, replicas: int,
                   seed: int = 0, horizon_lo: float = 1.0,
                   horizon_hi: float = math.e, coupled: bool = True,
                   jobs: int = 1) -> StripEstimates:
    """Mean rootless-line count over (horizon_lo, horizon_hi] on strips
    (0, W) for each width W, estimating the growth constant from below.

    In coupled mode each replica simulates nested restrictions of one widest
    field, so its counts are nondecreasing in W pathwise, not merely on
    average.
    """
    widths = [float(w) for w in widths]
    if not widths:
        raise ValueError("widths must be nonempty")
    if any(w2 <= w1 for w1, w2 in zip(widths, widths[1:])):
        raise ValueError(f"widths must be strictly increasing, got {widths}")
    if not 0.0 <= horizon_lo < horizon_hi:
        raise ValueError("need 0 <= horizon_lo < horizon_hi")
    if replicas < 2:
        raise ValueError("replicas must be >= 2")

    if coupled:
        def one(r: int) -> list[int]:
            base = sample_field(0.0, widths[-1], horizon_hi, dist, seed + r)
            return [
                simulate(restrict(base, 0.0, w, 0.0, horizon_hi))
                .count_roots(horizon_lo, horizon_hi)
                for w in widths
            ]
        rows = _map_indexed(one, replicas, jobs)
    else:
        def one(r: int) -> list[int]:
            return [
                simulate(sample_field(0.0, w, horizon_hi, dist, seed + k * replicas + r))
                .count_roots(horizon_lo, horizon_hi)
                for k, w in enumerate(widths)
            ]
        rows = _map_indexed(one, replicas, jobs)

    counts = np.array(rows, dtype=np.int64)
    estimates = []
    for k, w in enumerate(widths):
        point, lo, hi = _mean_ci(counts[:, k].astype(np.float64))
        estimates.append(CEstimate(point, lo, hi, replicas, "strip-window", width=w))
    return StripEstimates(
        estimates=estimates, widths=widths, counts=counts, coupled=coupled,
        window=(horizon_lo, horizon_hi),
        provenance=_provenance(dist, seed, replicas),
    )


def stationarity_report(dist: OffspringDistribution, width: float,
                        i_min: int, i_max: int, replicas: int,
                        seed: int = 0, jobs: int = 1) -> StationarityReport:
    """Per-window summary of the counts X_i over (e^i, e^(i+1)] on a strip of
    the given width, with pairwise z-scores of the window means. On the
    infinite system the X_i are identically distributed; a finite strip only
    approximates that, so |z| > 3 pairs are flagged rather than fatal."""
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    if i_min > i_max:
        raise ValueError("i_min must be <= i_max")
    horizon = math.e ** (i_max + 1)

    def one(r: int) -> tuple[int, ...]:
        rep = simulate(sample_field(0.0, width, horizon, dist, seed + r))
        return rep.window_counts(i_min, i_max).counts

    counts = np.array(_map_indexed(one, replicas, jobs), dtype=np.float64)
    rows = []
    for k, i in enumerate(range(i_min, i_max + 1)):
        point, lo, hi = _mean_ci(counts[:, k])
        rows.append({"i": i, "mean": point, "ci_low": lo, "ci_high": hi})

    nwin = counts.shape[1]
    means = counts.mean(axis=0)
    se2 = counts.var(axis=0, ddof=1) / replicas
    z_max = 0.0
    flagged = []
    for p in range(nwin):
        for q in range(p + 1, nwin):
            denom = math.sqrt(se2[p] + se2[q])
            if denom == 0.0:
                z = 0.0 if means[p] == means[q] else math.inf
            else:
                z = (means[p] - means[q]) / denom
            z_max = max(z_max, abs(z))
            if abs(z) > 3.0:
                flagged.append((i_min + p, i_min + q, float(z)))
    return StationarityReport(
        rows=rows, z_max=float(z_max), flagged=flagged,
        counts=counts.astype(np.int64),
        provenance=_provenance(dist, seed, replicas),
    )


def decorrelation_report(dist: OffspringDistribution, width: float,
                         i_min: int, lag_max: int, replicas: int,
                         seed: int = 0, jobs: int = 1) -> DecorrelationReport:
    """Sample correlation between the window count at i_min and at i_min+lag,
    per lag. Diagnostic only: it reports decay, it does not certify mixing."""
    if replicas < 2:
        raise ValueError("correlation requires at least 2 replicas")
    if lag_max < 0:
        raise ValueError("lag_max must be >= 0")
    horizon = math.e ** (i_min + lag_max + 1)

    def one(r: int) -> tuple[int, ...]:
        rep = simulate(sample_field(0.0, width, horizon, dist, seed + r))
        return rep.window_counts(i_min, i_min + lag_max).counts

    counts = np.array(_map_indexed(one, replicas, jobs), dtype=np.float64)
    base = counts[:, 0]
    correlations = [1.0]
    for lag in range(1, lag_max + 1):
        other = counts[:, lag]
        v0, v1 = base.var(), other.var()
        if v0 == 0.0 or v1 == 0.0:
            correlations.append(float("nan"))
        else:
            correlations.append(float(np.corrcoef(base, other)[0, 1]))
    return DecorrelationReport(
        lags=list(range(lag_max + 1)),
        correlations=correlations,
        provenance=_provenance(dist, seed, replicas),
    )


def scaling_check(dist: OffspringDistribution, a: float, b: float, horizon: float,
                  c: float, seed: int = 0, ks_pairs: int = 300,
                  rtol: float = 1e-12) -> ScalingCheckReport:
    """Two-part check of scaling equivariance.

    Deterministic coupling: simulating the rescaled field must reproduce the
    original simulation with every coordinate mapped by (x, t) -> (cx, t/c)
    (same attachment structure, coordinates within `rtol`). Distributional:
    rootless counts over matched e-fold windows from independent seeds, with
    and without rescaling, are compared by a two-sample KS test at
    significance 0.001.
    """
    if c <= 0.0:
        raise ValueError("scale factor must be > 0")
    base = sample_field(a, b, horizon, dist, seed)
    rep = simulate(base)
    rep_scaled = simulate(scale(base, c))

    structure_equal = (
        np.array_equal(rep.father, rep_scaled.father)
        and np.array_equal(rep.death, rep_scaled.death)
    )
    max_rel_err = max(
        _rel_err(rep.atom_u * c, rep_scaled.atom_u),
        _rel_err(rep.atom_t / c, rep_scaled.atom_t),
        _rel_err(np.array([rep.a * c, rep.b * c, rep.horizon / c]),
                 np.array([rep_scaled.a, rep_scaled.b, rep_scaled.horizon])),
    )
    coupling_passed = structure_equal and max_rel_err <= rtol

    def window_count(r: GraphicalRep) -> int:
        return r.count_roots(r.horizon / math.e, r.horizon)

    if ks_pairs > 0:
        xs = np.array([
            window_count(simulate(sample_field(a, b, horizon, dist, seed + 1 + k)))
            for k in range(ks_pairs)
        ])
        ys = np.array([
            window_count(simulate(scale(sample_field(a, b, horizon, dist,
                                                     seed + 1 + ks_pairs + k), c)))
            for k in range(ks_pairs)
        ])
        ks = stats.ks_2samp(xs, ys)
        ks_statistic, ks_pvalue = float(ks.statistic), float(ks.pvalue)
        ks_passed = bool(ks.pvalue > 0.001)
    else:
        ks_statistic = ks_pvalue = float("nan")
        ks_passed = True   # coupling-only check requested

    return ScalingCheckReport(
        factor=c, coupling_passed=bool(coupling_passed),
        max_rel_err=float(max_rel_err), structure_equal=bool(structure_equal),
        ks_statistic=ks_statistic, ks_pvalue=ks_pvalue,
        ks_passed=ks_passed,
        provenance=_provenance(dist, seed, ks_pairs),
    )


def _rel_err(expected: np.ndarray, got: np.ndarray) -> float:
    if expected.size == 0:
        return 0.0
    scale_ref = np.maximum(np.abs(expected), 1e-300)
    return float(np.max(np.abs(got - expected) / scale_ref))
