"""Reproducible experiment harness: timing, disk averaging, grid convergence,
coordinate subsampling.

Every experiment is deterministic from (seed, config) apart from measured
wall times; replicate r derives its generator seed as seed + r. Results
are emitted as plain CSV (header plus one record per row; `#`-prefixed
metadata lines allowed before the header).
"""

from __future__ import annotations

import csv
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import geary_c, moran_i
from .errors import DataError, MatrixCapError, ZeroVarianceError
from .fitting import SigmoidFit, fit_log_sigmoid
from .linkage import DEFAULT_MATRIX_CAP, median_linkage, single_linkage
from .model import Dataset, FeatureVector
from .stats import compute_sa
from .synth import FEATURE_NAME, disk_average, gen_iid, grid_sample, subsample

DEFAULT_QUAD_CAP = 80_000


@dataclass(frozen=True)
class BenchRecord:
    """Median wall time of `reps` repetitions of one statistic at size n."""

    statistic: str
    n: int
    seconds: float
    reps: int

    def __post_init__(self):
        if self.reps < 3:
            raise DataError(f"bench records need >= 3 repetitions, got {self.reps}")
        if self.seconds <= 0:
            raise DataError("bench wall time must be positive")


def _median_time(fn, reps: int) -> float:
    """Median over reps of one timed call, inner-looped so each sample >= ~20 ms."""
    t0 = time.perf_counter()
    fn()
    probe = time.perf_counter() - t0
    inner = max(1, int(0.02 / max(probe, 1e-9)))
    samples = [probe] if inner == 1 else []
    while len(samples) < reps:
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        samples.append((time.perf_counter() - t0) / inner)
    return float(np.median(samples))


def run_timing(
    sizes,
    seed: int,
    reps: int = 3,
    quad_cap: int = DEFAULT_QUAD_CAP,
    matrix_cap: int = DEFAULT_MATRIX_CAP,
) -> tuple[list[BenchRecord], list[str]]:
    """Time order builds and statistics on i.i.d. data at each size.

    Returns (records, notices); sizes above a cap are skipped for the
    capped statistic with a notice rather than an error.
    """
    records: list[BenchRecord] = []
    notices: list[str] = []
    for i, n in enumerate(sizes):
        data = gen_iid(n, seed + i)
        pts = data.points
        fv = data.features[FEATURE_NAME]
        records.append(
            BenchRecord("single-order", n, _median_time(lambda: single_linkage(pts), reps), reps)
        )
        if n <= matrix_cap:
            try:
                records.append(
                    BenchRecord(
                        "median-order", n, _median_time(lambda: median_linkage(pts), reps), reps
                    )
                )
            except MemoryError:
                notices.append(f"median-order skipped at n={n}: out of memory")
        else:
            notices.append(f"median-order skipped at n={n}: above matrix cap {matrix_cap}")
        order = single_linkage(pts)
        records.append(
            BenchRecord("sa-given-order", n, _median_time(lambda: compute_sa(order, fv), reps), reps)
        )
        for name, fn in (("moran", moran_i), ("geary", geary_c)):
            if n <= quad_cap:
                records.append(
                    BenchRecord(name, n, _median_time(lambda: fn(pts, fv), reps), reps)
                )
            else:
                notices.append(f"{name} skipped at n={n}: above quadratic cap {quad_cap}")
    return records, notices


def write_bench_csv(records: list[BenchRecord], path, notices=()) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# platform: {platform.platform()}\n")
        fh.write(f"# python: {sys.version.split()[0]}\n")
        for note in notices:
            fh.write(f"# notice: {note}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["statistic", "n", "seconds", "reps"])
        for rec in records:
            writer.writerow([rec.statistic, rec.n, repr(rec.seconds), rec.reps])


def scaling_slope(records: list[BenchRecord], statistic: str) -> float:
    """Least-squares slope of log time versus log n for one statistic."""
    rows = [(r.n, r.seconds) for r in records if r.statistic == statistic]
    if len(rows) < 2:
        raise DataError(f"need >= 2 sizes to fit a slope for {statistic!r}")
    x = np.log([n for n, _ in rows])
    y = np.log([s for _, s in rows])
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------------------
# disk-averaging sensitivity
# ---------------------------------------------------------------------------

DISK_STATISTICS = ("sa-single", "sa-median", "moran", "geary")


@dataclass(frozen=True)
class SweepRow:
    """Replicate-aggregated value of one statistic at one sweep position."""

    key: float
    statistic: str
    mean: float
    std: float
    reps_used: int
    dropped: int


@dataclass(frozen=True)
class DiskResult:
    radii: np.ndarray
    rows: list[SweepRow]
    half_range_radius: dict[str, float | None]  # None when the curve never crosses

    def row(self, radius: float, statistic: str) -> SweepRow:
        for r in self.rows:
            if r.key == radius and r.statistic == statistic:
                return r
        raise KeyError((radius, statistic))


def log_spaced_radii(lo: float, hi: float, count: int) -> np.ndarray:
    if not (0 < lo < hi) or count < 2:
        raise DataError("radii need 0 < lo < hi and count >= 2")
    return np.logspace(np.log10(lo), np.log10(hi), count)


def half_range_crossing(radii: np.ndarray, means: np.ndarray) -> float:
    """First radius where the min-max normalized curve crosses half range.

    Linear interpolation between grid radii on the log-radius axis.
    """
    lo, hi = float(means.min()), float(means.max())
    if hi == lo:
        raise DataError("curve is flat; half-range radius undefined")
    g = (means - lo) / (hi - lo) - 0.5
    if g[0] == 0.0:
        return float(radii[0])
    for i in range(len(g) - 1):
        if g[i] == 0.0:
            return float(radii[i])
        if g[i] * g[i + 1] < 0.0 or g[i + 1] == 0.0:
            x0, x1 = np.log10(radii[i]), np.log10(radii[i + 1])
            frac = -g[i] / (g[i + 1] - g[i])
            return float(10 ** (x0 + frac * (x1 - x0)))
    raise DataError("curve never crosses half range")


def run_disk(
    n: int,
    radii,
    reps: int,
    seed: int,
    matrix_cap: int = DEFAULT_MATRIX_CAP,
) -> DiskResult:
    """Disk-averaging sweep: i.i.d. data re-smoothed at each radius.

    Per replicate the same base data is swept across all radii; replicates
    whose smoothed feature is constant are dropped and counted.
    """
    radii = np.asarray(list(radii), dtype=np.float64)
    stats = {name: np.full((len(radii), reps), np.nan) for name in DISK_STATISTICS}
    dropped = np.zeros(len(radii), dtype=int)
    for r in range(reps):
        data = gen_iid(n, seed + r)
        pts = data.points
        # orders depend on the coordinates only; build once, reuse per radius
        order_single = single_linkage(pts)
        order_median = median_linkage(pts, matrix_cap)
        for j, radius in enumerate(radii):
            smoothed = disk_average(pts, data.features[FEATURE_NAME], float(radius))
            try:
                stats["sa-single"][j, r] = compute_sa(order_single, smoothed).value
                stats["sa-median"][j, r] = compute_sa(order_median, smoothed).value
                stats["moran"][j, r] = moran_i(pts, smoothed).value
                stats["geary"][j, r] = geary_c(pts, smoothed).value
            except ZeroVarianceError:
                dropped[j] += 1
                for name in DISK_STATISTICS:
                    stats[name][j, r] = np.nan
    rows = []
    half = {}
    mean_curves = {}
    for name in DISK_STATISTICS:
        grid = stats[name]
        means = np.empty(len(radii))
        stds = np.empty(len(radii))
        used = np.empty(len(radii), dtype=int)
        for j, radius in enumerate(radii):
            vals = grid[j][np.isfinite(grid[j])]
            if vals.size == 0:
                raise DataError(f"all replicates dropped at radius {radius}")
            means[j] = vals.mean()
            stds[j] = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
            used[j] = vals.size
            rows.append(
                SweepRow(
                    float(radius), name, float(means[j]), float(stds[j]),
                    int(vals.size), int(reps - vals.size),
                )
            )
        mean_curves[name] = (means, stds, used)
        try:
            half[name] = half_range_crossing(radii, means)
        except DataError:
            half[name] = None
    # plot-ready overlay rows: baselines min-max mapped onto the range the
    # statistic's own curves cover (crossings, and hence half-range radii,
    # are unchanged by the affine map)
    sa_means = np.concatenate([mean_curves["sa-single"][0], mean_curves["sa-median"][0]])
    target = np.array([sa_means.min(), sa_means.max()])
    for name in ("moran", "geary"):
        means, stds, used = mean_curves[name]
        lo, hi = means.min(), means.max()
        if hi == lo:
            continue
        scale = (target[1] - target[0]) / (hi - lo)
        rescaled = rescale_to_range(means, target)
        for j, radius in enumerate(radii):
            rows.append(
                SweepRow(
                    float(radius), f"{name}-rescaled", float(rescaled[j]),
                    float(stds[j] * scale), int(used[j]), int(reps - used[j]),
                )
            )
    return DiskResult(radii, rows, half)


def rescale_to_range(values: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Min-max map of `values` onto the [min, max] range of `target`."""
    lo, hi = values.min(), values.max()
    if hi == lo:
        raise DataError("cannot rescale a flat curve")
    t_lo, t_hi = target.min(), target.max()
    return t_lo + (values - lo) / (hi - lo) * (t_hi - t_lo)


def write_sweep_csv(rows: list[SweepRow], path, key_name: str) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([key_name, "statistic", "mean", "std", "reps_used", "dropped"])
        for row in rows:
            writer.writerow(
                [repr(row.key), row.statistic, repr(row.mean), repr(row.std), row.reps_used, row.dropped]
            )


# ---------------------------------------------------------------------------
# grid convergence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridResult:
    rows: list[tuple[int, int, str, float, float, int]]  # k, n, statistic, mean, std, reps
    fits: dict[int, SigmoidFit]
    samples: dict[int, list[tuple[int, float]]]  # per k: replicate-level (n, sa) points


def run_grid(
    ks,
    ns,
    reps: int,
    seed: int,
    quad_cap: int = 4000,
) -> GridResult:
    """Grid-sampling sweep per (k, n) with a sigmoid fit of the statistic per k.

    The statistic uses single-linkage orders. Moran and Geary run only for
    n <= quad_cap. Draws whose sampled feature is constant are dropped.
    """
    rows = []
    fits = {}
    samples: dict[int, list[tuple[int, float]]] = {}
    rep_seed = 0
    for k in ks:
        pts_per_k: list[tuple[int, float]] = []
        for n in ns:
            sa_vals, moran_vals, geary_vals = [], [], []
            for r in range(reps):
                data = grid_sample(k, n, seed + rep_seed)
                rep_seed += 1
                pts = data.points
                fv = data.features[FEATURE_NAME]
                try:
                    sa_vals.append(compute_sa(single_linkage(pts), fv).value)
                except ZeroVarianceError:
                    continue
                if n <= quad_cap:
                    moran_vals.append(moran_i(pts, fv).value)
                    geary_vals.append(geary_c(pts, fv).value)
            for name, vals in (("sa-single", sa_vals), ("moran", moran_vals), ("geary", geary_vals)):
                if vals:
                    arr = np.array(vals)
                    rows.append(
                        (k, n, name, float(arr.mean()),
                         float(arr.std(ddof=1)) if arr.size > 1 else 0.0, len(vals))
                    )
            pts_per_k.extend((n, v) for v in sa_vals)
        samples[k] = pts_per_k
        fits[k] = fit_log_sigmoid(pts_per_k)
    return GridResult(rows, fits, samples)


def write_grid_csv(result: GridResult, path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "n", "statistic", "mean", "std", "reps_used"])
        for k, n, name, mean, std, used in result.rows:
            writer.writerow([k, n, name, repr(mean), repr(std), used])


# ---------------------------------------------------------------------------
# coordinate subsampling
# ---------------------------------------------------------------------------

SUBSAMPLE_STATISTICS = ("sa-single", "sa-median", "moran", "geary")


def run_subsample(
    data: Dataset,
    feature: str,
    ms,
    reps: int,
    seed: int,
    matrix_cap: int = DEFAULT_MATRIX_CAP,
) -> list[SweepRow]:
    """Statistics on without-replacement subsamples, orders rebuilt per draw."""
    fv = data.feature(feature)
    acc: dict[tuple[int, str], list[float]] = {}
    for m in ms:
        for r in range(reps):
            sub = subsample(data, m, seed + r)
            pts = sub.points
            z = sub.features[feature]
            vals = {
                "sa-single": compute_sa(single_linkage(pts), z).value,
                "sa-median": compute_sa(median_linkage(pts, matrix_cap), z).value,
                "moran": moran_i(pts, z).value,
                "geary": geary_c(pts, z).value,
            }
            for name, v in vals.items():
                acc.setdefault((m, name), []).append(v)
    rows = []
    for m in ms:
        for name in SUBSAMPLE_STATISTICS:
            vals = np.array(acc[(m, name)])
            rows.append(
                SweepRow(
                    float(m), name, float(vals.mean()),
                    float(vals.std(ddof=1)) if vals.size > 1 else 0.0, int(vals.size), 0
                )
            )
    return rows


def validate_csv(path, expected_header: list[str]) -> int:
    """Schema check: optional # metadata, exact header, rectangular rows.

    Returns the number of data records.
    """
    with open(Path(path), "r", newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader, None)
    if header != expected_header:
        raise DataError(f"{path}: header {header} != expected {expected_header}")
    count = 0
    for row in reader:
        if len(row) != len(expected_header):
            raise DataError(f"{path}: row {count + 2} has {len(row)} fields")
        count += 1
    return count
