"""Streaming engine for the agglomerative autocorrelation statistic.

Replaying a merge order over a feature keeps one (size, mean) pair per
cluster and updates the running within-cluster sum of squares in O(1) per
merge:

    SS(t) = SS(t-1) + |C1| (m12 - m1)^2 + |C2| (m12 - m2)^2

where m12 is the size-weighted mean of the merged cluster. The scalar
statistic is the normalized time-average of SS mapped onto [-1, 1):

    S_A = 2 (1 - sum_t SS(t) / ((n-1) SS(n-1))) - 1
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, SaStatError, ZeroVarianceError
from .model import FeatureVector, MergeOrder


@dataclass(frozen=True)
class ClusterStat:
    """Per-cluster streaming state: size, feature mean, and geographic centroid.

    The centroid is size-weighted bookkeeping for inspection and debugging;
    it never enters the sum-of-squares update.
    """

    size: int
    mean: float
    centroid: tuple[float, ...]

    @staticmethod
    def singleton(z: float, coord: Sequence[float]) -> "ClusterStat":
        return ClusterStat(1, float(z), tuple(float(c) for c in coord))


def merge_update(a: ClusterStat, b: ClusterStat) -> tuple[ClusterStat, float]:
    """Join two cluster states; returns the merged state and the SS increase."""
    n12 = a.size + b.size
    m12 = (a.size * a.mean + b.size * b.mean) / n12
    da = m12 - a.mean
    db = m12 - b.mean
    delta_ss = a.size * da * da + b.size * db * db
    centroid = tuple(
        (a.size * ca + b.size * cb) / n12 for ca, cb in zip(a.centroid, b.centroid)
    )
    return ClusterStat(n12, m12, centroid), delta_ss


@dataclass(frozen=True)
class SaTrace:
    """The SS(t) trajectory for t = 1..n-1; non-decreasing, ends at total."""

    ss: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.ss, dtype=np.float64)
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "ss", a)

    @property
    def total(self) -> float:
        return float(self.ss[-1])

    def normalized(self) -> np.ndarray:
        return self.ss / self.total


@dataclass(frozen=True)
class SaResult:
    """Scalar statistic in [-1, 1 - 2/(n-1)] with an optional trace."""

    value: float
    n: int
    trace: SaTrace | None = None


def _replay(pairs: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, float]:
    """Run the merge recurrence; returns the SS trace and sum_t SS(t)."""
    n = z.shape[0]
    size = np.empty(2 * n - 1)
    mean = np.empty(2 * n - 1)
    size[:n] = 1.0
    mean[:n] = z
    trace = np.empty(n - 1)
    ss = 0.0
    acc = 0.0
    for t in range(n - 1):
        l = pairs[t, 0]
        r = pairs[t, 1]
        nl = size[l]
        nr = size[r]
        ml = mean[l]
        mr = mean[r]
        n12 = nl + nr
        m12 = (nl * ml + nr * mr) / n12
        dl = m12 - ml
        dr = m12 - mr
        ss += nl * dl * dl + nr * dr * dr
        trace[t] = ss
        acc += ss
        size[n + t] = n12
        mean[n + t] = m12
    return trace, acc


def compute_sa(order: MergeOrder, z: FeatureVector, want_trace: bool = False) -> SaResult:
    """Compute the statistic for one feature over a merge order.

    O(n) time and memory. Raises ZeroVarianceError for a constant feature
    (the normalizing SS(n-1) would be zero) and DataError on a length
    mismatch.
    """
    values = z.values
    n = order.n
    if values.shape[0] != n:
        raise DataError(
            f"feature {z.name!r} has {values.shape[0]} values but order has n={n}"
        )
    if values.min() == values.max():
        raise ZeroVarianceError(
            f"S_A undefined: SS(n-1)=0 (feature {z.name!r} is constant)"
        )
    trace, acc = _replay(order.pairs, values)
    total = trace[-1]
    if total == 0.0:
        raise ZeroVarianceError(f"S_A undefined: SS(n-1)=0 (feature {z.name!r})")
    value = 2.0 * (1.0 - acc / ((n - 1) * total)) - 1.0
    return SaResult(float(value), n, SaTrace(trace) if want_trace else None)


def compute_sa_multi(
    order: MergeOrder, features: Iterable[FeatureVector], want_trace: bool = False
) -> list[SaResult | SaStatError]:
    """Compute the statistic for many features over one reused order.

    Entry i is exactly compute_sa(order, features[i]); features that fail
    (constant values, bad length) yield their error object in place rather
    than aborting the batch.
    """
    out: list[SaResult | SaStatError] = []
    for fv in features:
        try:
            out.append(compute_sa(order, fv, want_trace))
        except SaStatError as exc:
            out.append(exc)
    return out


def null_expectation(n: int) -> float:
    """Expected statistic for location-independent i.i.d. values: -1/(n-1)."""
    if n < 2:
        raise DataError(f"null expectation needs n >= 2, got {n}")
    return -1.0 / (n - 1)


def trace_export(result: SaResult, path) -> None:
    """Write the trace as CSV rows `t,ss,ss_normalized` for t = 1..n-1."""
    if result.trace is None:
        raise DataError("result has no trace; compute with want_trace=True")
    ss = result.trace.ss
    total = result.trace.total
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "ss", "ss_normalized"])
        for t, v in enumerate(ss, start=1):
            writer.writerow([t, repr(float(v)), repr(float(v / total))])
