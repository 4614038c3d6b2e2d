"""Core domain types and the on-disk formats every other module consumes.

Id convention for merge orders: the n input points are singleton clusters
0..n-1, and the t-th merge event (t = 1..n-1) creates cluster id n+t-1.
The final root is therefore id 2n-2. This matches the common dendrogram
convention, so orders are portable between builders and the streaming
engine.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .errors import DataError, OrderFormatError

ORDER_MAGIC = "SAORDER"
ORDER_VERSION = "v1"
METHODS = ("single", "average", "median", "furthest", "kdtree", "external")

COORD_NAMES = ("x", "y", "z")


def _frozen_array(values, dtype) -> np.ndarray:
    a = np.array(values, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PointSet:
    """n points in 2-D or 3-D Euclidean space, stored as an (n, dims) array.

    Coordinates are abstract distance units; duplicates are permitted.
    """

    coords: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.coords, dtype=np.float64)
        if a.ndim != 2:
            raise DataError(f"coordinates must be a 2-D array, got shape {a.shape}")
        n, dims = a.shape
        if dims not in (2, 3):
            raise DataError(f"dims must be 2 or 3, got {dims}")
        if n < 2:
            raise DataError(f"need at least 2 points, got {n}")
        if not np.isfinite(a).all():
            bad = np.argwhere(~np.isfinite(a))[0]
            raise DataError(
                f"non-finite coordinate at point {bad[0]}, axis {bad[1]}"
            )
        object.__setattr__(self, "coords", _frozen_array(a, np.float64))

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dims(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class FeatureVector:
    """A named length-n sequence of finite real values, index-aligned with a PointSet."""

    name: str
    values: np.ndarray

    def __post_init__(self):
        if not self.name:
            raise DataError("feature name must be non-empty")
        a = np.asarray(self.values, dtype=np.float64)
        if a.ndim != 1:
            raise DataError(f"feature {self.name!r} must be 1-D, got shape {a.shape}")
        if not np.isfinite(a).all():
            row = int(np.flatnonzero(~np.isfinite(a))[0])
            raise DataError(f"non-finite value in feature {self.name!r} at row {row + 1}")
        object.__setattr__(self, "values", _frozen_array(a, np.float64))

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Dataset:
    """A PointSet paired with an ordered name -> FeatureVector map."""

    points: PointSet
    features: Mapping[str, FeatureVector]

    def __post_init__(self):
        feats = dict(self.features)
        for name, fv in feats.items():
            if name != fv.name:
                raise DataError(f"feature key {name!r} does not match vector name {fv.name!r}")
            if len(fv) != self.points.n:
                raise DataError(
                    f"feature {name!r} has {len(fv)} values for {self.points.n} points"
                )
        object.__setattr__(self, "features", feats)

    @property
    def n(self) -> int:
        return self.points.n

    def feature(self, name: str) -> FeatureVector:
        try:
            return self.features[name]
        except KeyError:
            raise DataError(f"no feature named {name!r}; have {sorted(self.features)}") from None


@dataclass(frozen=True)
class MergeEvent:
    """A single agglomeration step: clusters `left` and `right` join at time t."""

    left: int
    right: int
    t: int


class MergeOrder:
    """An agglomeration order: n-1 merge events under the dendrogram id convention.

    The event list is held as an (n-1, 2) int64 array (`pairs`); row t-1
    holds the two cluster ids consumed by merge t. Construction validates
    the id convention: every id is consumed exactly once by a later merge,
    except the final root 2n-2.
    """

    __slots__ = ("n", "method", "pairs")

    def __init__(self, n: int, pairs, method: str):
        if method not in METHODS:
            raise OrderFormatError(f"unknown method tag {method!r}")
        if n < 2:
            raise OrderFormatError(f"merge order needs n >= 2, got n={n}")
        a = np.asarray(pairs, dtype=np.int64)
        if a.shape != (n - 1, 2):
            raise OrderFormatError(
                f"expected {n - 1} merge events of 2 ids, got shape {a.shape}"
            )
        self.n = int(n)
        self.method = method
        a = a.copy()
        a.flags.writeable = False
        self.pairs = a
        self._validate()

    def _validate(self):
        n, a = self.n, self.pairs
        ok = (
            (a >= 0).all()
            and (a[:, 0] != a[:, 1]).all()
            # event t may only consume ids created before it: 0..n+t-2
            and (a <= (np.arange(n - 1) + n - 1)[:, None]).all()
            # every id except the root consumed exactly once
            and np.array_equal(np.sort(a, axis=None), np.arange(2 * n - 2))
        )
        if not ok:
            self._explain_invalid()

    def _explain_invalid(self):
        """Replay events one by one to report the first violation precisely."""
        n = self.n
        alive = set(range(n))
        for t, (left, right) in enumerate(self.pairs, start=1):
            left, right = int(left), int(right)
            for cid in (left, right):
                if cid < 0 or cid >= 2 * n - 1:
                    raise OrderFormatError(f"id {cid} out of range at merge {t}")
                if cid >= n + t - 1:
                    raise OrderFormatError(f"id {cid} not yet created at merge {t}")
                if cid not in alive:
                    raise OrderFormatError(f"id {cid} consumed twice (at merge {t})")
            if left == right:
                raise OrderFormatError(f"merge {t} joins id {left} with itself")
            alive.discard(left)
            alive.discard(right)
            alive.add(n + t - 1)
        raise OrderFormatError("invalid merge order")  # unreachable for bad inputs above

    @property
    def events(self) -> list[MergeEvent]:
        return [
            MergeEvent(int(l), int(r), t + 1) for t, (l, r) in enumerate(self.pairs)
        ]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MergeOrder)
            and self.n == other.n
            and self.method == other.method
            and np.array_equal(self.pairs, other.pairs)
        )

    def __repr__(self) -> str:
        return f"MergeOrder(n={self.n}, method={self.method!r})"


def read_dataset(path, dims: int) -> Dataset:
    """Read a dataset CSV: header `x,y[,z]` then feature columns, one row per location."""
    if dims not in (2, 3):
        raise DataError(f"dims must be 2 or 3, got {dims}")
    path = Path(path)
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        expected = list(COORD_NAMES[:dims])
        if header[:dims] != expected:
            raise DataError(
                f"{path}: header must start with {','.join(expected)}, got {','.join(header[: dims])}"
            )
        feat_names = header[dims:]
        if len(set(feat_names)) != len(feat_names):
            dupes = sorted({f for f in feat_names if feat_names.count(f) > 1})
            raise DataError(f"{path}: duplicate column names {dupes}")
        ncols = len(header)
        rows = []
        for r, row in enumerate(reader, start=1):
            if len(row) != ncols:
                raise DataError(f"{path}: row {r} has {len(row)} fields, expected {ncols}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                bad = next(i for i, v in enumerate(row) if not _is_float(v))
                raise DataError(
                    f"{path}: malformed value {row[bad]!r} at row {r}, column {bad + 1}"
                ) from None
    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 rows, got {len(rows)}")
    table = np.array(rows, dtype=np.float64)
    if not np.isfinite(table).all():
        r, c = np.argwhere(~np.isfinite(table))[0]
        raise DataError(f"{path}: non-finite value at row {r + 1}, column {c + 1}")
    points = PointSet(table[:, :dims])
    features = {
        name: FeatureVector(name, table[:, dims + i]) for i, name in enumerate(feat_names)
    }
    return Dataset(points, features)


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_dataset(data: Dataset, path) -> None:
    """Write a Dataset in the CSV format read_dataset accepts (repr round-trip floats)."""
    path = Path(path)
    names = list(data.features)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(COORD_NAMES[: data.points.dims]) + names)
        cols = [data.points.coords[:, i] for i in range(data.points.dims)]
        cols += [data.features[name].values for name in names]
        for row in zip(*cols):
            writer.writerow([repr(float(v)) for v in row])


def write_merge_order(order: MergeOrder, path) -> None:
    """Write a merge order in the bit-exact SAORDER v1 format (ASCII, LF endings)."""
    path = Path(path)
    lines = [f"{ORDER_MAGIC} {ORDER_VERSION} n={order.n} method={order.method}"]
    lines.extend(f"{l} {r}" for l, r in order.pairs)
    path.write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def read_merge_order(path, n: int | None = None) -> MergeOrder:
    """Read and validate a SAORDER v1 file; `n`, when given, must match the header."""
    path = Path(path)
    text = path.read_bytes().decode("ascii")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise OrderFormatError(f"{path}: empty file")
    head = lines[0].split(" ")
    if len(head) != 4 or head[0] != ORDER_MAGIC or head[1] != ORDER_VERSION:
        raise OrderFormatError(f"{path}: bad header {lines[0]!r}")
    if not head[2].startswith("n=") or not head[3].startswith("method="):
        raise OrderFormatError(f"{path}: bad header {lines[0]!r}")
    try:
        file_n = int(head[2][2:])
    except ValueError:
        raise OrderFormatError(f"{path}: bad point count {head[2]!r}") from None
    method = head[3][len("method="):]
    if n is not None and n != file_n:
        raise OrderFormatError(f"{path}: order has n={file_n}, expected n={n}")
    body = lines[1:]
    if len(body) != file_n - 1:
        raise OrderFormatError(
            f"{path}: expected {file_n - 1} event lines, found {len(body)}"
        )
    pairs = np.empty((file_n - 1, 2), dtype=np.int64)
    for i, line in enumerate(body):
        parts = line.split(" ")
        if len(parts) != 2:
            raise OrderFormatError(f"{path}: bad event line {i + 2}: {line!r}")
        try:
            pairs[i, 0] = int(parts[0])
            pairs[i, 1] = int(parts[1])
        except ValueError:
            raise OrderFormatError(f"{path}: bad event line {i + 2}: {line!r}") from None
    try:
        return MergeOrder(file_n, pairs, method)
    except OrderFormatError as exc:
        raise OrderFormatError(f"{path}: {exc}") from None
