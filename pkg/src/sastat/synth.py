"""Seeded synthetic data generators for null models and sensitivity studies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .model import Dataset, FeatureVector, PointSet

FEATURE_NAME = "value"

GEN_KINDS = ("iid-normal", "uniform-coords", "disk-average", "grid-sample")

_BLOCK_ELEMS = 2_000_000


def gen_iid(n: int, seed: int) -> Dataset:
    """Uniform coordinates on [0,1]^2 carrying one standard-normal feature."""
    if n < 2:
        raise DataError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    coords = rng.random((n, 2))
    values = rng.standard_normal(n)
    points = PointSet(coords)
    return Dataset(points, {FEATURE_NAME: FeatureVector(FEATURE_NAME, values)})


def uniform_coords(n: int, seed: int) -> Dataset:
    """Uniform coordinates on [0,1]^2 with no features attached."""
    if n < 2:
        raise DataError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    return Dataset(PointSet(rng.random((n, 2))), {})


def disk_average(points: PointSet, z: FeatureVector, r: float) -> FeatureVector:
    """Replace each value by the mean of all input values strictly within radius r.

    The update is simultaneous: every output is computed from the input
    snapshot. Each point is a member of its own disk whenever r > 0, so
    disks are never empty; r = 0 is the identity.
    """
    if r < 0:
        raise DataError(f"radius must be >= 0, got {r}")
    values = z.values
    if values.shape[0] != points.n:
        raise DataError(
            f"feature {z.name!r} has {values.shape[0]} values for {points.n} points"
        )
    if r == 0.0:
        return FeatureVector(z.name, values.copy())
    coords = points.coords
    n = points.n
    out = np.empty(n)
    block = max(1, _BLOCK_ELEMS // n)
    r2 = r * r
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        diff = coords[i0:i1, None, :] - coords[None, :, :]
        inside = (diff * diff).sum(axis=2) < r2
        out[i0:i1] = (inside @ values) / inside.sum(axis=1)
    return FeatureVector(z.name, out)


def grid_cell_indices(coords: np.ndarray, k: int) -> np.ndarray:
    """1-based cell index per axis by ceiling; coordinates at 0 map to cell 1."""
    idx = np.ceil(coords).astype(np.int64)
    idx[idx < 1] = 1
    if (idx > k).any():
        raise DataError(f"coordinate outside [0, {k}]^2 support")
    return idx


def grid_sample(k: int, n: int, seed: int) -> Dataset:
    """Sample n coordinates on [0,k]^2 over a k x k grid of i.i.d. uniform cell values.

    Each point takes its cell's value (cell = ceiling of each coordinate),
    locking the correlation length to the cell size. With k = 1 every value
    is equal and downstream statistics raise their zero-variance errors.
    """
    if k < 1:
        raise DataError(f"grid size must be >= 1, got {k}")
    if n < 2:
        raise DataError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    cells = rng.random((k, k))
    coords = rng.random((n, 2)) * k
    idx = grid_cell_indices(coords, k)
    values = cells[idx[:, 0] - 1, idx[:, 1] - 1]
    return Dataset(PointSet(coords), {FEATURE_NAME: FeatureVector(FEATURE_NAME, values)})


def subsample(data: Dataset, m: int, seed: int) -> Dataset:
    """Uniform without-replacement row subsample carrying all features.

    Chosen rows keep their original relative order, so m = n returns an
    identical dataset.
    """
    n = data.points.n
    if not 2 <= m <= n:
        raise DataError(f"subsample size must be in [2, {n}], got {m}")
    rng = np.random.default_rng(seed)
    rows = np.sort(rng.choice(n, size=m, replace=False))
    points = PointSet(data.points.coords[rows])
    feats = {
        name: FeatureVector(name, fv.values[rows]) for name, fv in data.features.items()
    }
    return Dataset(points, feats)


@dataclass(frozen=True)
class GenSpec:
    """A declarative generator request, as parsed from the CLI."""

    kind: str
    n: int = 0
    k: int = 0
    radius: float = 0.0
    seed: int = 0
    feature: str = FEATURE_NAME

    def __post_init__(self):
        if self.kind not in GEN_KINDS:
            raise DataError(f"unknown generator kind {self.kind!r}")

    def generate(self, base: Dataset | None = None) -> Dataset:
        if self.kind == "iid-normal":
            return gen_iid(self.n, self.seed)
        if self.kind == "uniform-coords":
            return uniform_coords(self.n, self.seed)
        if self.kind == "grid-sample":
            return grid_sample(self.k, self.n, self.seed)
        # disk-average transforms an existing dataset
        if base is None:
            raise DataError("disk-average generation needs a base dataset")
        fv = disk_average(base.points, base.feature(self.feature), self.radius)
        feats = dict(base.features)
        feats[fv.name] = fv
        return Dataset(base.points, feats)
