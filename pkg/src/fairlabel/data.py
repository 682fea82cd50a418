"""Dataset ingestion, k-means++ centers and synthetic instances."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import Instance, Objective, euclidean_distances
from .rng import make_rng

log = logging.getLogger(__name__)

MISSING = {"", "?", "na", "nan", "null", "none"}


class IngestionError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetSpec:
    path: str | Path
    coordinate_columns: Sequence[str]
    color_column: str
    delimiter: str = ","
    has_header: bool = True
    row_limit: int | None = None
    normalization: str = "none"

    def __post_init__(self):
        if not self.coordinate_columns:
            raise ValueError("at least one coordinate column is required")
        if self.color_column in self.coordinate_columns:
            raise ValueError("the color column cannot also be a coordinate column")
        if self.normalization not in ("none", "zscore"):
            raise ValueError(f"unknown normalization {self.normalization!r}")


@dataclass(frozen=True, eq=False)
class PointSet:
    """Points and colors without centers. ``legend[c]`` is the original value of color c."""

    coordinates: np.ndarray
    colors: np.ndarray
    legend: tuple[str, ...]
    dropped_rows: int = 0
    blobs: np.ndarray | None = None  # generating blob per point, synthetic data only

    @property
    def n(self) -> int:
        return self.coordinates.shape[0]

    def with_centers(self, centers: np.ndarray, objective: Objective = Objective.KMEDIAN) -> Instance:
        return Instance(self.coordinates, self.colors, centers, objective,
                        num_colors=len(self.legend), color_legend=self.legend)

    def subsample(self, size: int, seed: int) -> "PointSet":
        if size >= self.n:
            return self
        idx = np.sort(make_rng(seed).choice(self.n, size=size, replace=False))
        blobs = None if self.blobs is None else self.blobs[idx]
        return PointSet(self.coordinates[idx], self.colors[idx], self.legend, blobs=blobs)


def _column_index(header: list[str] | None, name: str, width: int) -> int:
    if header is not None:
        stripped = [h.strip() for h in header]
        if name not in stripped:
            raise IngestionError(f"column {name!r} not found; available: {stripped}")
        return stripped.index(name)
    try:
        idx = int(name)
    except ValueError:
        raise IngestionError(f"without a header, columns are addressed by position, got {name!r}") from None
    if not 0 <= idx < width:
        raise IngestionError(f"column position {idx} out of range for {width} columns")
    return idx


def load_dataset(spec: DatasetSpec) -> PointSet:
    """Read a delimited text file. Colors are numbered in order of first appearance.

    Rows with a missing value in a selected column are dropped and counted.
    """
    path = Path(spec.path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=spec.delimiter) if r and any(c.strip() for c in r)]
    header = None
    if spec.has_header:
        if not rows:
            raise IngestionError(f"{path}: empty file")
        header, rows = rows[0], rows[1:]
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    width = len(header) if header is not None else len(rows[0])
    coord_idx = [_column_index(header, c, width) for c in spec.coordinate_columns]
    color_idx = _column_index(header, spec.color_column, width)
    if spec.row_limit is not None:
        rows = rows[: spec.row_limit]
    first_line = 2 if spec.has_header else 1
    coords, colors, legend = [], [], {}
    dropped = 0
    for offset, row in enumerate(rows):
        line = first_line + offset
        cells = [row[i].strip() if i < len(row) else "" for i in coord_idx + [color_idx]]
        if any(c.lower() in MISSING for c in cells):
            dropped += 1
            continue
        values = []
        for name, cell in zip(spec.coordinate_columns, cells):
            try:
                values.append(float(cell))
            except ValueError:
                raise IngestionError(f"{path}: row {line}, column {name!r}: cannot parse {cell!r} as a number") from None
        coords.append(values)
        colors.append(legend.setdefault(cells[-1], len(legend)))
    if dropped:
        log.warning("%s: dropped %d rows with missing values", path, dropped)
    if not coords:
        raise IngestionError(f"{path}: no complete rows")
    x = np.array(coords, dtype=np.float64)
    if spec.normalization == "zscore":
        std = x.std(axis=0)
        std[std == 0] = 1.0
        x = (x - x.mean(axis=0)) / std
    return PointSet(x, np.array(colors, dtype=np.int64), tuple(legend), dropped)


def _kmeans_cost(points: np.ndarray, centers: np.ndarray) -> float:
    d = euclidean_distances(points, centers)
    return float((d.min(axis=1) ** 2).sum())


def kmeanspp_centers(points: np.ndarray, k: int, seed: int, lloyd_iterations: int = 10) -> np.ndarray:
    """D^2-sampled seeding followed by ``lloyd_iterations`` Lloyd steps; deterministic per seed.

    A cluster that empties during Lloyd keeps its previous center.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, n={n}], got {k}")
    rng = make_rng(seed)
    chosen = [int(rng.integers(n))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        else:
            # every point coincides with a chosen center; take an unchosen index uniformly
            free = np.setdiff1d(np.arange(n), chosen)
            idx = int(free[rng.integers(free.size)])
        chosen.append(idx)
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    centers = x[chosen].copy()
    for _ in range(lloyd_iterations):
        nearest = np.argmin(euclidean_distances(x, centers), axis=1)
        sums = np.zeros_like(centers)
        np.add.at(sums, nearest, x)
        counts = np.bincount(nearest, minlength=k)
        filled = counts > 0
        updated = centers.copy()
        updated[filled] = sums[filled] / counts[filled, None]
        if np.array_equal(updated, centers):
            break
        centers = updated
    return centers


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian blobs with colors. ``correlation`` is the probability that a point's blob is
    picked by its color (color h -> blob h mod clusters) instead of uniformly."""

    n: int
    dim: int = 2
    num_colors: int = 2
    color_weights: Sequence[float] | None = None
    clusters: int = 3
    spread: float = 1.0
    seed: int = 0
    correlation: float = 0.0
    box: float = 10.0

    def weights(self) -> np.ndarray:
        w = np.full(self.num_colors, 1.0 / self.num_colors) if self.color_weights is None else np.asarray(
            self.color_weights, dtype=np.float64)
        if w.shape != (self.num_colors,) or np.any(w < 0) or abs(w.sum() - 1) > 1e-9:
            raise ValueError(f"color weights must be {self.num_colors} non-negative numbers summing to 1")
        return w


def synthesize(spec: SyntheticSpec) -> PointSet:
    if spec.n < 1 or spec.dim < 1 or spec.clusters < 1:
        raise ValueError("n, dim and clusters must be positive")
    if not 0 <= spec.correlation <= 1:
        raise ValueError("correlation must lie in [0, 1]")
    w = spec.weights()
    rng = make_rng(spec.seed)
    blob_centers = rng.uniform(-spec.box, spec.box, size=(spec.clusters, spec.dim))
    colors = rng.choice(spec.num_colors, size=spec.n, p=w)
    follow = rng.random(spec.n) < spec.correlation
    blobs = np.where(follow, colors % spec.clusters, rng.integers(spec.clusters, size=spec.n))
    coords = blob_centers[blobs] + rng.normal(scale=spec.spread, size=(spec.n, spec.dim))
    return PointSet(coords, colors.astype(np.int64), tuple(str(h) for h in range(spec.num_colors)), blobs=blobs)
