"""Core domain types: instances, label constraints, assignments and objectives."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

DEFAULT_COST_SCALE = 10**6


class Objective(enum.Enum):
    KCENTER = "kcenter"
    KMEDIAN = "kmedian"
    KMEANS = "kmeans"

    @property
    def p(self) -> float:
        return {"kcenter": math.inf, "kmedian": 1.0, "kmeans": 2.0}[self.value]

    def point_costs(self, distances: np.ndarray) -> np.ndarray:
        """Per point-center cost that the objective aggregates (d for k-center/k-median, d^2 for k-means)."""
        if self is Objective.KMEANS:
            return distances * distances
        return distances

    def aggregate(self, costs: np.ndarray) -> float:
        if costs.size == 0:
            return 0.0
        if self is Objective.KCENTER:
            return float(np.max(costs))
        return float(math.fsum(costs.tolist()))

    def display(self, value: float) -> float:
        """p-th root of an aggregated sum; k-center values pass through."""
        if self is Objective.KMEANS:
            return math.sqrt(value)
        return value


def rational(x) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float (floats read by their repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(repr(float(x)))
    return Fraction(str(x).strip())


def ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def euclidean_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """n x k Euclidean distance matrix, computed one center column at a time."""
    points = np.asarray(points, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    out = np.empty((points.shape[0], centers.shape[0]), dtype=np.float64)
    for i in range(centers.shape[0]):
        diff = points - centers[i]
        out[:, i] = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Instance:
    """Points with colors and a fixed set of centers.

    ``num_colors`` defaults to ``max(colors) + 1``; pass it explicitly when some
    colors of the palette have no points.
    """

    coordinates: np.ndarray
    colors: np.ndarray
    centers: np.ndarray
    objective: Objective = Objective.KMEDIAN
    num_colors: int | None = None
    color_legend: tuple[str, ...] | None = None
    distances: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        coords = np.asarray(self.coordinates, dtype=np.float64)
        if coords.ndim == 1:
            coords = coords[:, None]
        centers = np.asarray(self.centers, dtype=np.float64)
        if centers.ndim == 1:
            centers = centers[:, None]
        colors = np.asarray(self.colors, dtype=np.int64)
        if coords.shape[0] < 1:
            raise ValueError("instance needs at least one point")
        if centers.shape[0] < 1:
            raise ValueError("instance needs at least one center")
        if coords.shape[1] != centers.shape[1]:
            raise ValueError(f"dimension mismatch: points {coords.shape[1]}, centers {centers.shape[1]}")
        if colors.shape != (coords.shape[0],):
            raise ValueError("colors must have one entry per point")
        if colors.min() < 0:
            raise ValueError("color indices must be non-negative")
        num_colors = int(colors.max()) + 1 if self.num_colors is None else int(self.num_colors)
        if num_colors < 1 or colors.max() >= num_colors:
            raise ValueError(f"color index out of range for {num_colors} colors")
        objective = self.objective if isinstance(self.objective, Objective) else Objective(self.objective)
        object.__setattr__(self, "coordinates", _frozen(coords))
        object.__setattr__(self, "centers", _frozen(centers))
        object.__setattr__(self, "colors", _frozen(colors))
        object.__setattr__(self, "num_colors", num_colors)
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "distances", _frozen(euclidean_distances(coords, centers)))

    @property
    def n(self) -> int:
        return self.coordinates.shape[0]

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def color_counts(self) -> np.ndarray:
        return np.bincount(self.colors, minlength=self.num_colors)

    @property
    def population_ratios(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(int(c), self.n) for c in self.color_counts)

    def cost_matrix(self) -> np.ndarray:
        """d^p per point-center pair (d for k-center)."""
        return self.objective.point_costs(self.distances)

    def scaled_cost_matrix(self, scale: int = DEFAULT_COST_SCALE) -> np.ndarray:
        """Integer costs round(scale * d^p), ties to even; object dtype keeps them exact."""
        scaled = np.rint(self.cost_matrix() * scale)
        return np.array([[int(v) for v in row] for row in scaled], dtype=object)

    def with_objective(self, objective: Objective) -> "Instance":
        return Instance(self.coordinates, self.colors, self.centers, objective, self.num_colors, self.color_legend)


def _rational_matrix(rows, m: int, c: int, name: str) -> tuple[tuple[Fraction, ...], ...]:
    out = tuple(tuple(rational(v) for v in row) for row in rows)
    if len(out) != m or any(len(r) != c for r in out):
        raise ValueError(f"{name} must be {m} x {c}")
    for row in out:
        for v in row:
            if not 0 <= v <= 1:
                raise ValueError(f"{name} entries must lie in [0, 1], got {v}")
    return out


@dataclass(frozen=True)
class LabelConstraints:
    """Per-label color-proportion, size and center-count bounds.

    Rows are indexed by label, columns of the color bounds by color. Color bounds
    are stored as exact fractions.
    """

    color_lower: tuple[tuple[Fraction, ...], ...]
    color_upper: tuple[tuple[Fraction, ...], ...]
    size_lower: tuple[int, ...]
    size_upper: tuple[int, ...]
    center_lower: tuple[int, ...] | None = None
    center_upper: tuple[int, ...] | None = None

    def __post_init__(self):
        m = len(self.size_lower)
        if m < 1:
            raise ValueError("at least one label is required")
        c = len(self.color_lower[0]) if len(self.color_lower) else 0
        lo = _rational_matrix(self.color_lower, m, c, "color_lower")
        hi = _rational_matrix(self.color_upper, m, c, "color_upper")
        size_lo = tuple(int(v) for v in self.size_lower)
        size_hi = tuple(int(v) for v in self.size_upper)
        if len(size_hi) != m:
            raise ValueError("size bounds must have one entry per label")
        for L in range(m):
            if size_lo[L] < 0 or size_lo[L] > size_hi[L]:
                raise ValueError(f"label {L}: invalid size bounds [{size_lo[L]}, {size_hi[L]}]")
            for h in range(c):
                if lo[L][h] > hi[L][h]:
                    raise ValueError(f"label {L}, color {h}: lower bound exceeds upper bound")
        object.__setattr__(self, "color_lower", lo)
        object.__setattr__(self, "color_upper", hi)
        object.__setattr__(self, "size_lower", size_lo)
        object.__setattr__(self, "size_upper", size_hi)
        if (self.center_lower is None) != (self.center_upper is None):
            raise ValueError("center bounds must be given together")
        if self.center_lower is not None:
            c_lo = tuple(int(v) for v in self.center_lower)
            c_hi = tuple(int(v) for v in self.center_upper)
            if len(c_lo) != m or len(c_hi) != m:
                raise ValueError("center bounds must have one entry per label")
            if any(a < 0 or a > b for a, b in zip(c_lo, c_hi)):
                raise ValueError("invalid center bounds")
            object.__setattr__(self, "center_lower", c_lo)
            object.__setattr__(self, "center_upper", c_hi)

    @property
    def num_labels(self) -> int:
        return len(self.size_lower)

    @property
    def num_colors(self) -> int:
        return len(self.color_lower[0])

    @classmethod
    def unconstrained(cls, m: int, num_colors: int, n: int, k: int | None = None) -> "LabelConstraints":
        zeros = [[0] * num_colors for _ in range(m)]
        ones = [[1] * num_colors for _ in range(m)]
        centers = (None, None) if k is None else ((0,) * m, (k,) * m)
        return cls(zeros, ones, (0,) * m, (n,) * m, *centers)

    @classmethod
    def from_delta(cls, ratios: Sequence, delta, m: int = 2, n: int | None = None,
                   size_bounds=None, center_bounds=None) -> "LabelConstraints":
        """Bounds (1 - delta) r_h and (1 + delta) r_h, clipped to [0, 1], on every label."""
        delta = rational(delta)
        ratios = [rational(r) for r in ratios]
        lo = [max(Fraction(0), (1 - delta) * r) for r in ratios]
        hi = [min(Fraction(1), (1 + delta) * r) for r in ratios]
        if size_bounds is None:
            if n is None:
                raise ValueError("n is required when size bounds are omitted")
            size_bounds = [(0, n)] * m
        c_lo = c_hi = None
        if center_bounds is not None:
            c_lo = tuple(b[0] for b in center_bounds)
            c_hi = tuple(b[1] for b in center_bounds)
        return cls([lo] * m, [hi] * m, tuple(b[0] for b in size_bounds),
                   tuple(b[1] for b in size_bounds), c_lo, c_hi)

    def with_center_bounds(self, lower, upper) -> "LabelConstraints":
        return LabelConstraints(self.color_lower, self.color_upper, self.size_lower,
                                self.size_upper, tuple(lower), tuple(upper))

    def is_exact_preservation(self, ratios: Sequence[Fraction]) -> bool:
        return all(
            self.color_lower[L][h] == self.color_upper[L][h] == ratios[h]
            for L in range(self.num_labels)
            for h in range(self.num_colors)
        )


def _per_label(values, m: int, name: str) -> tuple[Fraction, ...]:
    if not isinstance(values, (list, tuple, np.ndarray)):
        values = [values] * m
    out = tuple(rational(v) for v in values)
    if len(out) != m:
        raise ValueError(f"{name} must have {m} entries")
    if any(v < 0 for v in out):
        raise ValueError(f"{name} entries must be non-negative")
    return out


@dataclass(frozen=True)
class ClpSpec:
    """Color-and-label-proportional constraints: label shares ``alpha`` with epsilon slack.

    ``eps_a``/``eps_a_prime`` are indexed ``[color][label]``; scalars broadcast.
    """

    alpha: tuple
    population_ratio: tuple
    eps_a: object = 0
    eps_a_prime: object = 0
    eps_b: object = 0
    eps_b_prime: object = 0
    eps_c: object = 0
    eps_c_prime: object = 0

    def __post_init__(self):
        alpha = tuple(rational(a) for a in self.alpha)
        ratios = tuple(rational(r) for r in self.population_ratio)
        m, c = len(alpha), len(ratios)
        if m < 1 or any(not 0 <= a <= 1 for a in alpha) or sum(alpha) != 1:
            raise ValueError(f"alpha must be a probability vector, got {self.alpha}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "population_ratio", ratios)
        for name in ("eps_a", "eps_a_prime"):
            raw = getattr(self, name)
            if isinstance(raw, (list, tuple, np.ndarray)):
                mat = tuple(_per_label(row, m, name) for row in raw)
                if len(mat) != c:
                    raise ValueError(f"{name} must have one row per color")
            else:
                mat = tuple(_per_label(raw, m, name) for _ in range(c))
            object.__setattr__(self, name, mat)
        for name in ("eps_b", "eps_b_prime", "eps_c", "eps_c_prime"):
            object.__setattr__(self, name, _per_label(getattr(self, name), m, name))

    @property
    def num_labels(self) -> int:
        return len(self.alpha)

    def to_label_constraints(self, n: int, k: int) -> LabelConstraints:
        m, c = self.num_labels, len(self.population_ratio)
        lo = [[max(Fraction(0), self.population_ratio[h] - self.eps_a[h][L]) for h in range(c)] for L in range(m)]
        hi = [[min(Fraction(1), self.population_ratio[h] + self.eps_a_prime[h][L]) for h in range(c)] for L in range(m)]
        size_lo = tuple(min(n, max(0, ceil_frac((a - e) * n))) for a, e in zip(self.alpha, self.eps_b))
        size_hi = tuple(min(n, max(0, floor_frac((a + e) * n))) for a, e in zip(self.alpha, self.eps_b_prime))
        # primed/unprimed center slacks follow the published constraint literally
        c_lo = tuple(min(k, max(0, ceil_frac((a - e) * k))) for a, e in zip(self.alpha, self.eps_c_prime))
        c_hi = tuple(min(k, max(0, floor_frac((a + e) * k))) for a, e in zip(self.alpha, self.eps_c))
        return LabelConstraints(lo, hi, size_lo, size_hi, c_lo, c_hi)


@dataclass(frozen=True, eq=False)
class Assignment:
    point_to_center: np.ndarray
    center_to_label: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point_to_center", _frozen(np.asarray(self.point_to_center, dtype=np.int64)))
        object.__setattr__(self, "center_to_label", _frozen(np.asarray(self.center_to_label, dtype=np.int64)))

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return (np.array_equal(self.point_to_center, other.point_to_center)
                and np.array_equal(self.center_to_label, other.center_to_label))

    def point_labels(self) -> np.ndarray:
        return self.center_to_label[self.point_to_center]

    def validate(self, instance: Instance) -> None:
        phi = self.point_to_center
        if phi.shape != (instance.n,):
            raise ValueError(f"assignment covers {phi.shape[0]} points, instance has {instance.n}")
        if phi.size and (phi.min() < 0 or phi.max() >= instance.k):
            raise ValueError("assignment refers to a center index out of range")
        if self.center_to_label.shape != (instance.k,):
            raise ValueError("center_to_label must have one entry per center")
        if self.center_to_label.min() < 0:
            raise ValueError("negative label index")


def objective_value(instance: Instance, assignment: Assignment) -> float:
    """Sum of d (k-median), sum of d^2 (k-means) or max d (k-center) under the assignment."""
    assignment.validate(instance)
    d = instance.distances[np.arange(instance.n), assignment.point_to_center]
    return instance.objective.aggregate(instance.objective.point_costs(d))


def scaled_objective(instance: Instance, assignment: Assignment, scale: int = DEFAULT_COST_SCALE) -> int:
    """Sum of the integer-scaled per-point costs; the quantity the flow solver minimizes."""
    assignment.validate(instance)
    costs = instance.cost_matrix()[np.arange(instance.n), assignment.point_to_center]
    return sum(int(v) for v in np.rint(costs * scale))


@dataclass(frozen=True)
class LabelTally:
    points: int
    by_color: tuple[int, ...]
    centers: int


def tallies(instance: Instance, assignment: Assignment, num_labels: int | None = None) -> list[LabelTally]:
    assignment.validate(instance)
    labels = assignment.center_to_label
    m = int(labels.max()) + 1 if num_labels is None else num_labels
    if labels.max() >= m:
        raise ValueError(f"label index {int(labels.max())} out of range for {m} labels")
    point_labels = labels[assignment.point_to_center]
    joint = np.zeros((m, instance.num_colors), dtype=np.int64)
    np.add.at(joint, (point_labels, instance.colors), 1)
    centers = np.bincount(labels, minlength=m)
    return [
        LabelTally(int(joint[L].sum()), tuple(int(v) for v in joint[L]), int(centers[L]))
        for L in range(m)
    ]
