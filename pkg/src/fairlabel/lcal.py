"""Labeled clustering with assigned labels.

Two routes to the optimum: a sweep over per-label point counts, each solved as a
min-cost flow (any number of labels, any proportions), and a sort-and-scan greedy
for two labels whose color bounds equal the population ratios.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from . import flow
from .evaluation import nearest_center, pof, violations
from .model import (
    DEFAULT_COST_SCALE,
    Assignment,
    Instance,
    LabelConstraints,
    Objective,
    ceil_frac,
    floor_frac,
    objective_value,
    scaled_objective,
)
from .results import INFEASIBLE, OPTIMAL, SolveReport

DEFAULT_MAX_LABELS = 3


def enumerate_distributions(n: int, m: int, constraints: LabelConstraints,
                            color_counts: Sequence[int] | None = None,
                            available: Sequence[bool] | None = None) -> Iterator[tuple[int, ...]]:
    """Yield every per-label point count (n_0, ..., n_{m-1}) summing to n that passes the size
    bounds and the color-counting conditions, in lexicographic order.

    ``available[L] = False`` forces n_L = 0 (a label without centers).
    """
    lo = list(constraints.size_lower)
    hi = [min(n, u) for u in constraints.size_upper]
    if available is not None:
        hi = [u if ok else 0 for u, ok in zip(hi, available)]
    C = constraints.num_colors

    def label_ok(L: int, n_l: int) -> bool:
        need = sum(ceil_frac(constraints.color_lower[L][h] * n_l) for h in range(C))
        room = sum(floor_frac(constraints.color_upper[L][h] * n_l) for h in range(C))
        return need <= n_l <= room

    def demand(L: int, n_l: int) -> list[int]:
        return [ceil_frac(constraints.color_lower[L][h] * n_l) for h in range(C)]

    def rec(L: int, remaining: int, prefix: tuple[int, ...], used: list[int]):
        if L == m - 1:
            if not lo[L] <= remaining <= hi[L] or not label_ok(L, remaining):
                return
            if color_counts is not None:
                d = demand(L, remaining)
                if any(used[h] + d[h] > color_counts[h] for h in range(C)):
                    return
            yield prefix + (remaining,)
            return
        rest_lo = sum(lo[L + 1:])
        rest_hi = sum(hi[L + 1:])
        for n_l in range(max(lo[L], remaining - rest_hi), min(hi[L], remaining - rest_lo) + 1):
            if not label_ok(L, n_l):
                continue
            nxt = used
            if color_counts is not None:
                d = demand(L, n_l)
                nxt = [u + x for u, x in zip(used, d)]
                if any(nxt[h] > color_counts[h] for h in range(C)):
                    continue
            yield from rec(L + 1, remaining - n_l, prefix + (n_l,), nxt)

    yield from rec(0, n, (), [0] * C)


@dataclass
class LcalNetwork:
    """Flow network for one distribution plus the point->center arc map used to decode it."""

    network: flow.FlowNetwork
    point_arcs: list[list[tuple[int, int]]]  # per point: (arc index, center index)

    def decode(self, arc_flow: Sequence[int]) -> np.ndarray:
        phi = np.full(len(self.point_arcs), -1, dtype=np.int64)
        for j, arcs in enumerate(self.point_arcs):
            for a, i in arcs:
                if arc_flow[a]:
                    phi[j] = i
                    break
        return phi


def _candidate_centers(instance: Instance, labels: np.ndarray, m: int, radius: float | None,
                       prune: bool) -> list[list[int]]:
    """Centers each point may use. With ``prune`` only the nearest center of each label is kept:
    inside a label the closest center is always at least as good, so the optimum is unchanged."""
    dist = instance.distances
    out = []
    if prune:
        members = [np.flatnonzero(labels == L) for L in range(m)]
        for j in range(instance.n):
            row = []
            for idx in members:
                if idx.size:
                    i = int(idx[np.argmin(dist[j, idx])])
                    if radius is None or dist[j, i] <= radius:
                        row.append(i)
            out.append(sorted(row))
    else:
        for j in range(instance.n):
            out.append([i for i in range(instance.k) if radius is None or dist[j, i] <= radius])
    return out


def build_lcal_network(instance: Instance, center_to_label, constraints: LabelConstraints,
                       distribution: Sequence[int], scale: int = DEFAULT_COST_SCALE,
                       radius: float | None = None, prune: bool = True,
                       _candidates=None, _scaled=None) -> LcalNetwork:
    """Layers: source -> points -> per-color center copies -> per-color label nodes -> labels -> sink.

    Point j only reaches the copies of color chi(j). Arc costs are the scaled d^p; with
    ``radius`` set the costs are zero and only arcs with d <= radius exist (k-center).
    Label-color node (L, h) has demand ceil(l n_L) and capacity floor(u n_L) toward L;
    label node L has demand n_L and capacity n_L toward the sink.
    """
    labels = np.asarray(center_to_label, dtype=np.int64)
    n, k, C, m = instance.n, instance.k, instance.num_colors, constraints.num_labels
    first_pt = 1
    first_copy = first_pt + n
    first_lc = first_copy + k * C
    first_label = first_lc + m * C
    sink = first_label + m
    net = flow.FlowNetwork(sink + 1, 0, sink)
    for j in range(n):
        net.add_arc(0, first_pt + j, 1)
    candidates = _candidates if _candidates is not None else _candidate_centers(instance, labels, m, radius, prune)
    scaled = None
    if radius is None:
        scaled = _scaled if _scaled is not None else instance.scaled_cost_matrix(scale)
    colors = instance.colors
    point_arcs = []
    for j in range(n):
        h = int(colors[j])
        row = []
        for i in candidates[j]:
            cost = 0 if scaled is None else scaled[j][i]
            row.append((net.add_arc(first_pt + j, first_copy + i * C + h, 1, cost), i))
        point_arcs.append(row)
    for i in range(k):
        for h in range(C):
            net.add_arc(first_copy + i * C + h, first_lc + int(labels[i]) * C + h, n)
    for L in range(m):
        n_l = int(distribution[L])
        for h in range(C):
            node = first_lc + L * C + h
            net.set_demand(node, ceil_frac(constraints.color_lower[L][h] * n_l))
            net.add_arc(node, first_label + L, floor_frac(constraints.color_upper[L][h] * n_l))
        net.set_demand(first_label + L, n_l)
        net.add_arc(first_label + L, sink, n_l)
    return LcalNetwork(net, point_arcs)


def _check_labels(instance: Instance, labels: np.ndarray, m: int) -> None:
    if labels.shape != (instance.k,):
        raise ValueError("center_to_label must have one entry per center")
    if labels.min() < 0 or labels.max() >= m:
        raise ValueError(f"center labels must lie in [0, {m})")


def _solve_one(args):
    instance, labels, constraints, dist, scale, candidates, scaled = args
    lnet = build_lcal_network(instance, labels, constraints, dist, scale,
                              _candidates=candidates, _scaled=scaled)
    res = flow.min_cost_max_flow(lnet.network)
    if res is None or res.value != instance.n:
        return None
    phi = lnet.decode(res.flow)
    return phi, res.total_cost


def _finish(instance: Instance, constraints: LabelConstraints, assignment: Assignment | None, method: str,
            start: float, scale: int, extra: dict | None = None) -> SolveReport:
    elapsed = (time.perf_counter() - start) * 1000
    if assignment is None:
        return SolveReport(INFEASIBLE, method, elapsed_ms=elapsed, extra=extra or {})
    cost = objective_value(instance, assignment)
    blind = objective_value(instance, nearest_center(instance, assignment.center_to_label))
    scaled = None if instance.objective is Objective.KCENTER else scaled_objective(instance, assignment, scale)
    return SolveReport(
        status=OPTIMAL,
        method=method,
        assignment=assignment,
        objective=cost,
        scaled_cost=scaled,
        pof=pof(cost, blind),
        violations=violations(instance, assignment, constraints),
        elapsed_ms=elapsed,
        extra=extra or {},
    )


def solve_lcal(instance: Instance, center_to_label, constraints: LabelConstraints,
               scale: int = DEFAULT_COST_SCALE, max_labels: int = DEFAULT_MAX_LABELS,
               workers: int = 1) -> SolveReport:
    """Exact LCAL by sweeping label distributions and solving one min-cost flow per distribution.

    k-center instances are delegated to :func:`solve_lcal_kcenter`. Among equal-cost
    optima the earliest distribution in lexicographic order wins.
    """
    if instance.objective is Objective.KCENTER:
        return solve_lcal_kcenter(instance, center_to_label, constraints, max_labels=max_labels)
    start = time.perf_counter()
    labels = np.asarray(center_to_label, dtype=np.int64)
    m = constraints.num_labels
    if m > max_labels:
        raise ValueError(f"{m} labels exceeds max_labels={max_labels}; the sweep has n^(m-1) distributions")
    if constraints.num_colors != instance.num_colors:
        raise ValueError("constraints and instance disagree on the number of colors")
    _check_labels(instance, labels, m)
    available = [bool((labels == L).any()) for L in range(m)]
    dists = list(enumerate_distributions(instance.n, m, constraints, instance.color_counts, available))
    candidates = _candidate_centers(instance, labels, m, None, True)
    scaled = instance.scaled_cost_matrix(scale)
    jobs = [(instance, labels, constraints, d, scale, candidates, scaled) for d in dists]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_one, jobs))
    else:
        results = [_solve_one(job) for job in jobs]
    best = None
    best_cost = math.inf
    best_dist = None
    for d, res in zip(dists, results):
        if res is None:
            continue
        phi, _ = res
        a = Assignment(phi, labels)
        cost = objective_value(instance, a)
        if cost < best_cost:
            best, best_cost, best_dist = a, cost, d
    extra = {"distributions_tried": len(dists), "distribution": best_dist}
    return _finish(instance, constraints, best, "lcal-flow", start, scale, extra)


def solve_lcal_kcenter(instance: Instance, center_to_label, constraints: LabelConstraints,
                       max_labels: int = DEFAULT_MAX_LABELS) -> SolveReport:
    """Smallest radius among the n*k point-center distances at which a feasible flow exists.

    Feasibility is monotone in the radius, so a binary search over the sorted distinct
    distances suffices; each probe runs a max-flow feasibility check per distribution.
    """
    start = time.perf_counter()
    if instance.objective is not Objective.KCENTER:
        instance = instance.with_objective(Objective.KCENTER)
    labels = np.asarray(center_to_label, dtype=np.int64)
    m = constraints.num_labels
    if m > max_labels:
        raise ValueError(f"{m} labels exceeds max_labels={max_labels}")
    _check_labels(instance, labels, m)
    available = [bool((labels == L).any()) for L in range(m)]
    dists = list(enumerate_distributions(instance.n, m, constraints, instance.color_counts, available))
    radii = np.unique(instance.distances)

    def witness(r: float, pool):
        candidates = _candidate_centers(instance, labels, m, r, True)
        for d in pool:
            lnet = build_lcal_network(instance, labels, constraints, d, radius=r, _candidates=candidates)
            arc_flow = flow.feasible_flow(lnet.network)
            if arc_flow is not None:
                return d, lnet.decode(arc_flow)
        return None

    top = float(radii[-1])
    candidates = _candidate_centers(instance, labels, m, top, True)
    # distributions infeasible at the largest radius stay infeasible at every radius
    alive = [d for d in dists if flow.max_flow_feasible(
        build_lcal_network(instance, labels, constraints, d, radius=top, _candidates=candidates).network)]
    extra = {"distributions_tried": len(dists)}
    if not alive:
        return _finish(instance, constraints, None, "lcal-kcenter-flow", start, 1, extra)
    lo, hi = 0, len(radii) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        r = float(radii[mid])
        cand = _candidate_centers(instance, labels, m, r, True)
        ok = any(flow.max_flow_feasible(
            build_lcal_network(instance, labels, constraints, d, radius=r, _candidates=cand).network)
            for d in alive)
        if ok:
            hi = mid
        else:
            lo = mid + 1
    radius = float(radii[lo])
    d, phi = witness(radius, alive)
    assignment = Assignment(phi, labels)
    extra.update({"distribution": d, "radius": radius})
    report = _finish(instance, constraints, assignment, "lcal-kcenter-flow", start, 1, extra)
    assert report.objective == radius
    return report


# --------------------------------------------------------------------------
# two labels, exact population proportions


@dataclass(frozen=True)
class DropTable:
    """Per-point distance to the nearest positive/negative center and the per-color drop order.

    ``positive_cost``/``negative_cost`` hold d^p (k-means uses squared distances).
    ``order[h]`` lists color-h point indices by drop descending, ties by index.
    """

    positive_cost: np.ndarray
    negative_cost: np.ndarray
    positive_center: np.ndarray
    negative_center: np.ndarray
    order: tuple[np.ndarray, ...]

    @property
    def drop(self) -> np.ndarray:
        return self.negative_cost - self.positive_cost

    def sorted_drops(self, h: int) -> np.ndarray:
        return self.drop[self.order[h]]


def compute_drops(instance: Instance, center_to_label, positive: int = 0, negative: int = 1) -> DropTable:
    labels = np.asarray(center_to_label, dtype=np.int64)
    pos_idx = np.flatnonzero(labels == positive)
    neg_idx = np.flatnonzero(labels == negative)
    if pos_idx.size == 0 or neg_idx.size == 0:
        raise ValueError("drops need at least one positive and one negative center")
    costs = instance.cost_matrix()
    pos_arg = np.argmin(costs[:, pos_idx], axis=1)
    neg_arg = np.argmin(costs[:, neg_idx], axis=1)
    rows = np.arange(instance.n)
    p_cost = costs[rows, pos_idx[pos_arg]]
    n_cost = costs[rows, neg_idx[neg_arg]]
    drop = n_cost - p_cost
    order = []
    for h in range(instance.num_colors):
        idx = np.flatnonzero(instance.colors == h)
        order.append(idx[np.lexsort((idx, -drop[idx]))])
    return DropTable(p_cost, n_cost, pos_idx[pos_arg], neg_idx[neg_arg], tuple(order))


@dataclass(frozen=True)
class AtomicUnit:
    """Smallest point multiset with exactly the population color mix.

    ``multiplicity`` is the gcd of the color counts, i.e. how many units make up all n points.
    """

    n_fair: int
    per_color: tuple[int, ...]
    multiplicity: int

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "AtomicUnit":
        counts = [int(c) for c in counts]
        g = reduce(math.gcd, counts)
        return cls(sum(counts) // g, tuple(c // g for c in counts), g)


def _assignment_for(drops: DropTable, unit: AtomicUnit, units_moved: int, labels: np.ndarray) -> Assignment:
    phi = drops.negative_center.copy()
    for h, a in enumerate(unit.per_color):
        moved = drops.order[h][: units_moved * a]
        phi[moved] = drops.positive_center[moved]
    return Assignment(phi, labels)


def solve_two_label_exact(instance: Instance, center_to_label, constraints: LabelConstraints,
                          positive: int = 0, scale: int = DEFAULT_COST_SCALE) -> SolveReport:
    """Greedy optimum for two labels when every color bound equals the population ratio.

    Starts with every point on its nearest negative center, moves the fewest atomic units
    needed by the size bounds, then keeps moving the unit with the largest total drop
    while that strictly lowers the cost and the bounds allow it.
    """
    start = time.perf_counter()
    if constraints.num_labels != 2:
        raise ValueError("the greedy solver handles exactly two labels")
    if instance.objective is Objective.KCENTER:
        raise ValueError("the greedy solver supports k-median and k-means only")
    if not constraints.is_exact_preservation(instance.population_ratios):
        raise ValueError("color bounds must equal the population ratios on both labels")
    labels = np.asarray(center_to_label, dtype=np.int64)
    _check_labels(instance, labels, 2)
    negative = 1 - positive
    drops = compute_drops(instance, labels, positive, negative)
    unit = AtomicUnit.from_counts(instance.color_counts)
    total_units = unit.multiplicity
    nf = unit.n_fair
    n = instance.n
    # size bounds tightened to multiples of the atomic unit, expressed in units moved to positive
    pos_lo = -(-constraints.size_lower[positive] // nf)
    pos_hi = constraints.size_upper[positive] // nf
    neg_lo = -(-constraints.size_lower[negative] // nf)
    neg_hi = constraints.size_upper[negative] // nf
    c_lo = max(pos_lo, total_units - neg_hi, 0)
    c_hi = min(pos_hi, total_units - neg_lo, total_units)
    extra = {"n_fair": nf, "n_fair_per_color": list(unit.per_color)}
    if c_lo > c_hi:
        return _finish(instance, constraints, None, "two-label-greedy", start, scale, extra)
    sorted_drops = [drops.sorted_drops(h) for h in range(instance.num_colors)]
    c = c_lo
    while c < c_hi:
        gain = 0.0
        for h, a in enumerate(unit.per_color):
            gain += float(sorted_drops[h][c * a:(c + 1) * a].sum())
        if gain <= 0:
            break
        c += 1
    extra["positive_count"] = c * nf
    assignment = _assignment_for(drops, unit, c, labels)
    assert np.bincount(assignment.point_labels(), minlength=2)[positive] == c * nf <= n
    return _finish(instance, constraints, assignment, "two-label-greedy", start, scale, extra)


class TradeoffPoint(NamedTuple):
    positive_count: int
    cost: float
    scaled_cost: int


def tradeoff_curve(instance: Instance, center_to_label, positive: int = 0,
                   scale: int = DEFAULT_COST_SCALE) -> list[TradeoffPoint]:
    """Optimal exact-preservation cost at every positive-label size that is a multiple of n_fair.

    One pass of prefix sums over the sorted drop lists.
    """
    if instance.objective is Objective.KCENTER:
        raise ValueError("the trade-off curve is defined for k-median and k-means")
    labels = np.asarray(center_to_label, dtype=np.int64)
    drops = compute_drops(instance, labels, positive, 1 - positive)
    unit = AtomicUnit.from_counts(instance.color_counts)
    total_units = unit.multiplicity
    p_scaled = [int(v) for v in np.rint(drops.positive_cost * scale)]
    n_scaled = [int(v) for v in np.rint(drops.negative_cost * scale)]
    base = math.fsum(drops.negative_cost.tolist())
    base_scaled = sum(n_scaled)
    float_prefix = []
    scaled_prefix = []
    for h, a in enumerate(unit.per_color):
        ordered = drops.order[h]
        float_prefix.append(np.concatenate(([0.0], np.cumsum(drops.drop[ordered]))))
        # integer drops get their own order so the scaled column is exact, not float-ordered
        scaled_drops = sorted((n_scaled[j] - p_scaled[j] for j in ordered.tolist()), reverse=True)
        sp = [0]
        for d in scaled_drops:
            sp.append(sp[-1] + d)
        scaled_prefix.append(sp)
    curve = []
    for c in range(total_units + 1):
        gain = sum(float(float_prefix[h][c * a]) for h, a in enumerate(unit.per_color))
        gain_scaled = sum(scaled_prefix[h][c * a] for h, a in enumerate(unit.per_color))
        curve.append(TradeoffPoint(c * unit.n_fair, base - gain, base_scaled - gain_scaled))
    return curve
