"""Labeled clustering with unassigned labels: center labels are decision variables too."""

from __future__ import annotations

import time
from typing import Sequence

import numpy as np

from .evaluation import nearest_center, pof, violations
from .lcal import DEFAULT_MAX_LABELS, solve_lcal, solve_lcal_kcenter
from .model import (
    DEFAULT_COST_SCALE,
    Assignment,
    ClpSpec,
    Instance,
    LabelConstraints,
    Objective,
    objective_value,
    scaled_objective,
)
from .results import INFEASIBLE, OPTIMAL, RANDOMIZED, SolveReport
from .rng import make_rng

FPT_BUDGET = 10**6
_EPS = 1e-9


def _snap(x: float) -> float:
    if x < _EPS:
        return 0.0
    if x > 1 - _EPS:
        return 1.0
    return x


def _find_cycle_or_path(adj: list[set[int]], start: int) -> list[int]:
    """Walk fractional edges from ``start``; return a cycle's nodes (closed, first == last)
    or, when the walk dead-ends, a maximal path between two degree-one nodes."""

    def walk(origin: int) -> list[int]:
        path = [origin]
        pos = {origin: 0}
        prev = -1
        while True:
            u = path[-1]
            nxt = min((v for v in adj[u] if v != prev), default=None)
            if nxt is None:
                return path
            if nxt in pos:
                return path[pos[nxt]:] + [nxt]
            pos[nxt] = len(path)
            path.append(nxt)
            prev = u

    path = walk(start)
    if path[0] == path[-1] and len(path) > 1:
        return path
    # dead end: restart from that end; the walk ends in a cycle or at another dead end
    return walk(path[-1])


def dependent_round(pi: np.ndarray, seed: int | None = None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Round a fractional center-to-label matrix (rows sum to 1) to one label per center.

    Bipartite dependent rounding: each round takes a cycle (preferred) or a maximal
    path of fractional entries, splits it into two alternating matchings and shifts
    mass between them with the probabilities that keep every entry's expectation.
    Each center ends with exactly one label and every label count lies between the
    floor and ceiling of its column sum.
    """
    x = np.array(pi, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("pi must be a k x m matrix")
    k, m = x.shape
    if np.any(x < -_EPS) or np.any(x > 1 + _EPS):
        raise ValueError("pi entries must lie in [0, 1]")
    if np.any(np.abs(x.sum(axis=1) - 1) > 1e-12 * max(m, 1) + 1e-15):
        raise ValueError("each row of pi must sum to 1")
    if rng is None:
        rng = make_rng(0 if seed is None else seed)
    x = np.vectorize(_snap)(x)
    # nodes 0..k-1 are centers, k..k+m-1 are labels
    adj: list[set[int]] = [set() for _ in range(k + m)]
    for i in range(k):
        for L in range(m):
            if 0 < x[i, L] < 1:
                adj[i].add(k + L)
                adj[k + L].add(i)

    def val(u: int, v: int) -> float:
        return x[u, v - k] if u < k else x[v, u - k]

    def put(u: int, v: int, value: float) -> None:
        i, L = (u, v - k) if u < k else (v, u - k)
        value = _snap(value)
        x[i, L] = value
        if value in (0.0, 1.0):
            adj[i].discard(k + L)
            adj[k + L].discard(i)

    while True:
        start = next((u for u in range(k + m) if adj[u]), None)
        if start is None:
            break
        nodes = _find_cycle_or_path(adj, start)
        edges = list(zip(nodes[:-1], nodes[1:]))
        first, second = edges[0::2], edges[1::2]
        # raising ``first`` and lowering ``second`` by a, or the reverse by b
        a = min(min(1 - val(*e) for e in first), min((val(*e) for e in second), default=np.inf))
        b = min(min(val(*e) for e in first), min((1 - val(*e) for e in second), default=np.inf))
        if rng.random() < b / (a + b):
            up, down, step = first, second, a
        else:
            up, down, step = second, first, b
        for e in up:
            put(*e, val(*e) + step)
        for e in down:
            put(*e, val(*e) - step)
    labels = np.argmax(x, axis=1)
    if not np.all(np.isin(x, (0.0, 1.0))):
        raise RuntimeError("dependent rounding left fractional entries")
    return labels.astype(np.int64)


def solve_lcul_randomized(instance: Instance, clp: ClpSpec, seed: int, scale: int = DEFAULT_COST_SCALE) -> SolveReport:
    """Nearest-center assignment plus center labels drawn by dependent rounding of pi[i][L] = alpha_L.

    The cost is the unconstrained optimum in every run; the proportionality and size
    constraints hold in expectation and each label's center count is within one of alpha_L k.
    """
    start = time.perf_counter()
    nearest = nearest_center(instance)
    pi = np.tile(np.array([float(a) for a in clp.alpha]), (instance.k, 1))
    labels = dependent_round(pi, seed)
    assignment = Assignment(nearest.point_to_center, labels)
    cost = objective_value(instance, assignment)
    scaled = None if instance.objective is Objective.KCENTER else scaled_objective(instance, assignment, scale)
    report = SolveReport(
        status=RANDOMIZED,
        method="lcul-dependent-rounding",
        assignment=assignment,
        objective=cost,
        scaled_cost=scaled,
        pof=pof(cost, cost) if cost else None,
        violations=violations(instance, assignment, clp=clp),
        elapsed_ms=(time.perf_counter() - start) * 1000,
        seed=seed,
    )
    return report


def _labelings(k: int, m: int, c_lo: Sequence[int], c_hi: Sequence[int]):
    """Center labelings in lexicographic order, pruned on the running center counts."""
    counts = [0] * m
    labels = [0] * k

    def rec(i: int):
        if i == k:
            yield tuple(labels)
            return
        remaining = k - i - 1
        for L in range(m):
            if counts[L] + 1 > c_hi[L]:
                continue
            counts[L] += 1
            need = sum(max(0, c_lo[M] - counts[M]) for M in range(m))
            if need <= remaining:
                labels[i] = L
                yield from rec(i + 1)
            counts[L] -= 1

    yield from rec(0)


def solve_lcul_exact_fpt(instance: Instance, constraints: LabelConstraints, scale: int = DEFAULT_COST_SCALE,
                         budget: int = FPT_BUDGET, max_labels: int = DEFAULT_MAX_LABELS) -> SolveReport:
    """Exact LCUL: try every center labeling allowed by the center-count bounds, solve each as LCAL."""
    start = time.perf_counter()
    m, k = constraints.num_labels, instance.k
    if m ** k > budget:
        raise ValueError(f"m^k = {m ** k} labelings exceeds the budget {budget}")
    c_lo = constraints.center_lower or (0,) * m
    c_hi = constraints.center_upper or (k,) * m
    best: SolveReport | None = None
    tried = 0
    for labels in _labelings(k, m, c_lo, c_hi):
        tried += 1
        if instance.objective is Objective.KCENTER:
            rep = solve_lcal_kcenter(instance, labels, constraints, max_labels=max_labels)
        else:
            rep = solve_lcal(instance, labels, constraints, scale=scale, max_labels=max_labels)
        if rep.feasible and (best is None or rep.objective < best.objective):
            best = rep
    elapsed = (time.perf_counter() - start) * 1000
    extra = {"labelings_tried": tried}
    if best is None:
        return SolveReport(INFEASIBLE, "lcul-fpt", elapsed_ms=elapsed, extra=extra)
    blind = objective_value(instance, nearest_center(instance))
    best.extra = {**extra, **best.extra}
    best.method = "lcul-fpt"
    best.pof = pof(best.objective, blind)
    best.violations = violations(instance, best.assignment, constraints)
    best.elapsed_ms = elapsed
    return best


def _nearest_report(instance: Instance, labels, constraints: LabelConstraints, method: str,
                    start: float, flags: list[str], scale: int) -> SolveReport:
    assignment = nearest_center(instance, np.asarray(labels, dtype=np.int64))
    cost = objective_value(instance, assignment)
    scaled = None if instance.objective is Objective.KCENTER else scaled_objective(instance, assignment, scale)
    return SolveReport(
        status=OPTIMAL,
        method=method,
        assignment=assignment,
        objective=cost,
        scaled_cost=scaled,
        pof=pof(cost, cost) if cost else None,
        violations=violations(instance, assignment, constraints),
        elapsed_ms=(time.perf_counter() - start) * 1000,
        flags=flags,
    )


def solve_lcul_color_only(instance: Instance, constraints: LabelConstraints,
                          scale: int = DEFAULT_COST_SCALE) -> SolveReport:
    """Only color-proportion bounds active: nearest assignment, every center on one label L*
    whose bounds admit the population ratios.

    When no label admits them the nearest assignment is still returned (on label 0) with
    status infeasible and a flag; this method cannot decide such instances.
    """
    start = time.perf_counter()
    ratios = instance.population_ratios
    chosen = next((L for L in range(constraints.num_labels)
                   if all(constraints.color_lower[L][h] <= ratios[h] <= constraints.color_upper[L][h]
                          for h in range(instance.num_colors))), None)
    if chosen is None:
        rep = _nearest_report(instance, [0] * instance.k, constraints, "lcul-color-only", start,
                              ["no label admits the population ratios; infeasible by this method"], scale)
        rep.status = INFEASIBLE
        return rep
    rep = _nearest_report(instance, [chosen] * instance.k, constraints, "lcul-color-only", start, [], scale)
    rep.extra = {"label": chosen}
    return rep


def solve_lcul_centercount_only(instance: Instance, constraints: LabelConstraints,
                                scale: int = DEFAULT_COST_SCALE) -> SolveReport:
    """Only center-count bounds active: nearest assignment; each label first gets its lower
    bound of centers (lowest indices first), the rest go to labels below their upper bound."""
    start = time.perf_counter()
    m, k = constraints.num_labels, instance.k
    if constraints.center_lower is None:
        raise ValueError("center-count bounds are required")
    c_lo, c_hi = constraints.center_lower, constraints.center_upper
    if sum(c_lo) > k or sum(c_hi) < k:
        return SolveReport(INFEASIBLE, "lcul-centercount-only", elapsed_ms=(time.perf_counter() - start) * 1000)
    labels = []
    counts = [0] * m
    for L in range(m):
        labels += [L] * c_lo[L]
        counts[L] = c_lo[L]
    L = 0
    while len(labels) < k:
        while counts[L] >= c_hi[L]:
            L += 1
        labels.append(L)
        counts[L] += 1
    return _nearest_report(instance, labels, constraints, "lcul-centercount-only", start, [], scale)

