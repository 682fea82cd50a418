"""Baselines, violation metrics, price of fairness and brute-force oracles."""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import flow
from .model import (
    DEFAULT_COST_SCALE,
    Assignment,
    ClpSpec,
    Instance,
    LabelConstraints,
    Objective,
    ceil_frac,
    floor_frac,
    objective_value,
    rational,
    scaled_objective,
    tallies,
)
from .results import HEURISTIC, ViolationReport, SolveReport
from .rng import make_rng

BRUTE_FORCE_BUDGET = 10**7


def pof(fair_cost: float, color_blind_cost: float) -> float | None:
    """Price of fairness; ``None`` when the color-blind cost is zero."""
    if color_blind_cost == 0:
        return None
    return fair_cost / color_blind_cost


def nearest_center(instance: Instance, center_to_label=None) -> Assignment:
    """Every point to its closest center, ties to the lowest center index."""
    labels = np.zeros(instance.k, dtype=np.int64) if center_to_label is None else center_to_label
    return Assignment(np.argmin(instance.distances, axis=1), labels)


def ncra(instance: Instance, alpha: Sequence, seed: int) -> Assignment:
    """Nearest-center assignment with an independent label draw per center."""
    probs = np.array([float(rational(a)) for a in alpha])
    cumulative = np.cumsum(probs)
    cumulative[-1] = 1.0
    draws = make_rng(seed).random(instance.k)
    labels = np.searchsorted(cumulative, draws, side="right")
    # zero-probability labels are never drawn, even at a cumulative plateau
    labels = np.minimum(labels, len(probs) - 1)
    return nearest_center(instance, labels)


def _excess(value: Fraction, lo: Fraction, hi: Fraction) -> Fraction:
    return max(Fraction(0), lo - value, value - hi)


def violations(instance: Instance, assignment: Assignment,
               constraints: LabelConstraints | None = None, clp: ClpSpec | None = None) -> ViolationReport:
    """Smallest additive relaxation of each constraint family under which the assignment is feasible.

    Absolute size/center bounds are normalized by n and k. Empty labels contribute
    no color violation.
    """
    if (constraints is None) == (clp is None):
        raise ValueError("pass exactly one of constraints or clp")
    m = constraints.num_labels if constraints is not None else clp.num_labels
    tal = tallies(instance, assignment, m)
    n, k = instance.n, instance.k
    color_rows, point_rows, center_rows = [], [], []
    for L, t in enumerate(tal):
        row = []
        for h in range(instance.num_colors):
            if clp is not None:
                lo = clp.population_ratio[h] - clp.eps_a[h][L]
                hi = clp.population_ratio[h] + clp.eps_a_prime[h][L]
            else:
                lo, hi = constraints.color_lower[L][h], constraints.color_upper[L][h]
            row.append(float(_excess(Fraction(t.by_color[h], t.points), lo, hi)) if t.points else 0.0)
        color_rows.append(tuple(row))
        if clp is not None:
            a = clp.alpha[L]
            point_rows.append(float(_excess(Fraction(t.points, n), a - clp.eps_b[L], a + clp.eps_b_prime[L])))
            center_rows.append(float(_excess(Fraction(t.centers, k), a - clp.eps_c_prime[L], a + clp.eps_c[L])))
        else:
            point_rows.append(float(_excess(Fraction(t.points), Fraction(constraints.size_lower[L]),
                                            Fraction(constraints.size_upper[L])) / n))
            if constraints.center_lower is None:
                center_rows.append(0.0)
            else:
                center_rows.append(float(_excess(Fraction(t.centers), Fraction(constraints.center_lower[L]),
                                                 Fraction(constraints.center_upper[L])) / k))
    return ViolationReport(
        delta_color=max(max(r) if r else 0.0 for r in color_rows),
        delta_points=max(point_rows),
        delta_centers=max(center_rows),
        per_label_color=tuple(color_rows),
        per_label_points=tuple(point_rows),
        per_label_centers=tuple(center_rows),
    )


# --------------------------------------------------------------------------
# per-cluster proportionality heuristic (stand-in for a fair clustering baseline)


LP_THRESHOLD = 20_000


def _quotas(sizes: np.ndarray, lo, hi, C: int) -> list[list[tuple[int, int]]] | None:
    out = []
    for s in sizes.tolist():
        row = [(ceil_frac(lo[h] * s), floor_frac(hi[h] * s)) for h in range(C)]
        if any(a > b for a, b in row):
            return None
        out.append(row)
    return out


def _quota_flow(instance: Instance, sizes: np.ndarray, quotas, scale: int) -> np.ndarray | None:
    C, n, k = instance.num_colors, instance.n, instance.k
    costs = instance.scaled_cost_matrix(scale)
    # source, points, (cluster, color) nodes, clusters, sink
    src, first_pt = 0, 1
    first_cc = first_pt + n
    first_cl = first_cc + k * C
    sink = first_cl + k
    net = flow.FlowNetwork(sink + 1, src, sink)
    for j in range(n):
        net.add_arc(src, first_pt + j, 1)
    point_arcs = []
    for j in range(n):
        h = int(instance.colors[j])
        point_arcs.append([net.add_arc(first_pt + j, first_cc + i * C + h, 1, costs[j][i]) for i in range(k)])
    for i in range(k):
        for h, (q_lo, q_hi) in enumerate(quotas[i]):
            net.add_arc(first_cc + i * C + h, first_cl + i, q_hi, 0, q_lo)
        net.add_arc(first_cl + i, sink, int(sizes[i]), 0, int(sizes[i]))
    result = flow.min_cost_max_flow(net)
    if result is None or result.value != n:
        return None
    phi = np.empty(n, dtype=np.int64)
    for j in range(n):
        phi[j] = next(i for i, a in enumerate(point_arcs[j]) if result.flow[a])
    return phi


def _quota_lp(instance: Instance, sizes: np.ndarray, quotas) -> np.ndarray | None:
    # point rows and (cluster, color) rows nested in cluster rows: two laminar families,
    # so the matrix is totally unimodular and a simplex vertex is integral
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix, vstack

    C, n, k = instance.num_colors, instance.n, instance.k
    var = np.arange(n * k)
    pts = np.repeat(np.arange(n), k)
    cls = np.tile(np.arange(k), n)
    ones = np.ones(n * k)
    point_rows = csr_matrix((ones, (pts, var)), shape=(n, n * k))
    cluster_rows = csr_matrix((ones, (cls, var)), shape=(k, n * k))
    cc = cls * C + instance.colors[pts]
    cc_rows = csr_matrix((ones, (cc, var)), shape=(k * C, n * k))
    q_lo = np.array([q[0] for row in quotas for q in row], dtype=np.float64)
    q_hi = np.array([q[1] for row in quotas for q in row], dtype=np.float64)
    res = linprog(
        instance.cost_matrix().ravel(),
        A_ub=vstack([cc_rows, -cc_rows]).tocsr(),
        b_ub=np.concatenate([q_hi, -q_lo]),
        A_eq=vstack([point_rows, cluster_rows]).tocsr(),
        b_eq=np.concatenate([np.ones(n), sizes.astype(np.float64)]),
        bounds=(0, 1),
        method="highs-ds",
    )
    if res.status != 0:
        return None
    x = res.x.reshape(n, k)
    phi = np.argmax(x, axis=1)
    if not np.allclose(x[np.arange(n), phi], 1.0, atol=1e-6):
        return None
    return phi.astype(np.int64)


def per_cluster_quota_baseline(instance: Instance, color_lower: Sequence, color_upper: Sequence,
                               center_to_label=None, constraints: LabelConstraints | None = None,
                               scale: int = DEFAULT_COST_SCALE, backend: str = "auto") -> SolveReport:
    """Reassign points so every cluster keeps its nearest-assignment size and meets color quotas.

    Cluster i of size s_i must hold between ceil(l_h s_i) and floor(u_h s_i) points of
    color h. Not a published algorithm: a heuristic stand-in, and always reported as
    such. Falls back to the nearest assignment when the quotas are infeasible.

    ``backend`` is "flow" (exact integer costs), "lp" (HiGHS dual simplex, for large
    instances) or "auto", which picks the LP once n*k exceeds ``LP_THRESHOLD``.
    """
    start = time.perf_counter()
    if backend == "auto":
        backend = "lp" if instance.n * instance.k > LP_THRESHOLD else "flow"
    if backend not in ("flow", "lp"):
        raise ValueError(f"unknown backend {backend!r}")
    lo = [rational(v) for v in color_lower]
    hi = [rational(v) for v in color_upper]
    labels = np.zeros(instance.k, dtype=np.int64) if center_to_label is None else np.asarray(center_to_label)
    nearest = nearest_center(instance, labels)
    sizes = np.bincount(nearest.point_to_center, minlength=instance.k)
    quotas = _quotas(sizes, lo, hi, instance.num_colors)
    phi = None
    if quotas is not None:
        phi = _quota_flow(instance, sizes, quotas, scale) if backend == "flow" else _quota_lp(instance, sizes, quotas)
    flags = ["HEURISTIC: per-cluster quota stand-in, not a published fair clustering algorithm"]
    if phi is None:
        assignment = nearest
        flags.append("quota flow infeasible; fell back to nearest-center assignment")
    else:
        assignment = Assignment(phi, labels)
    residual = _cluster_color_residual(instance, assignment, lo, hi)
    cost = objective_value(instance, assignment)
    blind = objective_value(instance, nearest)
    return SolveReport(
        status=HEURISTIC,
        method="per-cluster-quota",
        assignment=assignment,
        objective=cost,
        scaled_cost=scaled_objective(instance, assignment, scale),
        pof=pof(cost, blind),
        violations=violations(instance, assignment, constraints) if constraints is not None else None,
        elapsed_ms=(time.perf_counter() - start) * 1000,
        flags=flags,
        extra={"cluster_delta_color": residual, "backend": backend},
    )


def _cluster_color_residual(instance: Instance, assignment: Assignment, lo, hi) -> float:
    worst = Fraction(0)
    for i in range(instance.k):
        members = instance.colors[assignment.point_to_center == i]
        if members.size == 0:
            continue
        counts = np.bincount(members, minlength=instance.num_colors)
        for h in range(instance.num_colors):
            worst = max(worst, _excess(Fraction(int(counts[h]), members.size), lo[h], hi[h]))
    return float(worst)


# --------------------------------------------------------------------------
# exhaustive oracles


@dataclass(frozen=True)
class BruteForceResult:
    """Exact optimum over all assignments. For sum objectives ``objective`` is the
    minimum float cost and ``scaled_cost`` the minimum integer-scaled cost (taken
    independently); for k-center ``scaled_cost`` is ``None``."""

    objective: float
    scaled_cost: int | None
    assignment: Assignment


def _assignment_chunks(n: int, k: int, chunk: int = 1 << 15):
    total = k ** n
    powers = k ** np.arange(n, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        yield (idx[:, None] // powers[None, :]) % k


def _feasible_rows(point_labels: np.ndarray, colors: np.ndarray, constraints: LabelConstraints) -> np.ndarray:
    ok = np.ones(point_labels.shape[0], dtype=bool)
    for L in range(constraints.num_labels):
        in_label = point_labels == L
        n_l = in_label.sum(axis=1)
        ok &= (n_l >= constraints.size_lower[L]) & (n_l <= constraints.size_upper[L])
        for h in range(constraints.num_colors):
            cnt = (in_label & (colors[None, :] == h)).sum(axis=1)
            lo, hi = constraints.color_lower[L][h], constraints.color_upper[L][h]
            ok &= cnt * lo.denominator >= lo.numerator * n_l
            ok &= cnt * hi.denominator <= hi.numerator * n_l
    return ok


def _brute_force_fixed_labels(instance: Instance, labels: np.ndarray, constraints: LabelConstraints,
                              scale: int) -> BruteForceResult | None:
    n, k = instance.n, instance.k
    colors = np.asarray(instance.colors)
    dist = instance.distances
    kcenter = instance.objective is Objective.KCENTER
    costs = instance.cost_matrix()
    scaled = np.rint(costs * scale)
    if not kcenter and scaled.max(initial=0) * n >= 2**62:
        raise ValueError("scaled costs too large for the brute-force oracle")
    scaled = scaled.astype(np.int64)
    rows = np.arange(n)
    best_obj = best_scaled = None
    best_phi = None
    for phi in _assignment_chunks(n, k):
        ok = _feasible_rows(labels[phi], colors, constraints)
        if not ok.any():
            continue
        phi = phi[ok]
        if kcenter:
            obj = dist[rows[None, :], phi].max(axis=1)
        else:
            obj = costs[rows[None, :], phi].sum(axis=1)
            sc = scaled[rows[None, :], phi].sum(axis=1)
            j = int(np.argmin(sc))
            if best_scaled is None or sc[j] < best_scaled:
                best_scaled = int(sc[j])
        j = int(np.argmin(obj))
        if best_obj is None or obj[j] < best_obj:
            best_obj = float(obj[j])
            best_phi = phi[j].copy()
    if best_phi is None:
        return None
    return BruteForceResult(best_obj, None if kcenter else best_scaled, Assignment(best_phi, labels))


def brute_force_lcal(instance: Instance, center_to_label, constraints: LabelConstraints,
                     scale: int = DEFAULT_COST_SCALE, budget: int = BRUTE_FORCE_BUDGET) -> BruteForceResult | None:
    """Exhaustive search over all k^n assignments with the center labels fixed; ``None`` if infeasible."""
    if instance.k ** instance.n > budget:
        raise ValueError(f"k^n = {instance.k ** instance.n} exceeds the brute-force budget {budget}")
    labels = np.asarray(center_to_label, dtype=np.int64)
    return _brute_force_fixed_labels(instance, labels, constraints, scale)


def brute_force_lcul(instance: Instance, constraints: LabelConstraints,
                     scale: int = DEFAULT_COST_SCALE, budget: int = BRUTE_FORCE_BUDGET) -> BruteForceResult | None:
    """Exhaustive search over all labelings and assignments."""
    m, k, n = constraints.num_labels, instance.k, instance.n
    if m ** k * k ** n > budget:
        raise ValueError(f"m^k * k^n = {m ** k * k ** n} exceeds the brute-force budget {budget}")
    best = None
    best_scaled = None
    for code in range(m ** k):
        labels = np.array([(code // m ** i) % m for i in range(k)], dtype=np.int64)
        if constraints.center_lower is not None:
            counts = np.bincount(labels, minlength=m)
            if any(counts[L] < constraints.center_lower[L] or counts[L] > constraints.center_upper[L]
                   for L in range(m)):
                continue
        res = _brute_force_fixed_labels(instance, labels, constraints, scale)
        if res is None:
            continue
        if best is None or res.objective < best.objective:
            best = res
        if res.scaled_cost is not None and (best_scaled is None or res.scaled_cost < best_scaled):
            best_scaled = res.scaled_cost
    if best is None:
        return None
    return BruteForceResult(best.objective, best_scaled, best.assignment)
