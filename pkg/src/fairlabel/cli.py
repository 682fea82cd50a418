"""Command-line entry point: solve, compare against baselines, benchmark and self-check."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import re
import sys
import time
from importlib import resources
from pathlib import Path
from statistics import fmean

import jsonschema
import numpy as np

from .data import DatasetSpec, IngestionError, PointSet, SyntheticSpec, kmeanspp_centers, load_dataset, synthesize
from .evaluation import (
    brute_force_lcal,
    brute_force_lcul,
    ncra,
    nearest_center,
    per_cluster_quota_baseline,
    pof,
    violations,
)
from .lcal import solve_lcal, solve_lcal_kcenter, solve_two_label_exact, tradeoff_curve
from .lcul import solve_lcul_exact_fpt, solve_lcul_randomized
from .model import (
    DEFAULT_COST_SCALE,
    Assignment,
    ClpSpec,
    Instance,
    LabelConstraints,
    Objective,
    objective_value,
    rational,
    scaled_objective,
)
from .rng import make_rng

log = logging.getLogger("fairlabel")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
BENCH_TARGET_MS = 90_000
DEFAULT_SIZES = "10000,50000,100000,200000,500000"

_NUM = {"type": ["number", "null"]}
_VIOLATIONS = {
    "type": ["object", "null"],
    "required": ["delta_color", "delta_points_per_label", "delta_centers_per_label"],
    "properties": {
        "delta_color": {"type": "number", "minimum": 0},
        "delta_points_per_label": {"type": "number", "minimum": 0},
        "delta_centers_per_label": {"type": "number", "minimum": 0},
    },
}
_SOLVE = {
    "type": "object",
    "required": ["status", "method", "objective", "pof", "violations", "elapsed_ms", "flags"],
    "properties": {
        "status": {"enum": ["optimal", "infeasible", "randomized", "heuristic"]},
        "method": {"type": "string"},
        "objective": _NUM,
        "scaled_cost": {"type": ["integer", "null"]},
        "pof": _NUM,
        "violations": _VIOLATIONS,
        "elapsed_ms": {"type": "number", "minimum": 0},
        "flags": {"type": "array", "items": {"type": "string"}},
    },
}


def _requires(command: str, *keys: str) -> dict:
    return {"if": {"properties": {"command": {"const": command}}}, "then": {"required": list(keys)}}


REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "command", "status", "config", "rows"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": ["solve-lcal", "solve-lcul", "tradeoff", "bench", "oracle"]},
        "status": {"enum": ["ok", "infeasible", "mismatch"]},
        "config": {"type": "object"},
        "rows": {"type": "array", "items": {"type": "object"}},
        "instance": {
            "type": "object",
            "required": ["n", "k", "num_colors", "color_counts", "objective"],
        },
        "path": {"type": "string"},
        "result": _SOLVE,
        "nearest": {"type": "object", "required": ["objective", "violations"]},
        "summary": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {"type": "object", "required": ["name", "expected", "observed", "ok"]},
        },
    },
    "allOf": [
        _requires("solve-lcal", "instance", "path", "result", "nearest"),
        _requires("solve-lcul", "instance", "summary"),
        _requires("tradeoff", "instance"),
        _requires("oracle", "checks"),
    ],
}


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument parsing helpers


def _floats(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from None


def _ints(text: str, name: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated integers, got {text!r}") from None


def _ranges(text: str, name: str) -> list[tuple[int, int]]:
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise UsageError(f"{name}: expected lo:hi pairs, got {part!r}")
        try:
            out.append((int(lo), int(hi)))
        except ValueError:
            raise UsageError(f"{name}: bounds must be integers, got {part!r}") from None
    return out


_GENERATOR_KEYS = {
    "n": int, "dim": int, "colors": int, "clusters": int, "seed": int,
    "spread": float, "correlation": float, "box": float, "weights": str,
}


def _parse_generate(text: str) -> SyntheticSpec:
    kw = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = part.partition("=")
        if not sep or key not in _GENERATOR_KEYS:
            raise UsageError(f"--generate: unknown item {part!r}; keys are {sorted(_GENERATOR_KEYS)}")
        try:
            kw[key] = _GENERATOR_KEYS[key](value)
        except ValueError:
            raise UsageError(f"--generate: bad value for {key}: {value!r}") from None
    if "n" not in kw:
        raise UsageError("--generate needs n=<points>")
    if "weights" in kw:
        kw["color_weights"] = [float(w) for w in kw.pop("weights").split("/")]
    if "colors" in kw:
        kw["num_colors"] = kw.pop("colors")
    return SyntheticSpec(**kw)


def _load_points(args) -> tuple[PointSet, list[str]]:
    if args.data and args.generate:
        raise UsageError("--data and --generate are mutually exclusive")
    if args.data:
        if not args.coords or not args.color_col:
            raise UsageError("--data needs --coords and --color-col")
        coords = [c.strip() for c in args.coords.split(",")]
        spec = DatasetSpec(args.data, coords, args.color_col, delimiter=args.delimiter,
                           has_header=not args.no_header, row_limit=args.row_limit, normalization=args.normalize)
        return load_dataset(spec), coords
    if args.generate:
        ps = synthesize(_parse_generate(args.generate))
        return ps, [f"x{d}" for d in range(ps.coordinates.shape[1])]
    raise UsageError("one of --data or --generate is required")


def _load_centers(args, ps: PointSet, coord_names: list[str]) -> np.ndarray:
    if args.centers:
        with open(args.centers, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh, delimiter=args.delimiter))
        header = [h.strip() for h in rows[0]]
        missing = [c for c in coord_names if c not in header]
        if missing:
            raise UsageError(f"--centers file lacks columns {missing}")
        idx = [header.index(c) for c in coord_names]
        try:
            centers = np.array([[float(r[i]) for i in idx] for r in rows[1:] if r], dtype=np.float64)
        except ValueError as exc:
            raise UsageError(f"--centers: {exc}") from None
        if args.k is not None and args.k != centers.shape[0]:
            raise UsageError(f"--k {args.k} disagrees with {centers.shape[0]} centers in --centers")
        return centers
    if args.k is None:
        raise UsageError("--k is required unless --centers is given")
    return kmeanspp_centers(ps.coordinates, args.k, args.seed, args.lloyd)


def _center_labels(args, centers: np.ndarray, coord_names: list[str]) -> np.ndarray:
    if args.labels and args.label_rule:
        raise UsageError("--labels and --label-rule are mutually exclusive")
    k = centers.shape[0]
    if args.labels:
        labels = np.array(_ints(args.labels, "--labels"), dtype=np.int64)
        if labels.size != k or labels.min() < 0:
            raise UsageError(f"--labels needs {k} non-negative integers")
        return labels
    if args.label_rule:
        match = re.fullmatch(r"\s*([^<>=\s]+)\s*>=\s*(\S+)\s*", args.label_rule)
        if not match or match.group(1) not in coord_names:
            raise UsageError(f"--label-rule must read <coordinate>>=<threshold> over {coord_names}")
        try:
            tau = float(match.group(2))
        except ValueError:
            raise UsageError(f"--label-rule: bad threshold {match.group(2)!r}") from None
        column = centers[:, coord_names.index(match.group(1))]
        return np.where(column >= tau, 0, 1).astype(np.int64)
    raise UsageError("this command needs --labels or --label-rule")


def _clp(args, instance: Instance) -> ClpSpec:
    if not args.alpha:
        raise UsageError("--alpha is required")
    alpha = [rational(a) for a in _floats(args.alpha, "--alpha")]
    # decimal input rarely sums to exactly one after float parsing; absorb the residue in the last share
    if abs(float(sum(alpha)) - 1) > 1e-9:
        raise UsageError("--alpha must sum to 1")
    alpha[-1] = 1 - sum(alpha[:-1])
    return ClpSpec(alpha, instance.population_ratios, args.eps_a, args.eps_a_prime,
                   args.eps_b, args.eps_b_prime, args.eps_c, args.eps_c_prime)


def _lcal_constraints(args, instance: Instance, m: int) -> LabelConstraints:
    if args.alpha:
        base = _clp(args, instance).to_label_constraints(instance.n, instance.k)
        if base.num_labels != m:
            raise UsageError(f"--alpha has {base.num_labels} shares but the labels use {m}")
    else:
        base = LabelConstraints.from_delta(instance.population_ratios, args.delta, m, instance.n)
    size_lo, size_hi = base.size_lower, base.size_upper
    if args.size_bounds:
        sizes = _ranges(args.size_bounds, "--size-bounds")
        if len(sizes) != m:
            raise UsageError(f"--size-bounds needs {m} pairs")
        size_lo, size_hi = tuple(s[0] for s in sizes), tuple(s[1] for s in sizes)
    c_lo, c_hi = base.center_lower, base.center_upper
    if args.center_bounds:
        cb = _ranges(args.center_bounds, "--center-bounds")
        if len(cb) != m:
            raise UsageError(f"--center-bounds needs {m} pairs")
        c_lo, c_hi = tuple(c[0] for c in cb), tuple(c[1] for c in cb)
    return LabelConstraints(base.color_lower, base.color_upper, size_lo, size_hi, c_lo, c_hi)


def _instance_summary(instance: Instance, ps: PointSet) -> dict:
    return {
        "n": instance.n,
        "k": instance.k,
        "num_colors": instance.num_colors,
        "color_legend": list(ps.legend),
        "color_counts": instance.color_counts.tolist(),
        "objective": instance.objective.value,
        "dropped_rows": ps.dropped_rows,
    }


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("handler", "out", "format", "verbose")}


def _prepare(args):
    ps, coord_names = _load_points(args)
    centers = _load_centers(args, ps, coord_names)
    instance = ps.with_centers(centers, Objective(args.objective))
    return ps, coord_names, centers, instance


# --------------------------------------------------------------------------
# commands


def _choose_path(args, instance: Instance, labels: np.ndarray, constraints: LabelConstraints) -> str:
    exact = (constraints.num_labels == 2 and instance.objective is not Objective.KCENTER
             and constraints.is_exact_preservation(instance.population_ratios)
             and {0, 1} <= set(labels.tolist()))
    if args.solver == "greedy" and not exact:
        raise UsageError("--solver greedy needs two labels, both in use, exact population proportions "
                         "and a k-median or k-means objective")
    if args.solver == "greedy" or (args.solver == "auto" and exact):
        return "two-label-greedy"
    return "lcal-kcenter-flow" if instance.objective is Objective.KCENTER else "lcal-flow"


def cmd_solve_lcal(args):
    ps, coord_names, centers, instance = _prepare(args)
    labels = _center_labels(args, centers, coord_names)
    m = int(labels.max()) + 1
    if args.label_rule:
        m = 2
    constraints = _lcal_constraints(args, instance, m)
    path = _choose_path(args, instance, labels, constraints)
    if path == "two-label-greedy":
        report = solve_two_label_exact(instance, labels, constraints)
    elif path == "lcal-kcenter-flow":
        report = solve_lcal_kcenter(instance, labels, constraints)
    else:
        report = solve_lcal(instance, labels, constraints, workers=args.threads)
    near = nearest_center(instance, labels)
    out = {
        "command": "solve-lcal",
        "status": "ok" if report.feasible else "infeasible",
        "instance": _instance_summary(instance, ps),
        "centers": centers.tolist(),
        "center_labels": labels.tolist(),
        "path": path,
        "result": report.to_dict(include_assignment=args.assignment),
        "nearest": {
            "objective": objective_value(instance, near),
            "violations": violations(instance, near, constraints).to_dict(),
        },
    }
    v = report.violations
    out["rows"] = [{
        "path": path,
        "status": report.status,
        "objective": report.objective,
        "pof": report.pof,
        "delta_color": None if v is None else v.delta_color,
        "delta_points_per_label": None if v is None else v.delta_points,
        "delta_centers_per_label": None if v is None else v.delta_centers,
        "elapsed_ms": report.elapsed_ms,
    }]
    return out, EXIT_OK if report.feasible else EXIT_INFEASIBLE


def _row(method: str, rep: int, seed: int, objective: float, pof_value, v) -> dict:
    return {
        "method": method,
        "replication": rep,
        "seed": seed,
        "objective": objective,
        "pof": pof_value,
        "delta_color": v.delta_color,
        "delta_points_per_label": v.delta_points,
        "delta_centers_per_label": v.delta_centers,
    }


def cmd_solve_lcul(args):
    ps, _, centers, instance = _prepare(args)
    clp = _clp(args, instance)
    near = nearest_center(instance)
    blind = objective_value(instance, near)
    fc = None
    flags = []
    if not args.no_fc:
        if args.fc_max_points and instance.n > args.fc_max_points:
            flags.append(f"per-cluster baseline skipped: n={instance.n} exceeds --fc-max-points")
        else:
            ratios = instance.population_ratios
            lo = [max(0, r - clp.eps_a[h][0]) for h, r in enumerate(ratios)]
            hi = [min(1, r + clp.eps_a_prime[h][0]) for h, r in enumerate(ratios)]
            fc = per_cluster_quota_baseline(instance, lo, hi)
            flags += fc.flags
    rows = []
    for rep in range(args.reps):
        seed = args.seed + rep
        lfc = solve_lcul_randomized(instance, clp, seed)
        rows.append(_row("lfc", rep, seed, lfc.objective, pof(lfc.objective, blind), lfc.violations))
        baseline = ncra(instance, clp.alpha, seed)
        cost = objective_value(instance, baseline)
        rows.append(_row("ncra", rep, seed, cost, pof(cost, blind), violations(instance, baseline, clp=clp)))
        if fc is not None:
            # the baseline is label-blind; its centers get the same random labels as NCRA
            labelled = Assignment(fc.assignment.point_to_center, baseline.center_to_label)
            rows.append(_row("fc-heuristic", rep, seed, fc.objective, fc.pof, violations(instance, labelled, clp=clp)))
    summary = {}
    for method in dict.fromkeys(r["method"] for r in rows):
        mine = [r for r in rows if r["method"] == method]
        summary[method] = {
            key: fmean(r[key] for r in mine) if all(r[key] is not None for r in mine) else None
            for key in ("objective", "pof", "delta_color", "delta_points_per_label", "delta_centers_per_label")
        }
        summary[method]["replications"] = len(mine)
    out = {
        "command": "solve-lcul",
        "status": "ok",
        "instance": _instance_summary(instance, ps),
        "centers": centers.tolist(),
        "nearest_objective": blind,
        "summary": summary,
        "flags": flags,
        "rows": rows,
    }
    return out, EXIT_OK


def cmd_tradeoff(args):
    ps, coord_names, centers, instance = _prepare(args)
    labels = _center_labels(args, centers, coord_names)
    if instance.objective is Objective.KCENTER:
        raise UsageError("tradeoff supports k-median and k-means")
    if set(labels.tolist()) != {0, 1}:
        raise UsageError("tradeoff needs two labels, each on at least one center")
    curve = tradeoff_curve(instance, labels)
    blind = objective_value(instance, nearest_center(instance, labels))
    rows = [{"positive_count": p.positive_count, "cost": p.cost, "scaled_cost": p.scaled_cost,
             "pof": pof(p.cost, blind)} for p in curve]
    out = {
        "command": "tradeoff",
        "status": "ok",
        "instance": _instance_summary(instance, ps),
        "center_labels": labels.tolist(),
        "nearest_objective": blind,
        "rows": rows,
    }
    return out, EXIT_OK


def _timed(fn, *a, **kw):
    start = time.perf_counter()
    value = fn(*a, **kw)
    return value, (time.perf_counter() - start) * 1000


def cmd_bench(args):
    sizes = sorted(_ints(args.sizes, "--sizes"))
    if not sizes or sizes[0] < 2:
        raise UsageError("--sizes must list sizes of at least 2")
    if args.data or args.generate:
        pool, _ = _load_points(args)
    else:
        pool = synthesize(SyntheticSpec(n=sizes[-1], seed=args.seed))
    if pool.n < sizes[-1]:
        raise UsageError(f"the dataset has {pool.n} points, fewer than the largest size {sizes[-1]}")
    k = args.k or 5
    alpha = args.alpha or "0.25,0.75"
    rows = []
    for size in sizes:
        ps = pool.subsample(size, args.seed)
        centers, ms = _timed(kmeanspp_centers, ps.coordinates, k, args.seed, args.lloyd)
        rows.append({"size": size, "solver": "kmeans++", "elapsed_ms": ms, "objective": None})
        instance = ps.with_centers(centers, Objective(args.objective))
        labels = make_rng(args.seed).permutation(np.arange(k) % 2)
        constraints = LabelConstraints.from_delta(instance.population_ratios, 0, 2, instance.n)
        if instance.objective is not Objective.KCENTER:
            rep, ms = _timed(solve_two_label_exact, instance, labels, constraints)
            rows.append({"size": size, "solver": "two-label-greedy", "elapsed_ms": ms, "objective": rep.objective})
        bench_args = argparse.Namespace(**{**vars(args), "alpha": alpha})
        clp = _clp(bench_args, instance)
        rep, ms = _timed(solve_lcul_randomized, instance, clp, args.seed)
        rows.append({"size": size, "solver": "lcul-dependent-rounding", "elapsed_ms": ms, "objective": rep.objective})
    for r in rows:
        r["within_target"] = r["elapsed_ms"] < BENCH_TARGET_MS
    out = {"command": "bench", "status": "ok", "target_ms": BENCH_TARGET_MS, "k": k, "rows": rows}
    return out, EXIT_OK


def _fixture(name: str, centers: np.ndarray) -> Instance:
    with resources.files("fairlabel.fixtures").joinpath(name).open(encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    legend = list(dict.fromkeys(r["color"] for r in rows))
    coords = np.array([[float(r["x"])] for r in rows])
    colors = np.array([legend.index(r["color"]) for r in rows])
    return Instance(coords, colors, centers, Objective.KMEDIAN, color_legend=tuple(legend))


def _fixture_centers() -> np.ndarray:
    with resources.files("fairlabel.fixtures").joinpath("t_centers.csv").open(encoding="utf-8") as fh:
        return np.array([[float(r["x"])] for r in csv.DictReader(fh)])


def _random_lcal_case(rng: np.random.Generator):
    n, k, c = int(rng.integers(4, 9)), int(rng.integers(2, 4)), int(rng.integers(1, 4))
    objective = list(Objective)[int(rng.integers(3))]
    instance = Instance(rng.uniform(0, 10, size=(n, 2)).round(2), rng.integers(c, size=n), rng.uniform(0, 10, size=(k, 2)).round(2),
                        objective, num_colors=c)
    labels = rng.integers(2, size=k)
    ratios = instance.population_ratios
    delta = [0, 0.25, 0.5, 1][int(rng.integers(4))]
    constraints = LabelConstraints.from_delta(ratios, delta, 2, n)
    return instance, labels, constraints


def cmd_oracle(args):
    checks = []

    def check(name, expected, observed, ok=None):
        if ok is None:
            ok = expected == observed
        checks.append({"name": name, "expected": expected, "observed": observed, "ok": bool(ok)})

    centers = _fixture_centers()
    t1, t2 = _fixture("t1.csv", centers), _fixture("t2.csv", centers)
    labels = np.array([0, 1])
    scale = DEFAULT_COST_SCALE
    t1_free = LabelConstraints.unconstrained(2, 2, 4)
    check("T1 nearest k-median cost", 2.0, objective_value(t1, nearest_center(t1)))
    check("T1 nearest k-center cost", 0.5, objective_value(t1.with_objective(Objective.KCENTER), nearest_center(t1)))
    t1_half = LabelConstraints.from_delta(t1.population_ratios, 0, 2, 4)
    check("T1 LCAL exact halves", 2.0, solve_lcal(t1, labels, t1_half).objective)
    t2_c = LabelConstraints([[0.5, 0.5], [0, 0]], [[0.5, 0.5], [1, 1]], (2, 2), (2, 2))
    lcal = solve_lcal(t2, labels, t2_c)
    brute = brute_force_lcal(t2, labels, t2_c, scale)
    check("T2 LCAL cost", 8.0, lcal.objective)
    check("T2 LCAL vs brute force (scaled)", brute.scaled_cost, lcal.scaled_cost)
    check("T2 LCAL positive points", [0, 2], np.flatnonzero(lcal.assignment.point_labels() == 0).tolist())
    check("T2 POF", 4.0, lcal.pof)
    t2_k = t2.with_objective(Objective.KCENTER)
    check("T2 k-center radius", 3.5, solve_lcal_kcenter(t2_k, labels, t2_c).objective)
    check("T2 k-center vs brute force", brute_force_lcal(t2_k, labels, t2_c, scale).objective,
          solve_lcal_kcenter(t2_k, labels, t2_c).objective)
    t2_exact = LabelConstraints.from_delta(t2.population_ratios, 0, 2, 4)
    check("T2 greedy = flow", solve_lcal(t2, labels, t2_exact).objective,
          solve_two_label_exact(t2, labels, t2_exact).objective)
    curve = tradeoff_curve(t2, labels)
    check("T2 trade-off curve", [[0, 9.0], [2, 8.0], [4, 9.0]], [[p.positive_count, p.cost] for p in curve])
    for p in curve:
        fixed = LabelConstraints.from_delta(t2.population_ratios, 0, 2, 4,
                                            size_bounds=[(p.positive_count,) * 2, (4 - p.positive_count,) * 2])
        check(f"T2 curve at {p.positive_count} vs brute force", brute_force_lcal(t2, labels, fixed, scale).scaled_cost,
              p.scaled_cost)
    t2_lcul = t2_exact.with_center_bounds((1, 1), (1, 1))
    check("T2 LCUL exact vs brute force", brute_force_lcul(t2, t2_lcul, scale).scaled_cost,
          solve_lcul_exact_fpt(t2, t2_lcul, scale).scaled_cost)
    check("T1 unconstrained LCAL = nearest", 2.0, solve_lcal(t1, labels, t1_free).objective)

    rng = make_rng(args.seed)
    for case in range(args.reps):
        instance, labels_r, constraints = _random_lcal_case(rng)
        brute = brute_force_lcal(instance, labels_r, constraints, scale)
        rep = solve_lcal(instance, labels_r, constraints, scale)
        if brute is None or not rep.feasible:
            check(f"random LCAL #{case} feasibility", brute is not None, rep.feasible)
        elif instance.objective is Objective.KCENTER:
            check(f"random LCAL #{case} ({instance.objective.value})", brute.objective, rep.objective)
        else:
            check(f"random LCAL #{case} ({instance.objective.value})", brute.scaled_cost,
                  scaled_objective(instance, rep.assignment, scale))
    ok = all(c["ok"] for c in checks)
    rows = [{"name": c["name"], "ok": c["ok"]} for c in checks]
    out = {"command": "oracle", "status": "ok" if ok else "mismatch", "checks": checks, "rows": rows}
    return out, EXIT_OK if ok else EXIT_INTERNAL


# --------------------------------------------------------------------------
# parser and output


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("input")
    src.add_argument("--data", help="delimited text file with a header row")
    src.add_argument("--generate", help="synthetic data, e.g. n=1000,dim=2,colors=2,clusters=3,correlation=0.5")
    src.add_argument("--coords", help="comma-separated coordinate columns")
    src.add_argument("--color-col", help="column holding the color (group)")
    src.add_argument("--delimiter", default=",")
    src.add_argument("--no-header", action="store_true", help="columns are addressed by position")
    src.add_argument("--row-limit", type=int)
    src.add_argument("--normalize", choices=["none", "zscore"], default="none")
    src.add_argument("--centers", help="CSV of center coordinates; skips k-means++")
    src.add_argument("--k", type=int)
    src.add_argument("--lloyd", type=int, default=10, help="Lloyd iterations after k-means++ seeding")
    src.add_argument("--objective", choices=[o.value for o in Objective], default="kmedian")
    src.add_argument("--seed", type=int, default=0)
    src.add_argument("--threads", type=int, default=1)
    src.add_argument("--out", help="output file (default: stdout)")
    src.add_argument("--format", choices=["json", "csv"])
    src.add_argument("-v", "--verbose", action="store_true")

    cons = argparse.ArgumentParser(add_help=False)
    g = cons.add_argument_group("constraints")
    g.add_argument("--labels", help="comma-separated label per center")
    g.add_argument("--label-rule", help="coordinate>=threshold; matching centers get label 0, the rest label 1")
    g.add_argument("--delta", type=float, default=0.1,
                   help="color bounds (1-delta) r_h and (1+delta) r_h on every label")
    g.add_argument("--alpha", help="comma-separated label shares; switches to share-and-slack bounds")
    g.add_argument("--eps-a", type=float, default=0.2)
    g.add_argument("--eps-a-prime", type=float, default=0.2)
    g.add_argument("--eps-b", type=float, default=0.1)
    g.add_argument("--eps-b-prime", type=float, default=0.1)
    g.add_argument("--eps-c", type=float, default=0.1)
    g.add_argument("--eps-c-prime", type=float, default=0.1)
    g.add_argument("--size-bounds", help="lo:hi per label, e.g. 0:100,50:200")
    g.add_argument("--center-bounds", help="lo:hi per label")

    parser = argparse.ArgumentParser(prog="fairlabel", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-lcal", parents=[common, cons], help="assign points for fixed center labels")
    p.add_argument("--solver", choices=["auto", "flow", "greedy"], default="auto")
    p.add_argument("--assignment", action="store_true", help="include the full assignment in the report")
    p.set_defaults(handler=cmd_solve_lcal)

    p = sub.add_parser("solve-lcul", parents=[common, cons], help="randomized labels against the baselines")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--no-fc", action="store_true", help="skip the per-cluster quota baseline")
    p.add_argument("--fc-max-points", type=int, default=100_000)
    p.set_defaults(handler=cmd_solve_lcul)

    p = sub.add_parser("tradeoff", parents=[common, cons], help="cost at every positive-label size")
    p.set_defaults(handler=cmd_tradeoff)

    p = sub.add_parser("bench", parents=[common, cons], help="wall time per solver at growing sizes")
    p.add_argument("--sizes", default=DEFAULT_SIZES)
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("oracle", help="check the solvers against brute force on bundled fixtures")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=25, help="random instances after the fixtures")
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(handler=cmd_oracle)
    return parser


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    rows = report["rows"]
    fields = list(dict.fromkeys(key for row in rows for key in row))
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: "" if v is None else v for k, v in row.items()})
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        body, code = args.handler(args)
    except (UsageError, IngestionError, ValueError, FileNotFoundError) as exc:
        print(f"fairlabel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL
    report = _plain({"schema_version": SCHEMA_VERSION, "config": _config(args), **body})
    try:
        jsonschema.validate(report, REPORT_SCHEMA)
    except jsonschema.ValidationError as exc:
        log.error("report failed schema validation: %s", exc.message)
        return EXIT_INTERNAL
    fmt = args.format or ("csv" if args.command == "tradeoff" else "json")
    text = render(report, fmt)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
