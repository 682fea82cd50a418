"""Fair labeled clustering: assignment under label-level color, size and center-count constraints."""

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
from .lcal import (
    build_lcal_network,
    compute_drops,
    enumerate_distributions,
    solve_lcal,
    solve_lcal_kcenter,
    solve_two_label_exact,
    tradeoff_curve,
)
from .lcul import (
    dependent_round,
    solve_lcul_centercount_only,
    solve_lcul_color_only,
    solve_lcul_exact_fpt,
    solve_lcul_randomized,
)
from .model import Assignment, ClpSpec, Instance, LabelConstraints, Objective, objective_value
from .results import SolveReport, ViolationReport

__version__ = "0.1.0"

__all__ = [
    "Assignment", "ClpSpec", "DatasetSpec", "IngestionError", "Instance", "LabelConstraints", "Objective",
    "PointSet", "SolveReport", "SyntheticSpec", "ViolationReport", "brute_force_lcal", "brute_force_lcul",
    "build_lcal_network", "compute_drops", "dependent_round", "enumerate_distributions", "kmeanspp_centers",
    "load_dataset", "ncra", "nearest_center", "objective_value", "per_cluster_quota_baseline", "pof",
    "solve_lcal", "solve_lcal_kcenter", "solve_lcul_centercount_only", "solve_lcul_color_only",
    "solve_lcul_exact_fpt", "solve_lcul_randomized", "solve_two_label_exact", "synthesize", "tradeoff_curve",
    "violations",
]
