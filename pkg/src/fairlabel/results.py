"""Result containers shared by solvers, baselines and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Assignment

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
RANDOMIZED = "randomized"
HEURISTIC = "heuristic"


@dataclass(frozen=True)
class ViolationReport:
    delta_color: float
    delta_points: float
    delta_centers: float
    per_label_color: tuple[tuple[float, ...], ...]
    per_label_points: tuple[float, ...]
    per_label_centers: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "delta_color": self.delta_color,
            "delta_points_per_label": self.delta_points,
            "delta_centers_per_label": self.delta_centers,
            "per_label_color": [list(r) for r in self.per_label_color],
            "per_label_points": list(self.per_label_points),
            "per_label_centers": list(self.per_label_centers),
        }


@dataclass
class SolveReport:
    """Outcome of one solve. ``assignment`` is ``None`` exactly when ``status`` is infeasible."""

    status: str
    method: str
    assignment: Assignment | None = None
    objective: float | None = None
    scaled_cost: int | None = None
    pof: float | None = None
    violations: ViolationReport | None = None
    elapsed_ms: float = 0.0
    seed: int | None = None
    flags: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status != INFEASIBLE

    def to_dict(self, include_assignment: bool = True) -> dict:
        out = {
            "status": self.status,
            "method": self.method,
            "objective": self.objective,
            "scaled_cost": self.scaled_cost,
            "pof": self.pof,
            "violations": None if self.violations is None else self.violations.to_dict(),
            "elapsed_ms": self.elapsed_ms,
            "seed": self.seed,
            "flags": list(self.flags),
        }
        if self.extra:
            out["extra"] = _plain(self.extra)
        if include_assignment and self.assignment is not None:
            out["assignment"] = {
                "point_to_center": self.assignment.point_to_center.tolist(),
                "center_to_label": self.assignment.center_to_label.tolist(),
            }
        return out


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj
