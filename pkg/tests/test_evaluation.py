import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairlabel.data import SyntheticSpec, kmeanspp_centers, synthesize
from fairlabel.evaluation import (
    brute_force_lcal,
    brute_force_lcul,
    ncra,
    nearest_center,
    per_cluster_quota_baseline,
    pof,
    violations,
)
from fairlabel.lcal import solve_lcal
from fairlabel.model import Assignment, ClpSpec, Instance, LabelConstraints, Objective, objective_value

from conftest import make_t1, make_t2, random_instance, t2_constraints


def test_pof():
    assert pof(2.0, 2.0) == 1.0
    assert pof(8.0, 2.0) == 4.0
    assert pof(1.0, 0.0) is None


def test_nearest_center():
    a = nearest_center(make_t1())
    assert a.point_to_center.tolist() == [0, 0, 1, 1]
    assert objective_value(make_t1(), a) == 2.0
    tie = Instance(np.array([[1.0]]), np.array([0]), np.array([[0.0], [2.0]]))
    assert nearest_center(tie).point_to_center.tolist() == [0]
    single = Instance(np.array([[1.0], [7.0]]), np.array([0, 0]), np.array([[3.0]]))
    assert nearest_center(single).point_to_center.tolist() == [0, 0]


def test_color_violation_three_of_four():
    inst = Instance(np.zeros((4, 1)), np.array([0, 0, 0, 1]), np.zeros((1, 1)))
    cons = LabelConstraints([[0.5, 0.5]], [[0.5, 0.5]], (0,), (4,))
    v = violations(inst, Assignment(np.zeros(4, dtype=int), np.array([0])), cons)
    assert v.delta_color == 0.25
    assert v.per_label_color == ((0.25, 0.25),)


def test_empty_label_has_no_color_violation():
    inst = make_t2()
    cons = LabelConstraints([[0.5, 0.5], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]], (0, 0), (4, 4))
    v = violations(inst, Assignment(np.array([0, 0, 1, 1]), np.array([0, 0])), cons)
    assert v.per_label_color[1] == (0.0, 0.0)


def test_size_and_center_slack_normalized():
    inst = make_t2()
    cons = LabelConstraints([[0, 0], [0, 0]], [[1, 1], [1, 1]], (3, 0), (4, 4), (0, 0), (0, 2))
    v = violations(inst, nearest_center(inst, np.array([0, 1])), cons)
    assert v.per_label_points == (0.25, 0.0)
    assert v.per_label_centers == (0.5, 0.0)


def test_clp_forms():
    inst = make_t2()
    clp = ClpSpec((0.25, 0.75), inst.population_ratios, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1)
    v = violations(inst, nearest_center(inst, np.array([0, 1])), clp=clp)
    # label 0 holds two red points: proportion 1 against at most 0.7
    assert v.delta_color == pytest.approx(0.3)
    # half the points against [0.15, 0.35]
    assert v.per_label_points[0] == pytest.approx(0.15)
    assert v.per_label_centers[0] == pytest.approx(0.15)


def float_violation(inst, a, lo, hi):
    """Independent float evaluation of the color relaxation."""
    labels = a.point_labels()
    worst = 0.0
    for L in range(len(lo)):
        members = inst.colors[labels == L]
        if members.size == 0:
            continue
        for h in range(inst.num_colors):
            p = float(np.mean(members == h))
            worst = max(worst, lo[L][h] - p, p - hi[L][h])
    return worst


def test_ncra_on_color_skewed_blobs():
    ps = synthesize(SyntheticSpec(n=600, clusters=2, correlation=1.0, seed=4))
    inst = ps.with_centers(kmeanspp_centers(ps.coordinates, 4, seed=2))
    clp = ClpSpec((0.5, 0.5), inst.population_ratios, 0.02, 0.02)
    r = [float(x) for x in inst.population_ratios]
    positive = 0
    for seed in range(30):
        a = ncra(inst, (0.5, 0.5), seed)
        v = violations(inst, a, clp=clp)
        lo = [[x - 0.02 for x in r]] * 2
        hi = [[x + 0.02 for x in r]] * 2
        assert v.delta_color == pytest.approx(float_violation(inst, a, lo, hi), abs=1e-12)
        positive += v.delta_color > 0
    assert positive > 15


def test_ncra_degenerate_and_statistics():
    rng = np.random.default_rng(0)
    inst = random_instance(rng, 20, 6, 2, Objective.KMEDIAN)
    assert ncra(inst, (1, 0), 3).center_to_label.tolist() == [0] * 6
    draws = np.array([ncra(inst, (0.5, 0.5), s).center_to_label for s in range(10_000)])
    assert np.all(np.abs((draws == 0).mean(axis=0) - 0.5) <= 0.02)
    assert len(set((draws == 0).sum(axis=1).tolist())) > 2
    assert objective_value(inst, ncra(inst, (0.5, 0.5), 1)) == objective_value(inst, nearest_center(inst))


def test_quota_baseline_vacuous_is_nearest():
    rng = np.random.default_rng(6)
    inst = random_instance(rng, 25, 4, 3, Objective.KMEDIAN)
    rep = per_cluster_quota_baseline(inst, [0, 0, 0], [1, 1, 1])
    assert rep.assignment == nearest_center(inst)
    assert rep.status == "heuristic" and rep.flags[0].startswith("HEURISTIC")


def test_quota_baseline_t2():
    for backend in ("flow", "lp"):
        rep = per_cluster_quota_baseline(make_t2(), [0.5, 0.5], [0.5, 0.5], [0, 1], backend=backend)
        assert rep.objective == 8.0
        assert rep.assignment.point_to_center.tolist() == [0, 1, 0, 1]
        assert rep.extra["cluster_delta_color"] == 0.0


def test_quota_baseline_falls_back():
    rep = per_cluster_quota_baseline(make_t2(), [0.9, 0.9], [1, 1])
    assert rep.assignment == nearest_center(make_t2())
    assert any("fell back" in f for f in rep.flags)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.1, 0.25, 0.5]))
def test_quota_baseline_never_beats_lcal(seed, delta):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(4, 16)), int(rng.integers(2, 4)), 2, Objective.KMEDIAN)
    labels = rng.integers(2, size=inst.k)
    cons = LabelConstraints.from_delta(inst.population_ratios, delta, 2, inst.n)
    lo, hi = cons.color_lower[0], cons.color_upper[0]
    flow_rep = per_cluster_quota_baseline(inst, lo, hi, labels, cons, backend="flow")
    lp_rep = per_cluster_quota_baseline(inst, lo, hi, labels, cons, backend="lp")
    assert flow_rep.objective == pytest.approx(lp_rep.objective, rel=1e-9)
    if len(flow_rep.flags) == 1:
        assert flow_rep.violations.delta_color == 0
        lcal = solve_lcal(inst, labels, cons)
        assert lcal.objective <= flow_rep.objective + 1e-9


def test_brute_force():
    assert brute_force_lcal(make_t2(), [0, 1], t2_constraints()).objective == 8.0
    inst = make_t1()
    assert brute_force_lcal(inst, [0, 1], LabelConstraints.unconstrained(2, 2, 4)).objective == 2.0
    impossible = LabelConstraints([[1, 0], [0, 0]], [[1, 0], [1, 1]], (3, 0), (4, 4))
    assert brute_force_lcal(make_t2(), [0, 1], impossible) is None
    assert brute_force_lcul(make_t2(), impossible.with_center_bounds((1, 0), (2, 2))) is None
    with pytest.raises(ValueError):
        brute_force_lcal(make_t2(), [0, 1], t2_constraints(), budget=15)
    with pytest.raises(ValueError):
        brute_force_lcul(make_t2(), t2_constraints(), budget=63)
