import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from fairlabel.evaluation import brute_force_lcal, nearest_center, violations
from fairlabel.flow import max_flow_feasible, min_cost_max_flow
from fairlabel.lcal import (
    AtomicUnit,
    build_lcal_network,
    compute_drops,
    enumerate_distributions,
    solve_lcal,
    solve_lcal_kcenter,
    solve_two_label_exact,
    tradeoff_curve,
)
from fairlabel.model import Instance, LabelConstraints, Objective, objective_value

from conftest import make_t1, make_t2, random_instance, t2_constraints

LABELS = np.array([0, 1])


# --- distributions ---------------------------------------------------------

def test_distributions_forced_by_size_bounds():
    c = LabelConstraints.unconstrained(2, 1, 4)
    c = LabelConstraints(c.color_lower, c.color_upper, (2, 2), (2, 2))
    assert list(enumerate_distributions(4, 2, c)) == [(2, 2)]


def test_distributions_free():
    c = LabelConstraints.unconstrained(2, 1, 4)
    assert list(enumerate_distributions(4, 2, c)) == [(0, 4), (1, 3), (2, 2), (3, 1), (4, 0)]


def test_distributions_prune_odd_positive_sizes():
    c = LabelConstraints([[0.5, 0.5], [0, 0]], [[0.5, 0.5], [1, 1]], (0, 0), (4, 4))
    assert list(enumerate_distributions(4, 2, c, color_counts=(2, 2))) == [(0, 4), (2, 2), (4, 0)]


def test_distributions_respect_unavailable_labels():
    c = LabelConstraints.unconstrained(3, 1, 5)
    assert list(enumerate_distributions(5, 3, c, available=[True, False, True])) == [
        (n0, 0, 5 - n0) for n0 in range(6)]


def test_distributions_color_supply_prunes():
    # label 0 needs at least 3/4 of color 0, which has only two points
    c = LabelConstraints([[0.75, 0], [0, 0]], [[1, 1], [1, 1]], (0, 0), (4, 4))
    assert list(enumerate_distributions(4, 2, c, color_counts=(2, 2))) == [(0, 4), (1, 3), (2, 2)]


# --- network -----------------------------------------------------------------

def test_t1_network_node_count():
    c = LabelConstraints.from_delta(make_t1().population_ratios, 0, 2, 4)
    lnet = build_lcal_network(make_t1(), LABELS, c, (2, 2), prune=False)
    assert lnet.network.node_count == 16


def test_single_color_single_label_is_nearest_assignment():
    rng = np.random.default_rng(5)
    inst = random_instance(rng, 12, 3, 1, Objective.KMEDIAN)
    c = LabelConstraints.unconstrained(1, 1, 12)
    lnet = build_lcal_network(inst, [0, 0, 0], c, (12,), prune=False)
    res = min_cost_max_flow(lnet.network)
    phi = lnet.decode(res.flow)
    near = nearest_center(inst)
    assert objective_value(inst, near) == pytest.approx(objective_value(inst, type(near)(phi, near.center_to_label)))


def test_absent_color_with_positive_lower_bound_is_infeasible():
    inst = Instance(np.array([[0.0], [1.0]]), np.array([0, 0]), np.array([[0.0]]), num_colors=2)
    c = LabelConstraints([[0, 1]], [[1, 1]], (0,), (2,))
    lnet = build_lcal_network(inst, [0], c, (2,))
    assert min_cost_max_flow(lnet.network) is None
    assert not max_flow_feasible(lnet.network)


# --- flow solver -------------------------------------------------------------

def test_t2_lcal():
    rep = solve_lcal(make_t2(), LABELS, t2_constraints())
    assert rep.objective == 8.0
    assert np.flatnonzero(rep.assignment.point_labels() == 0).tolist() == [0, 2]
    assert rep.pof == 4.0
    assert rep.method == "lcal-flow"


def test_unconstrained_equals_nearest():
    rng = np.random.default_rng(11)
    for objective in (Objective.KMEDIAN, Objective.KMEANS):
        inst = random_instance(rng, 15, 4, 3, objective)
        labels = np.array([0, 1, 0, 1])
        rep = solve_lcal(inst, labels, LabelConstraints.unconstrained(2, 3, 15))
        assert rep.objective == pytest.approx(objective_value(inst, nearest_center(inst)), rel=1e-12)
        assert rep.pof == pytest.approx(1.0)


def test_t1_balanced_already():
    inst = make_t1()
    rep = solve_lcal(inst, LABELS, LabelConstraints.from_delta(inst.population_ratios, 0, 2, 4))
    assert rep.objective == 2.0 and rep.pof == 1.0


def test_infeasible_is_a_value():
    c = LabelConstraints([[1, 0], [0, 0]], [[1, 0], [1, 1]], (3, 0), (4, 4))
    rep = solve_lcal(make_t2(), LABELS, c)
    assert rep.status == "infeasible" and rep.assignment is None and not rep.feasible


def test_label_gate():
    c = LabelConstraints.unconstrained(4, 2, 4)
    with pytest.raises(ValueError):
        solve_lcal(make_t2(), LABELS, c)


def test_workers_do_not_change_the_answer():
    rng = np.random.default_rng(2)
    inst = random_instance(rng, 14, 3, 2, Objective.KMEDIAN)
    c = LabelConstraints.from_delta(inst.population_ratios, 0.2, 2, inst.n)
    a = solve_lcal(inst, [0, 1, 1], c, workers=1)
    b = solve_lcal(inst, [0, 1, 1], c, workers=2)
    assert a.assignment == b.assignment and a.objective == b.objective


# --- k-center ----------------------------------------------------------------

def test_t2_kcenter():
    rep = solve_lcal_kcenter(make_t2(Objective.KCENTER), LABELS, t2_constraints())
    assert rep.objective == 3.5
    assert np.flatnonzero(rep.assignment.point_labels() == 0).tolist() == [0, 2]


def test_kcenter_unconstrained_is_nearest_radius():
    rep = solve_lcal(make_t1(Objective.KCENTER), LABELS, LabelConstraints.unconstrained(2, 2, 4))
    assert rep.objective == 0.5


def test_kcenter_demand_beyond_supply():
    c = LabelConstraints([[0.75, 0], [0, 0]], [[1, 1], [1, 1]], (4, 0), (4, 4))
    assert not solve_lcal_kcenter(make_t2(Objective.KCENTER), LABELS, c).feasible


# --- drops and the greedy ----------------------------------------------------

def test_t2_drops():
    d = compute_drops(make_t2(), LABELS)
    assert d.drop.tolist() == [4.0, 3.0, -3.0, -4.0]
    assert [o.tolist() for o in d.order] == [[0, 1], [2, 3]]


def test_drop_zero_when_equidistant():
    inst = Instance(np.array([[2.0]]), np.array([0]), np.array([[1.0], [3.0]]))
    assert compute_drops(inst, LABELS).drop.tolist() == [0.0]


def test_drops_when_points_sit_on_positive_centers():
    inst = Instance(np.array([[0.0], [0.0], [5.0]]), np.array([0, 1, 0]), np.array([[0.0], [5.0], [9.0]]))
    d = compute_drops(inst, [0, 0, 1])
    assert np.all(d.drop >= 0)
    assert d.drop.tolist() == d.negative_cost.tolist()


def test_drops_need_both_labels():
    with pytest.raises(ValueError):
        compute_drops(make_t2(), [0, 0])


def test_kmeans_drops_use_squared_distances():
    d = compute_drops(make_t2(Objective.KMEANS), LABELS)
    assert d.drop.tolist() == [20.25 - 0.25, 12.25 - 0.25, 0.25 - 12.25, 0.25 - 20.25]


@pytest.mark.parametrize("counts,expected", [((2, 2), (2, (1, 1), 2)), ((6, 9, 3), (6, (2, 3, 1), 3)),
                                             ((5, 7), (12, (5, 7), 1)), ((4,), (1, (1,), 4))])
def test_atomic_unit(counts, expected):
    u = AtomicUnit.from_counts(counts)
    assert (u.n_fair, u.per_color, u.multiplicity) == expected
    assert sum(u.per_color) == u.n_fair and u.n_fair * u.multiplicity == sum(counts)


def test_t2_greedy():
    inst = make_t2()
    c = LabelConstraints.from_delta(inst.population_ratios, 0, 2, 4)
    rep = solve_two_label_exact(inst, LABELS, c)
    assert rep.objective == 8.0
    assert np.flatnonzero(rep.assignment.point_labels() == 0).tolist() == [0, 2]
    assert rep.extra["n_fair"] == 2


def test_greedy_forced_saturation():
    inst = make_t2()
    c = LabelConstraints.from_delta(inst.population_ratios, 0, 2, size_bounds=[(4, 4), (0, 4)])
    rep = solve_two_label_exact(inst, LABELS, c)
    assert rep.objective == math.fsum(compute_drops(inst, LABELS).positive_cost) == 9.0


def test_greedy_no_moves_when_drops_are_negative():
    inst = Instance(np.array([[0.0], [1.0]]), np.array([0, 1]), np.array([[9.0], [0.5]]))
    c = LabelConstraints.from_delta(inst.population_ratios, 0, 2, 2)
    rep = solve_two_label_exact(inst, LABELS, c)
    assert rep.objective == 1.0 and rep.extra["positive_count"] == 0


def test_greedy_infeasible_after_tightening():
    inst = make_t2()
    c = LabelConstraints.from_delta(inst.population_ratios, 0, 2, size_bounds=[(1, 1), (3, 3)])
    assert not solve_two_label_exact(inst, LABELS, c).feasible


def test_greedy_preconditions():
    inst = make_t2()
    with pytest.raises(ValueError):
        solve_two_label_exact(inst, LABELS, LabelConstraints.from_delta(inst.population_ratios, 0.1, 2, 4))
    with pytest.raises(ValueError):
        solve_two_label_exact(make_t2(Objective.KCENTER), LABELS,
                              LabelConstraints.from_delta(inst.population_ratios, 0, 2, 4))


def test_t2_tradeoff():
    curve = tradeoff_curve(make_t2(), LABELS)
    assert [(p.positive_count, p.cost) for p in curve] == [(0, 9.0), (2, 8.0), (4, 9.0)]
    assert [p.scaled_cost for p in curve] == [9_000_000, 8_000_000, 9_000_000]


@st.composite
def exact_instances(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    c = draw(st.integers(2, 3))
    g = draw(st.integers(1, 4))
    per = [draw(st.integers(1, 3)) for _ in range(c)]
    colors = np.repeat(np.arange(c), [g * a for a in per])
    n = colors.size
    k = draw(st.integers(2, 5))
    objective = draw(st.sampled_from([Objective.KMEDIAN, Objective.KMEANS]))
    inst = Instance(rng.uniform(0, 10, size=(n, 2)), rng.permutation(colors), rng.uniform(0, 10, size=(k, 2)),
                    objective, num_colors=c)
    labels = np.array([0, 1] + list(rng.integers(2, size=k - 2)))
    sizes = [(int(rng.integers(0, n // 2 + 1)), int(rng.integers(n // 2, n + 1))) for _ in range(2)]
    cons = LabelConstraints.from_delta(inst.population_ratios, 0, 2, size_bounds=sizes)
    return inst, labels, cons


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(exact_instances())
def test_greedy_matches_flow(case):
    inst, labels, cons = case
    greedy = solve_two_label_exact(inst, labels, cons)
    exact = solve_lcal(inst, labels, cons)
    assert greedy.feasible == exact.feasible
    if greedy.feasible:
        assert greedy.objective == pytest.approx(exact.objective, rel=1e-9)
        assert violations(inst, greedy.assignment, cons).delta_color == 0


@settings(max_examples=60, deadline=None)
@given(exact_instances())
def test_curve_properties(case):
    inst, labels, cons = case
    curve = tradeoff_curve(inst, labels)
    drops = compute_drops(inst, labels)
    assert curve[0].cost == pytest.approx(math.fsum(drops.negative_cost), rel=1e-12)
    blind = objective_value(inst, nearest_center(inst, labels))
    assert all(p.cost >= blind - 1e-9 * max(1.0, blind) for p in curve)
    admissible = [p.cost for p in curve
                  if cons.size_lower[0] <= p.positive_count <= cons.size_upper[0]
                  and cons.size_lower[1] <= inst.n - p.positive_count <= cons.size_upper[1]]
    greedy = solve_two_label_exact(inst, labels, cons)
    if admissible:
        assert greedy.objective == pytest.approx(min(admissible), rel=1e-9)
    else:
        assert not greedy.feasible


# --- oracle agreement --------------------------------------------------------

@st.composite
def small_lcal(draw):
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    n, k, c = draw(st.integers(2, 7)), draw(st.integers(1, 3)), draw(st.integers(1, 3))
    objective = draw(st.sampled_from(list(Objective)))
    inst = random_instance(rng, n, k, c, objective, grid=draw(st.sampled_from([None, 4])))
    labels = rng.integers(2, size=k)
    delta = draw(st.sampled_from([0, 0.2, 0.5, 1]))
    sizes = [tuple(sorted(rng.integers(0, n + 1, size=2).tolist())) for _ in range(2)]
    return inst, labels, LabelConstraints.from_delta(inst.population_ratios, delta, 2, size_bounds=sizes)


@settings(max_examples=80, deadline=None)
@given(small_lcal())
def test_flow_matches_brute_force(case):
    inst, labels, cons = case
    rep = solve_lcal(inst, labels, cons)
    brute = brute_force_lcal(inst, labels, cons)
    assert rep.feasible == (brute is not None)
    if brute is None:
        return
    if inst.objective is Objective.KCENTER:
        assert rep.objective == brute.objective
        assert rep.objective == rep.extra["radius"]
    else:
        assert rep.scaled_cost == brute.scaled_cost
        assert rep.objective == pytest.approx(brute.objective, rel=1e-9)
    v = rep.violations
    assert v.delta_color == 0 and v.delta_points == 0
