import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairlabel.flow import FlowNetwork, feasible_flow, max_flow_feasible, min_cost_max_flow


def diamond():
    net = FlowNetwork(3, 0, 2)
    net.add_arc(0, 1, 2, 0)
    net.add_arc(1, 2, 1, 1)
    net.add_arc(1, 2, 2, 3)
    return net


def test_single_arc():
    net = FlowNetwork(2, 0, 1)
    net.add_arc(0, 1, 5)
    res = min_cost_max_flow(net)
    assert (res.flow, res.total_cost, res.value) == ([5], 0, 5)


def test_diamond():
    res = min_cost_max_flow(diamond())
    assert (res.flow, res.total_cost, res.value) == ([2, 1, 1], 4, 2)


def test_lower_bound_above_capacity_is_structural_error():
    net = FlowNetwork(2, 0, 1)
    net.add_arc(0, 1, 2, lower=3)
    with pytest.raises(ValueError):
        min_cost_max_flow(net)
    with pytest.raises(ValueError):
        max_flow_feasible(net)


def test_negative_cost_rejected():
    net = FlowNetwork(2, 0, 1)
    net.add_arc(0, 1, 2, cost=-1)
    with pytest.raises(ValueError):
        min_cost_max_flow(net)


def test_demand_beyond_supply_is_infeasible():
    # three sources of one unit feed a label node that demands four
    net = FlowNetwork(6, 0, 5)
    for p in (1, 2, 3):
        net.add_arc(0, p, 1)
        net.add_arc(p, 4, 1)
    net.add_arc(4, 5, 4)
    net.set_demand(4, 4)
    assert min_cost_max_flow(net) is None
    assert not max_flow_feasible(net)
    assert feasible_flow(net) is None
    net.set_demand(4, 3)
    assert max_flow_feasible(net)
    assert min_cost_max_flow(net).value == 3


def test_empty_network_is_feasible():
    net = FlowNetwork(2, 0, 1)
    assert max_flow_feasible(net)
    res = min_cost_max_flow(net)
    assert (res.flow, res.total_cost, res.value) == ([], 0, 0)


def test_lower_bound_forces_expensive_arc():
    net = FlowNetwork(3, 0, 2)
    net.add_arc(0, 1, 2)
    net.add_arc(1, 2, 2, cost=1)
    net.add_arc(1, 2, 2, cost=5, lower=1)
    res = min_cost_max_flow(net)
    assert res.flow == [2, 1, 1] and res.total_cost == 6


def brute_force(net: FlowNetwork):
    """Exhaustive search over integral arc flows: (value, cost) of the min-cost max flow."""
    arcs = net.arcs
    if not arcs:
        return None if any(net.node_demand.values()) else (0, 0)
    grids = [np.arange(a.lower, a.capacity + 1) for a in arcs]
    flows = np.array(np.meshgrid(*grids, indexing="ij")).reshape(len(arcs), -1).T
    inc = np.zeros((net.node_count, len(arcs)), dtype=np.int64)
    into = np.zeros_like(inc)
    for idx, a in enumerate(arcs):
        inc[a.tail, idx] -= 1
        inc[a.head, idx] += 1
        into[a.head, idx] += 1
    balance = flows @ inc.T
    inflow = flows @ into.T
    ok = np.ones(len(flows), dtype=bool)
    for v in range(net.node_count):
        if v not in (net.source, net.sink):
            ok &= balance[:, v] == 0
        ok &= inflow[:, v] >= net.node_demand.get(v, 0)
    ok &= balance[:, net.source] <= 0
    if not ok.any():
        return None
    value = -balance[ok, net.source]
    cost = flows[ok] @ np.array([a.cost for a in arcs])
    best = value.max()
    return int(best), int(cost[value == best].min())


def test_negative_source_value_is_infeasible():
    # a forced sink->source unit would need a negative flow value
    net = FlowNetwork(2, 0, 1)
    net.add_arc(1, 0, 1, lower=1)
    assert min_cost_max_flow(net) is None
    assert not max_flow_feasible(net)
    assert brute_force(net) is None


@st.composite
def small_networks(draw):
    nodes = draw(st.integers(2, 8))
    count = draw(st.integers(0, 12))
    net = FlowNetwork(nodes, 0, nodes - 1)
    for _ in range(count):
        u = draw(st.integers(0, nodes - 1))
        v = draw(st.integers(0, nodes - 1).filter(lambda x: x != u))
        cap = draw(st.integers(0, 2))
        lower = draw(st.integers(0, cap)) if draw(st.integers(0, 3)) == 0 else 0
        net.add_arc(u, v, cap, draw(st.integers(0, 6)), lower)
    for v in range(1, nodes - 1):
        if draw(st.integers(0, 4)) == 0:
            net.set_demand(v, draw(st.integers(1, 2)))
    return net


@settings(max_examples=150, deadline=None)
@given(small_networks())
def test_matches_exhaustive_enumeration(net):
    expected = brute_force(net)
    res = min_cost_max_flow(net)
    assert max_flow_feasible(net) == (expected is not None)
    if expected is None:
        assert res is None
        return
    assert (res.value, res.total_cost) == expected
    # integrality, bounds and conservation
    assert all(isinstance(f, int) for f in res.flow)
    assert all(a.lower <= f <= a.capacity for f, a in zip(res.flow, net.arcs))
    bal = [0] * net.node_count
    for f, a in zip(res.flow, net.arcs):
        bal[a.tail] -= f
        bal[a.head] += f
    assert all(bal[v] == 0 for v in range(net.node_count) if v not in (net.source, net.sink))
    witness = feasible_flow(net)
    assert witness is not None
    assert all(a.lower <= f <= a.capacity for f, a in zip(witness, net.arcs))


@settings(max_examples=30, deadline=None)
@given(small_networks())
def test_deterministic(net):
    a, b = min_cost_max_flow(net), min_cost_max_flow(net)
    assert a == b


def test_tie_break_prefers_lower_arc_index():
    net = FlowNetwork(3, 0, 2)
    net.add_arc(0, 1, 1, 1)
    net.add_arc(0, 1, 1, 1)
    net.add_arc(1, 2, 1, 0)
    assert min_cost_max_flow(net).flow == [1, 0, 1]
