"""Integral min-cost max-flow over networks with arc lower bounds and node demands.

Lower bounds and node demands are removed with the usual circulation reduction
(node splitting, excess bookkeeping, a super source/sink and a free sink->source
arc). A first successive-shortest-path phase routes the forced flow at minimum
cost; a second phase keeps augmenting source->sink. Dijkstra runs on reduced
costs, so arc costs must be non-negative. The source->sink value is never
negative: a network whose bounds force net flow into the source is infeasible.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    lower: int
    capacity: int
    cost: int


@dataclass
class FlowNetwork:
    node_count: int
    source: int
    sink: int
    arcs: list[Arc] = field(default_factory=list)
    node_demand: dict[int, int] = field(default_factory=dict)

    def add_arc(self, tail: int, head: int, capacity: int, cost: int = 0, lower: int = 0) -> int:
        self.arcs.append(Arc(tail, head, lower, capacity, cost))
        return len(self.arcs) - 1

    def set_demand(self, node: int, demand: int) -> None:
        if demand:
            self.node_demand[node] = demand
        else:
            self.node_demand.pop(node, None)

    def validate(self) -> None:
        n = self.node_count
        if not (0 <= self.source < n and 0 <= self.sink < n) or self.source == self.sink:
            raise ValueError("source and sink must be distinct valid nodes")
        for idx, a in enumerate(self.arcs):
            if not (0 <= a.tail < n and 0 <= a.head < n):
                raise ValueError(f"arc {idx} has an endpoint outside the network")
            if a.lower < 0 or a.capacity < 0 or a.cost < 0:
                raise ValueError(f"arc {idx}: bounds and costs must be non-negative")
            if a.lower > a.capacity:
                raise ValueError(f"arc {idx}: lower bound {a.lower} exceeds capacity {a.capacity}")
            if not all(isinstance(v, int) for v in (a.lower, a.capacity, a.cost)):
                raise ValueError(f"arc {idx}: bounds and costs must be integers")
        for v, d in self.node_demand.items():
            if not 0 <= v < n or d < 0 or not isinstance(d, int):
                raise ValueError(f"invalid demand {d} at node {v}")


@dataclass(frozen=True)
class FlowResult:
    flow: list[int]
    total_cost: int
    value: int


class _Residual:
    """Paired residual arcs: arc ``a`` and its reverse ``a ^ 1``."""

    def __init__(self, node_count: int):
        self.n = node_count
        self.head: list[int] = []
        self.cap: list[int] = []
        self.cost: list[int] = []
        self.adj: list[list[int]] = [[] for _ in range(node_count)]

    def add_node(self) -> int:
        self.adj.append([])
        self.n += 1
        return self.n - 1

    def add(self, u: int, v: int, cap: int, cost: int) -> int:
        a = len(self.head)
        self.head += (v, u)
        self.cap += (cap, 0)
        self.cost += (cost, -cost)
        self.adj[u].append(a)
        self.adj[v].append(a + 1)
        return a

    def disable(self, a: int) -> None:
        self.cap[a] = 0
        self.cap[a ^ 1] = 0


class _Reduction:
    """The original network rewritten as a plain capacity network plus excesses."""

    def __init__(self, net: FlowNetwork):
        net.validate()
        n = net.node_count
        big = sum(a.capacity for a in net.arcs) + sum(net.node_demand.values()) + 1
        g = _Residual(n)
        # a node with a demand is split; its outgoing arcs leave from the copy
        out_node = list(range(n))
        split = {}
        for v, d in sorted(net.node_demand.items()):
            out_node[v] = g.add_node()
        self.arc_ids = []
        self.lower = []
        excess = [0] * g.n
        for a in net.arcs:
            u, w = out_node[a.tail], a.head
            self.arc_ids.append(g.add(u, w, a.capacity - a.lower, a.cost))
            self.lower.append(a.lower)
            excess[w] += a.lower
            excess[u] -= a.lower
        for v, d in sorted(net.node_demand.items()):
            split[v] = g.add(v, out_node[v], big - d, 0)
            excess[out_node[v]] += d
            excess[v] -= d
        self.source = net.source
        self.sink = out_node[net.sink]
        self.return_arc = g.add(self.sink, self.source, big, 0)
        self.super_source = g.add_node()
        self.super_sink = g.add_node()
        self.super_arcs = []
        self.required = 0
        for v in range(len(excess)):
            if excess[v] > 0:
                self.super_arcs.append(g.add(self.super_source, v, excess[v], 0))
                self.required += excess[v]
            elif excess[v] < 0:
                self.super_arcs.append(g.add(v, self.super_sink, -excess[v], 0))
        self.g = g
        self.net = net

    def arc_flows(self) -> list[int]:
        cap = self.g.cap
        return [lo + cap[a ^ 1] for lo, a in zip(self.lower, self.arc_ids)]


def _shortest_path(g: _Residual, pot: list[int], s: int, t: int):
    """Dijkstra on reduced costs; ties resolved toward the lower arc index."""
    inf = float("inf")
    n = g.n
    dist = [inf] * n
    prev = [-1] * n
    done = [False] * n
    dist[s] = 0
    heap = [(0, s)]
    head, cap, cost, adj = g.head, g.cap, g.cost, g.adj
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == t:
            break
        base = d + pot[u]
        for a in adj[u]:
            if cap[a] > 0:
                v = head[a]
                if done[v]:
                    continue
                nd = base + cost[a] - pot[v]
                dv = dist[v]
                if nd < dv:
                    dist[v] = nd
                    prev[v] = a
                    heapq.heappush(heap, (nd, v))
                elif nd == dv and a < prev[v]:
                    prev[v] = a
    if dist[t] == inf:
        return None
    dt = dist[t]
    for v in range(n):
        pot[v] += dist[v] if dist[v] < dt else dt
    return prev


def _augment_min_cost(g: _Residual, pot: list[int], s: int, t: int, limit: int | None = None):
    """Successive shortest paths from s to t; returns (flow pushed, cost of it)."""
    pushed = 0
    total = 0
    head, cap, cost = g.head, g.cap, g.cost
    while limit is None or pushed < limit:
        prev = _shortest_path(g, pot, s, t)
        if prev is None:
            break
        path = []
        v = t
        delta = limit - pushed if limit is not None else None
        while v != s:
            a = prev[v]
            path.append(a)
            if delta is None or cap[a] < delta:
                delta = cap[a]
            v = head[a ^ 1]
        for a in path:
            cap[a] -= delta
            cap[a ^ 1] += delta
            total += delta * cost[a]
        pushed += delta
    return pushed, total


def min_cost_max_flow(net: FlowNetwork) -> FlowResult | None:
    """Maximum source->sink flow of minimum cost meeting all lower bounds and demands.

    Returns ``None`` when no flow satisfies the lower bounds and node demands.
    Raises ``ValueError`` on a malformed network.
    """
    red = _Reduction(net)
    g = red.g
    pot = [0] * g.n
    if red.required:
        pushed, _ = _augment_min_cost(g, pot, red.super_source, red.super_sink)
        if pushed < red.required:
            return None
    for a in red.super_arcs:
        g.disable(a)
    g.disable(red.return_arc)
    _augment_min_cost(g, pot, red.source, red.sink)
    flow = red.arc_flows()
    total = sum(f * a.cost for f, a in zip(flow, net.arcs))
    value = sum(f for f, a in zip(flow, net.arcs) if a.tail == net.source) - sum(
        f for f, a in zip(flow, net.arcs) if a.head == net.source)
    return FlowResult(flow, total, value)


def _max_flow(g: _Residual, s: int, t: int, limit: int) -> int:
    """Dinic blocking flows, stopping once ``limit`` units are routed."""
    head, cap, adj = g.head, g.cap, g.adj
    total = 0
    while total < limit:
        level = [-1] * g.n
        level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for a in adj[u]:
                if cap[a] > 0 and level[head[a]] < 0:
                    level[head[a]] = level[u] + 1
                    q.append(head[a])
        if level[t] < 0:
            break
        it = [0] * g.n
        while total < limit:
            # iterative DFS for one augmenting path in the level graph
            stack = [s]
            arcs: list[int] = []
            while stack:
                u = stack[-1]
                if u == t:
                    break
                advanced = False
                while it[u] < len(adj[u]):
                    a = adj[u][it[u]]
                    v = head[a]
                    if cap[a] > 0 and level[v] == level[u] + 1:
                        stack.append(v)
                        arcs.append(a)
                        advanced = True
                        break
                    it[u] += 1
                if not advanced:
                    stack.pop()
                    if arcs:
                        arcs.pop()
                        it[stack[-1]] += 1
                    level[u] = -1
            if not stack:
                break
            delta = min(min(cap[a] for a in arcs), limit - total)
            for a in arcs:
                cap[a] -= delta
                cap[a ^ 1] += delta
            total += delta
    return total


def max_flow_feasible(net: FlowNetwork) -> bool:
    """True iff some flow meets every lower bound and node demand (costs ignored)."""
    red = _Reduction(net)
    if not red.required:
        return True
    return _max_flow(red.g, red.super_source, red.super_sink, red.required) == red.required


def feasible_flow(net: FlowNetwork) -> list[int] | None:
    """Per-arc flow of some feasible flow, or ``None``; costs ignored."""
    red = _Reduction(net)
    if red.required and _max_flow(red.g, red.super_source, red.super_sink, red.required) < red.required:
        return None
    return red.arc_flows()
