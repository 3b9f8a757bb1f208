"""Computation-graph data model: validation, topological order, co-location.

A computation graph is a labeled DAG whose nodes are tensor operations and
whose edges are data dependencies. Node ids are dense integers 0..n-1,
each node carries an operation-type index and an output shape.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class GraphError(Exception):
    """Base class for computation-graph validation failures."""


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class DanglingEdge(GraphError):
    """An edge endpoint does not name an existing node id."""


class InvalidNode(GraphError):
    """Node ids are not dense 0..n-1, or a node field is out of range."""


class CycleDetected(GraphError):
    def __init__(self, cycle: list[int]):
        super().__init__(f"graph contains a cycle: {' -> '.join(map(str, cycle))}")
        self.cycle = cycle


@dataclass(frozen=True)
class OpNode:
    """One operation: dense id, op-type index, tensor output shape."""

    id: int
    op_type: int
    output_shape: tuple[int, ...] = ()


@dataclass
class CompGraph:
    """Directed acyclic operation graph.

    `num_op_types` is the size of the op-type vocabulary shared by the
    graph collection; every node's op_type must be below it.
    """

    nodes: tuple[OpNode, ...]
    edges: tuple[tuple[int, int], ...]
    num_op_types: int

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        """Dense binary adjacency matrix A with A[u, v] = 1 iff (u, v) is an edge."""
        a = np.zeros((self.num_nodes, self.num_nodes), dtype=np.float64)
        for u, v in self.edges:
            a[u, v] = 1.0
        return a

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for u, v in self.edges:
            out[u].append(v)
        return out

    def predecessors(self) -> list[list[int]]:
        inc: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for u, v in self.edges:
            inc[v].append(u)
        return inc

    def in_degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        for _, v in self.edges:
            deg[v] += 1
        return deg

    def out_degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        for u, _ in self.edges:
            deg[u] += 1
        return deg


def make_graph(
    nodes: list[OpNode] | list[tuple[int, int, tuple[int, ...]]],
    edges: list[tuple[int, int]],
    num_op_types: int,
) -> CompGraph:
    """Construct and validate a CompGraph; nodes may be OpNode or (id, type, shape)."""
    built = tuple(
        n if isinstance(n, OpNode) else OpNode(n[0], n[1], tuple(n[2]))
        for n in nodes
    )
    g = CompGraph(built, tuple((int(u), int(v)) for u, v in edges), num_op_types)
    validate(g)
    return g


def validate(graph: CompGraph) -> None:
    """Check every CompGraph invariant; raise the matching GraphError.

    Checks, in order: dense node ids, op-type bounds, edge endpoints,
    self-loops, duplicate edges, acyclicity.
    """
    n = graph.num_nodes
    ids = sorted(node.id for node in graph.nodes)
    if ids != list(range(n)):
        raise InvalidNode(f"node ids must be exactly 0..{n - 1}, got {ids}")
    for node in graph.nodes:
        if not 0 <= node.op_type < graph.num_op_types:
            raise InvalidNode(
                f"node {node.id} op_type {node.op_type} outside "
                f"[0, {graph.num_op_types})"
            )
        if any(s < 0 for s in node.output_shape):
            raise InvalidNode(f"node {node.id} has negative output_shape entry")
    seen: set[tuple[int, int]] = set()
    for u, v in graph.edges:
        if not (0 <= u < n and 0 <= v < n):
            raise DanglingEdge(f"edge ({u}, {v}) references a missing node id")
        if u == v:
            raise SelfLoop(f"self-loop on node {u}")
        if (u, v) in seen:
            raise DuplicateEdge(f"duplicate edge ({u}, {v})")
        seen.add((u, v))
    topo_sort(graph)  # raises CycleDetected on cyclic input


@dataclass(frozen=True)
class TopoOrder:
    """A topological order and its inverse (node id -> position)."""

    order: tuple[int, ...]
    rank: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.rank:
            r = [0] * len(self.order)
            for pos, v in enumerate(self.order):
                r[v] = pos
            object.__setattr__(self, "rank", tuple(r))


def topo_sort(graph: CompGraph) -> TopoOrder:
    """Kahn's algorithm with a min-id frontier, so the order is deterministic."""
    n = graph.num_nodes
    indeg = [0] * n
    succ = graph.successors()
    for _, v in graph.edges:
        indeg[v] += 1
    frontier = [v for v in range(n) if indeg[v] == 0]
    heapq.heapify(frontier)
    order: list[int] = []
    while frontier:
        v = heapq.heappop(frontier)
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(frontier, w)
    if len(order) < n:
        raise CycleDetected(_find_cycle(graph, {v for v in range(n) if indeg[v] > 0}))
    return TopoOrder(tuple(order))


def _find_cycle(graph: CompGraph, remaining: set[int]) -> list[int]:
    """Walk successor links inside the unresolvable node set until a repeat."""
    succ = graph.successors()
    start = min(remaining)
    path = [start]
    seen = {start: 0}
    v = start
    while True:
        v = next(w for w in succ[v] if w in remaining)
        if v in seen:
            return path[seen[v]:] + [v]
        seen[v] = len(path)
        path.append(v)


def colocate(graph: CompGraph) -> tuple[CompGraph, list[int]]:
    """Merge sole-parent/sole-child chains into single coarse nodes.

    Scanning nodes in topological order, v and its successor w fall into the
    same co-location set when w is the only out-neighbor of v and v is the
    only in-neighbor of w; merging is transitive along such chains. A merged
    set keeps the rounded mean of its members' op_type indices (ties round
    down) and the output shape of its topologically last member. One pass
    reaches the fixed point: each set is a path whose interior endpoints have
    no other edges, so contraction never creates new mergeable pairs.

    Returns the coarse graph and a membership list mapping node id to
    coarse id; coarse ids are numbered by ascending minimum member id.
    """
    n = graph.num_nodes
    order = topo_sort(graph)
    out_deg = graph.out_degrees()
    in_deg = graph.in_degrees()
    succ = graph.successors()

    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for v in order.order:
        if out_deg[v] == 1:
            (w,) = succ[v]
            if in_deg[w] == 1:
                parent[find(w)] = find(v)

    members: dict[int, list[int]] = {}
    for v in range(n):
        members.setdefault(find(v), []).append(v)
    roots = sorted(members, key=lambda r: min(members[r]))
    coarse_of_root = {r: i for i, r in enumerate(roots)}
    membership = [coarse_of_root[find(v)] for v in range(n)]

    coarse_nodes = []
    for i, r in enumerate(roots):
        group = members[r]
        type_sum = sum(graph.nodes[v].op_type for v in group)
        base, rem = divmod(type_sum, len(group))
        op_type = base + 1 if 2 * rem > len(group) else base  # half rounds down
        last = max(group, key=lambda v: order.rank[v])
        coarse_nodes.append(OpNode(i, op_type, graph.nodes[last].output_shape))

    coarse_edges = sorted(
        {
            (membership[u], membership[v])
            for u, v in graph.edges
            if membership[u] != membership[v]
        }
    )
    coarse = CompGraph(tuple(coarse_nodes), tuple(coarse_edges), graph.num_op_types)
    validate(coarse)
    return coarse, membership


def load_graph(path: str | Path) -> CompGraph:
    """Read a graph JSON file and validate it.

    Schema: {"num_op_types": int,
             "nodes": [{"id": int, "op_type": int, "output_shape": [int, ...]}],
             "edges": [[src, dst], ...]}
    """
    with open(path) as fh:
        data = json.load(fh)
    try:
        nodes = [
            OpNode(int(n["id"]), int(n["op_type"]), tuple(int(s) for s in n["output_shape"]))
            for n in data["nodes"]
        ]
        edges = [(int(u), int(v)) for u, v in data["edges"]]
        num_op_types = int(data["num_op_types"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidNode(f"malformed graph file {path}: {exc}") from exc
    nodes.sort(key=lambda node: node.id)
    g = CompGraph(tuple(nodes), tuple(edges), num_op_types)
    validate(g)
    return g


def save_graph(graph: CompGraph, path: str | Path) -> None:
    data = {
        "num_op_types": graph.num_op_types,
        "nodes": [
            {"id": n.id, "op_type": n.op_type, "output_shape": list(n.output_shape)}
            for n in graph.nodes
        ],
        "edges": [[u, v] for u, v in graph.edges],
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")
