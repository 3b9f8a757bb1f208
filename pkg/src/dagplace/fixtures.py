"""Synthetic computation graphs and cost models for experiments and tests.

Generators mirror the sparsity of real model graphs (average degree around
1.05) and produce cost models with documented heterogeneity: device 1 is
faster on a random half of the op types, transfer costs are symmetric.
The named fixtures at the bottom have hand-analyzed optima used as oracles.
"""

from __future__ import annotations

import numpy as np

from .graph import CompGraph, make_graph
from .simulator import CostModel


def _random_shape(rng: np.random.Generator) -> tuple[int, ...]:
    return tuple(int(s) for s in rng.integers(1, 9, size=int(rng.integers(1, 4))))


def _nodes(rng: np.random.Generator, n: int, num_op_types: int):
    return [
        (v, int(rng.integers(0, num_op_types)), _random_shape(rng))
        for v in range(n)
    ]


def chain_graph(n: int, num_op_types: int = 8, seed: int = 0) -> CompGraph:
    """Path 0 -> 1 -> ... -> n-1 with random types and shapes."""
    if n < 1:
        raise ValueError("need at least one node")
    rng = np.random.default_rng(seed)
    return make_graph(
        _nodes(rng, n, num_op_types),
        [(i, i + 1) for i in range(n - 1)],
        num_op_types,
    )


def diamond_chain_graph(n: int, num_op_types: int = 8, seed: int = 0) -> CompGraph:
    """Chained 4-node diamonds (split, two branches, merge); 1 + 3k nodes
    for the k closest to the requested size."""
    if n < 1:
        raise ValueError("need at least one node")
    rng = np.random.default_rng(seed)
    k = max(1, round((n - 1) / 3))
    edges = []
    src, next_id = 0, 1
    for _ in range(k):
        b1, b2, merge = next_id, next_id + 1, next_id + 2
        next_id += 3
        edges += [(src, b1), (src, b2), (b1, merge), (b2, merge)]
        src = merge
    return make_graph(_nodes(rng, next_id, num_op_types), edges, num_op_types)


def random_dag(
    n: int,
    seed: int = 0,
    num_edges: int | None = None,
    avg_degree: float = 1.05,
    num_op_types: int = 8,
) -> CompGraph:
    """Random DAG with an exact edge count (default round(avg_degree * n)).

    Edges are sampled without replacement among pairs ordered by a hidden
    random topological labeling, so acyclicity is structural.
    """
    if n < 1:
        raise ValueError("need at least one node")
    rng = np.random.default_rng(seed)
    max_edges = n * (n - 1) // 2
    m = round(avg_degree * n) if num_edges is None else num_edges
    m = min(m, max_edges)
    perm = rng.permutation(n)
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < m:
        u, v = int(rng.integers(0, n)), int(rng.integers(0, n))
        if u == v:
            continue
        lo, hi = (u, v) if u < v else (v, u)
        chosen.add((int(perm[lo]), int(perm[hi])))
    return make_graph(_nodes(rng, n, num_op_types), sorted(chosen), num_op_types)


def inception_like(n: int, seed: int = 0, num_op_types: int = 8) -> CompGraph:
    """Branch-and-concatenate blocks interleaved with linear stems.

    Every block splits into two branches (length 2-4) that merge in a
    concatenation node, so with at least one block the average degree lands
    in [1.0, 1.2). Node count may overshoot the request by a few nodes.
    """
    if n < 1:
        raise ValueError("need at least one node")
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int]] = []
    tail, next_id = 0, 1
    first = True
    while next_id < n:
        if first or rng.random() >= 0.4:
            branch_ends = []
            for length in rng.integers(2, 5, size=2):
                prev = tail
                for _ in range(int(length)):
                    edges.append((prev, next_id))
                    prev = next_id
                    next_id += 1
                branch_ends.append(prev)
            concat = next_id
            next_id += 1
            edges += [(end, concat) for end in branch_ends]
            tail = concat
        else:
            for _ in range(int(rng.integers(2, 5))):
                edges.append((tail, next_id))
                tail = next_id
                next_id += 1
        first = False
    return make_graph(_nodes(rng, next_id, num_op_types), edges, num_op_types)


def random_cost_model(
    num_op_types: int, num_devices: int = 2, seed: int = 0
) -> CostModel:
    """Device 0 costs are uniform in [0.5, 2.0); every other device is
    2-4x faster on its own random half of the op types and 1.2-2x slower
    on the rest. Transfer cost is one symmetric per-unit rate."""
    if num_op_types < 1 or num_devices < 2:
        raise ValueError("need >= 1 op type and >= 2 devices")
    rng = np.random.default_rng(seed)
    base = rng.uniform(0.5, 2.0, size=num_op_types)
    compute = np.empty((num_op_types, num_devices))
    compute[:, 0] = base
    for d in range(1, num_devices):
        fast = rng.choice(num_op_types, size=num_op_types // 2, replace=False)
        col = base * rng.uniform(1.2, 2.0, size=num_op_types)
        col[fast] = base[fast] / rng.uniform(2.0, 4.0, size=len(fast))
        compute[:, d] = col
    transfer = np.full((num_devices, num_devices), float(rng.uniform(0.005, 0.02)))
    np.fill_diagonal(transfer, 0.0)
    return CostModel(compute, transfer)


def dominant_device_fixture() -> tuple[CompGraph, CostModel]:
    """Device 1 is strictly faster on every op type and transfer is free,
    so all-device-1 is the unique optimal placement: moving any node to
    device 0 adds more cost than its path slack."""
    graph = make_graph(
        [
            (0, 0, (2, 2)),
            (1, 1, (2, 2)),
            (2, 2, (2, 2)),
            (3, 1, (2, 2)),
            (4, 0, (2, 2)),
            (5, 2, (2, 2)),
        ],
        [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (4, 5)],
        num_op_types=3,
    )
    cm = CostModel(
        compute=[[1.0, 0.5], [1.5, 0.75], [2.0, 1.0]],
        transfer=[[0.0, 0.0], [0.0, 0.0]],
    )
    return graph, cm


def split_fixture() -> tuple[CompGraph, CostModel]:
    """Two parallel 4-node arms between a source and a sink; arm types have
    opposite device affinities, so the optimum splits the arms (latency 5.1
    with source on device 0 and sink on device 1) while any single-device
    placement pays 13.0."""
    types = [0, 1, 1, 1, 1, 2, 2, 2, 2, 0]
    graph = make_graph(
        [(v, types[v], (1,)) for v in range(10)],
        [(0, 1), (1, 2), (2, 3), (3, 4), (4, 9),
         (0, 5), (5, 6), (6, 7), (7, 8), (8, 9)],
        num_op_types=3,
    )
    cm = CostModel(
        compute=[[0.5, 0.5], [1.0, 3.0], [3.0, 1.0]],
        transfer=[[0.0, 0.1], [0.1, 0.0]],
    )
    return graph, cm


def hand_solved_fixture() -> tuple[CompGraph, CostModel, np.ndarray, float]:
    """Two chained diamonds whose branch types force opposite devices.

    Branch nodes must sit on their fast device (1.0 vs 4.0). Each diamond
    then spans max over branches of in-transfer + 1.0 + out-transfer, which
    is 1.05 when split and at least 1.1 otherwise, giving the latency lower
    bound 4 * 0.2 + 2 * 1.05 = 2.9. The placement below is the only one
    starting on device 0 that reaches it, so it is the lexicographically
    smallest optimum.
    """
    types = [0, 1, 2, 0, 1, 2, 0, 0]
    graph = make_graph(
        [(v, types[v], (1,)) for v in range(8)],
        [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 6), (5, 6), (6, 7)],
        num_op_types=3,
    )
    cm = CostModel(
        compute=[[0.2, 0.2], [1.0, 4.0], [4.0, 1.0]],
        transfer=[[0.0, 0.05], [0.05, 0.0]],
    )
    optimal = np.array([0, 0, 1, 1, 0, 1, 0, 0], dtype=np.intp)
    return graph, cm, optimal, 2.9
