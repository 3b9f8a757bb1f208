"""Shared test oracles: finite differences and independent reimplementations."""

from __future__ import annotations

import numpy as np

from dagplace.graph import CompGraph


def central_difference(f, tensors, h: float = 1e-5) -> list[np.ndarray]:
    """d f() / d t for every entry of every tensor, by central differences.

    `f` must recompute the scalar loss from the tensors' current `.data`;
    entries are perturbed in place and restored.
    """
    grads = []
    for t in tensors:
        g = np.zeros_like(t.data)
        flat = t.data.ravel()
        gf = g.ravel()
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + h
            hi = f()
            flat[i] = keep - h
            lo = f()
            flat[i] = keep
            gf[i] = (hi - lo) / (2.0 * h)
        grads.append(g)
    return grads


def max_rel_err(analytic, numeric, floor: float = 1e-6) -> float:
    """Largest entrywise relative error, with a denominator floor so that
    finite-difference noise around zero entries does not register."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def longest_path_latency(graph: CompGraph, placement, cm) -> float:
    """Independent simulator oracle: memoized recursion over predecessors
    instead of a forward topological sweep."""
    from dagplace.simulator import volume

    placement = np.asarray(placement, dtype=np.intp)
    preds = graph.predecessors()
    memo: dict[int, float] = {}

    def finish(v: int) -> float:
        if v in memo:
            return memo[v]
        start = 0.0
        for u in preds[v]:
            arrival = finish(u) + cm.transfer[placement[u], placement[v]] * volume(
                graph.nodes[u].output_shape
            )
            start = max(start, arrival)
        memo[v] = start + cm.compute[graph.nodes[v].op_type, placement[v]]
        return memo[v]

    return max((finish(v) for v in range(graph.num_nodes)), default=0.0)


def fractal_dimension_oracle(graph: CompGraph, v: int) -> float:
    """Independent fractal-dimension oracle: Floyd-Warshall distances plus
    a polyfit regression instead of BFS plus explicit covariance sums."""
    n = graph.num_nodes
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for a, b in graph.edges:
        dist[a, b] = 1.0
        dist[b, a] = 1.0
    for k in range(n):
        dist = np.minimum(dist, dist[:, k, None] + dist[None, k, :])
    reach = [dist[v, u] for u in range(n) if u != v and np.isfinite(dist[v, u])]
    radii = sorted(set(reach))
    if len(radii) < 2:
        return 0.0
    counts = [sum(1 for d in reach if d <= r) for r in radii]
    slope = np.polyfit(np.log(radii), np.log(counts), 1)[0]
    return float(slope)


def pooled_adjacency_oracle(assign, adjacency) -> np.ndarray:
    """Brute-force cluster-pair scan for the coarse adjacency."""
    k = assign.num_clusters
    members = [np.nonzero(assign.membership == c)[0] for c in range(k)]
    out = np.zeros((k, k))
    a = np.asarray(adjacency)
    for i in range(k):
        for j in range(k):
            if i != j and a[np.ix_(members[i], members[j])].any():
                out[i, j] = 1.0
    return out
