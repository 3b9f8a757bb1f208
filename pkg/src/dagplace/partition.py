"""Edge-score driven graph partitioning and pooling.

Each edge gets a sigmoid score from the embeddings of its endpoints. Every
node retains only its single highest-scoring incident edge (counting both
directions), and the weakly connected components of the retained edge set
become the clusters. Pooling contracts clusters into super-nodes: cluster
adjacency is the binarized lift of the node adjacency, cluster features are
the sums of member rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autograd import Tape, Tensor
from .nn import Mlp, mlp_forward


@dataclass
class EdgeScores:
    """Scores in (0, 1), one per edge, aligned with `edges` order."""

    edges: tuple[tuple[int, int], ...]
    tensor: Tensor  # |E| x 1, on tape

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {e: float(s) for e, s in zip(self.edges, self.tensor.data[:, 0])}


@dataclass
class AssignMatrix:
    """Node-to-cluster map: membership[v] is the cluster id of node v.

    Every node belongs to exactly one cluster and every cluster id in
    [0, num_clusters) is used.
    """

    membership: np.ndarray
    num_clusters: int

    def __post_init__(self):
        self.membership = np.asarray(self.membership, dtype=np.intp)
        used = np.unique(self.membership)
        if self.membership.size and (
            used[0] < 0 or used[-1] >= self.num_clusters or len(used) != self.num_clusters
        ):
            raise ValueError("cluster ids must cover 0..num_clusters-1 exactly")

    @property
    def matrix(self) -> np.ndarray:
        m = np.zeros((len(self.membership), self.num_clusters), dtype=np.float64)
        m[np.arange(len(self.membership)), self.membership] = 1.0
        return m

    def compose(self, finer: "AssignMatrix") -> "AssignMatrix":
        """Map this assignment's source nodes through a further coarsening."""
        return AssignMatrix(finer.membership[self.membership], finer.num_clusters)


@dataclass
class PooledGraph:
    """Cluster-level digraph; may contain 2-cycles even when the input is a DAG."""

    adjacency: np.ndarray
    features: np.ndarray
    num_nodes: int = field(init=False)

    def __post_init__(self):
        self.num_nodes = self.adjacency.shape[0]

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        rows, cols = np.nonzero(self.adjacency)
        return tuple(zip(rows.tolist(), cols.tolist()))

    def two_cycle_pairs(self) -> int:
        both = np.logical_and(self.adjacency > 0, self.adjacency.T > 0)
        return int(np.triu(both, k=1).sum())


def score_edges(tape: Tape, z: Tensor, graph, phi: Mlp) -> EdgeScores:
    """sigmoid(phi(z_src * z_dst)) for every edge of `graph`.

    `graph` needs `.edges` and `.num_nodes`; self-loops are never scored
    because valid graphs have none.
    """
    edges = tuple(graph.edges)
    if not edges:
        return EdgeScores(edges, Tensor(np.zeros((0, 1))))
    src = [u for u, _ in edges]
    dst = [v for _, v in edges]
    pair = tape.mul(tape.gather_rows(z, src), tape.gather_rows(z, dst))
    raw = mlp_forward(tape, pair, phi)
    return EdgeScores(edges, tape.sigmoid(raw))


def drop_edges(
    scores: EdgeScores, rate: float, rng: np.random.Generator | None
) -> EdgeScores:
    """Randomly exclude edges from retention (training-time regularizer)."""
    if rate <= 0.0 or rng is None or not scores.edges:
        return scores
    keep = rng.random(len(scores.edges)) >= rate
    if keep.all():
        return scores
    kept = tuple(e for e, k in zip(scores.edges, keep) if k)
    return EdgeScores(kept, Tensor(scores.tensor.data[keep]))


def retain_dominant_edges(scores: EdgeScores, graph) -> tuple[tuple[int, int], ...]:
    """Keep, for each node, its highest-scoring incident edge (either direction).

    Score ties prefer the edge with the smaller source id, then smaller
    destination id. The union over nodes has at most |V| edges.
    """
    best: dict[int, tuple[float, tuple[int, int]]] = {}
    for edge, s in zip(scores.edges, scores.tensor.data[:, 0]):
        s = float(s)
        for node in edge:
            cur = best.get(node)
            if cur is None or s > cur[0] or (s == cur[0] and edge < cur[1]):
                best[node] = (s, edge)
    return tuple(sorted({e for _, e in best.values()}))


def parse_clusters(retained, graph) -> AssignMatrix:
    """Weakly connected components of the retained edges as clusters.

    Isolated nodes become singleton clusters. Cluster ids follow the
    ascending minimum member node id, so the result is independent of the
    order in which retained edges are supplied.
    """
    n = graph.num_nodes
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in retained:
        ru, rv = find(u), find(v)
        if ru != rv:
            # keep the smaller id as root so min-member ordering is direct
            if ru < rv:
                parent[rv] = ru
            else:
                parent[ru] = rv
    roots = [find(v) for v in range(n)]
    ordering = {r: i for i, r in enumerate(sorted(set(roots)))}
    membership = np.array([ordering[r] for r in roots], dtype=np.intp)
    return AssignMatrix(membership, len(ordering))


def pool(assign: AssignMatrix, adjacency: np.ndarray, z: np.ndarray) -> PooledGraph:
    """Contract clusters: lifted adjacency (binarized, zero diagonal) and
    summed feature rows."""
    x = assign.matrix
    lifted = x.T @ np.asarray(adjacency, dtype=np.float64) @ x
    np.fill_diagonal(lifted, 0.0)
    pooled_adj = (lifted > 0).astype(np.float64)
    features = x.T @ np.asarray(z, dtype=np.float64)
    return PooledGraph(pooled_adj, features)


def pool_features(tape: Tape, z: Tensor, assign: AssignMatrix) -> Tensor:
    """Differentiable cluster feature sums (gradient flows to member rows)."""
    return tape.scatter_add_rows(z, assign.membership, assign.num_clusters)
