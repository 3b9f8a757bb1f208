"""REINFORCE training loop over an iteratively coarsened placement state.

Each step encodes the current graph (the original one, or the pooled result
of earlier steps), parses it into clusters, samples one device per cluster,
lifts the choice to the original nodes through the composed assignment
matrices, and scores it with the latency simulator. Records accumulate in a
buffer of `update_timestep` steps; an update then rebuilds the surrogate
loss -sum_i log_prob_i * gamma^i * reward_i under the current parameters
`k_epochs` times, stepping Adam after each rebuild. When parsing collapses
the state to a single cluster the state resets to the original graph, with
the accumulated per-node embeddings as its features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autograd import Adam, Tape, Tensor
from .encoder import (
    GcnParams,
    encode,
    init_gcn,
    init_projection,
    normalize_adjacency,
)
from .features import FeatureConfig, FeatureMatrix, build_features
from .graph import CompGraph, topo_sort
from .nn import init_mlp, mlp_forward
from .partition import (
    AssignMatrix,
    PooledGraph,
    drop_edges,
    parse_clusters,
    pool,
    pool_features,
    retain_dominant_edges,
    score_edges,
)
from .policy import (
    device_distribution,
    greedy_placement,
    init_placer,
    lift_placement,
    log_prob_of,
    sample_placement,
)
from .simulator import CostModel, MissingCost, reward, simulate


class EmptyBuffer(Exception):
    pass


@dataclass(frozen=True)
class ModelConfig:
    """Network hyperparameters shared by the encoder, parser, and placer."""

    hidden_channel: int = 128
    layer_gnn: int = 2
    layer_trans: int = 2
    layer_parsingnet: int = 2
    dropout_network: float = 0.2
    dropout_parsing: float = 0.0
    link_ignore_self_loop: bool = True

    def __post_init__(self):
        for name in ("hidden_channel", "layer_gnn", "layer_trans", "layer_parsingnet"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("dropout_network", "dropout_parsing"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValueError(f"{name} must be in [0, 1)")
        if not self.link_ignore_self_loop:
            # pooling always zeroes the coarse diagonal, so scored edge sets
            # never contain self-loops; scoring them is not supported
            raise ValueError("link_ignore_self_loop=False is not supported")


@dataclass(frozen=True)
class TrainConfig:
    """Loop hyperparameters. `target_latency` adds an optional convergence
    stop: training ends once the best sampled latency reaches it."""

    max_episodes: int = 100
    update_timestep: int = 20
    k_epochs: int = 4
    gamma: float = 0.99
    learning_rate: float = 1e-4
    seed: int = 0
    use_baseline: bool = False
    target_latency: float | None = None

    def __post_init__(self):
        if self.max_episodes < 1 or self.update_timestep < 1 or self.k_epochs < 1:
            raise ValueError("max_episodes, update_timestep, k_epochs must be >= 1")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.target_latency is not None and self.target_latency <= 0:
            raise ValueError("target_latency must be positive")


@dataclass
class StepRecord:
    """One buffered interaction plus the frozen state needed to rebuild its
    log-probability under later parameters."""

    step_index: int
    log_prob: float
    reward: float
    latency: float
    num_clusters: int
    norm: np.ndarray
    features: np.ndarray
    use_projection: bool
    assign: AssignMatrix
    action: np.ndarray


@dataclass(frozen=True)
class HistoryRow:
    step: int
    episode: int
    latency: float
    reward: float
    num_clusters: int


@dataclass(frozen=True)
class TrainResult:
    best_placement: np.ndarray
    best_latency: float
    history: tuple[HistoryRow, ...]
    episodes: int
    two_cycle_pairs: int


def _identity_assign(n: int) -> AssignMatrix:
    return AssignMatrix(np.arange(n, dtype=np.intp), n)


class Trainer:
    """Owns the parameters, optimizer, RNG streams, and the evolving state.

    RNG streams are spawned from the single config seed in a fixed order
    (init, dropout, edge drop, action sampling), so runs with equal seed and
    config replay identically.
    """

    def __init__(
        self,
        graph: CompGraph,
        cm: CostModel,
        cfg: TrainConfig = TrainConfig(),
        model: ModelConfig = ModelConfig(),
        features: FeatureConfig = FeatureConfig(),
    ):
        if graph.num_nodes == 0:
            raise ValueError("cannot train on an empty graph")
        if cm.num_devices < 2:
            raise ValueError("training needs at least 2 devices")
        worst_type = max(node.op_type for node in graph.nodes)
        if worst_type >= cm.num_op_types:
            raise MissingCost(
                f"cost model covers {cm.num_op_types} op types, "
                f"graph uses type {worst_type}"
            )
        self.graph = graph
        self.cm = cm
        self.cfg = cfg
        self.model = model
        self.topo = topo_sort(graph)
        self.x0: FeatureMatrix = build_features(graph, features)

        streams = np.random.SeedSequence(cfg.seed).spawn(4)
        self.init_rng, self.dropout_rng, self.parsing_rng, self.action_rng = (
            np.random.default_rng(s) for s in streams
        )

        hidden = model.hidden_channel
        self.projection = init_projection(
            self.init_rng, self.x0.layout.total, hidden, model.layer_trans
        )
        self.gcn: GcnParams = init_gcn(self.init_rng, [hidden] * (model.layer_gnn + 1))
        self.phi = init_mlp(self.init_rng, [hidden] * model.layer_parsingnet + [1])
        self.placer = init_placer(self.init_rng, hidden, hidden, cm.num_devices)
        self.adam = Adam(self.parameters(), lr=cfg.learning_rate)

        self.z_acc = np.zeros((graph.num_nodes, hidden))
        self.buffer: list[StepRecord] = []
        self.best_placement: np.ndarray | None = None
        self.best_latency = float("inf")
        self.two_cycle_pairs = 0

        self.state_adjacency = graph.adjacency()
        self.state_features = self.x0.values
        self.state_projects = True
        self.composed = _identity_assign(graph.num_nodes)

    def parameters(self):
        return [
            *self.projection.parameters(),
            *self.gcn.parameters(),
            *self.phi.parameters(),
            *self.placer.parameters(),
        ]

    def _reset_to_original(self) -> None:
        """Restart from the original graph, carrying accumulated embeddings
        (already at the hidden width, so no input projection).

        The carried matrix is rescaled to unit RMS.  The accumulator sums
        pooled encoder outputs whose scale compounds each time the matrix
        feeds back in as features, and left unchecked that feedback loop
        overflows float64 within a few hundred steps.  A single global
        scalar keeps every relative magnitude intact.
        """
        carried = self.z_acc.copy()
        rms = float(np.sqrt(np.mean(np.square(carried))))
        if rms > 0.0:
            carried /= rms
        self.state_adjacency = self.graph.adjacency()
        self.state_features = carried
        self.state_projects = False
        self.composed = _identity_assign(self.graph.num_nodes)

    def step(self) -> StepRecord:
        """One parse/place/simulate interaction; appends to the buffer."""
        tape = Tape()
        norm = normalize_adjacency(self.state_adjacency)
        x = Tensor(self.state_features)
        h = mlp_forward(tape, x, self.projection) if self.state_projects else x
        z = encode(
            tape, h, norm, self.gcn,
            dropout=self.model.dropout_network, rng=self.dropout_rng,
        )
        view = PooledGraph(self.state_adjacency, self.state_features)
        scores = drop_edges(
            score_edges(tape, z, view, self.phi),
            self.model.dropout_parsing,
            self.parsing_rng,
        )
        assign = parse_clusters(retain_dominant_edges(scores, view), view)
        pooled = pool(assign, self.state_adjacency, z.data)
        zp = pool_features(tape, z, assign)
        dist = device_distribution(tape, zp, self.placer)
        action, log_prob = sample_placement(tape, dist, self.action_rng)
        composed = self.composed.compose(assign)
        placement = lift_placement(action, composed)
        latency = simulate(self.graph, placement, self.cm, self.topo)

        self.z_acc += zp.data[composed.membership]
        self.two_cycle_pairs += pooled.two_cycle_pairs()
        if latency < self.best_latency:
            self.best_latency = latency
            self.best_placement = placement.copy()

        record = StepRecord(
            step_index=len(self.buffer) + 1,
            log_prob=float(log_prob.data[0, 0]),
            reward=reward(latency),
            latency=latency,
            num_clusters=assign.num_clusters,
            norm=norm,
            features=np.array(self.state_features, copy=True),
            use_projection=self.state_projects,
            assign=assign,
            action=action,
        )
        self.buffer.append(record)

        if assign.num_clusters == 1 or not pooled.adjacency.any():
            # fully collapsed (or no edges left to parse): restart
            self._reset_to_original()
        else:
            self.state_adjacency = pooled.adjacency
            self.state_features = zp.data.copy()
            self.state_projects = False
            self.composed = composed
        return record

    def surrogate_loss(self, tape: Tape, records: list[StepRecord]) -> Tensor:
        """-sum_i log_prob_i * gamma^i * reward_i, with log_probs rebuilt
        from the frozen per-step states under the current parameters.
        Rewards are constants; with `use_baseline` the buffer mean reward is
        subtracted from each."""
        baseline = (
            sum(r.reward for r in records) / len(records)
            if self.cfg.use_baseline
            else 0.0
        )
        loss: Tensor | None = None
        for rec in records:
            x = Tensor(rec.features)
            h = mlp_forward(tape, x, self.projection) if rec.use_projection else x
            z = encode(
                tape, h, rec.norm, self.gcn,
                dropout=self.model.dropout_network, rng=self.dropout_rng,
            )
            zp = pool_features(tape, z, rec.assign)
            dist = device_distribution(tape, zp, self.placer)
            lp = log_prob_of(tape, dist, rec.action)
            weight = self.cfg.gamma ** rec.step_index * (rec.reward - baseline)
            term = tape.scale(lp, -weight)
            loss = term if loss is None else tape.add(loss, term)
        assert loss is not None
        return loss

    def update(self) -> None:
        """k_epochs surrogate rebuilds and Adam steps; clears the buffer."""
        if not self.buffer:
            raise EmptyBuffer("update requires at least one recorded step")
        for _ in range(self.cfg.k_epochs):
            tape = Tape()
            loss = self.surrogate_loss(tape, self.buffer)
            self.adam.zero_grad()
            tape.backward(loss)
            self.adam.step()
        self.buffer.clear()

    def run(self) -> TrainResult:
        """max_episodes episodes of update_timestep steps plus one update."""
        history: list[HistoryRow] = []
        episodes = 0
        for episode in range(1, self.cfg.max_episodes + 1):
            for _ in range(self.cfg.update_timestep):
                rec = self.step()
                history.append(
                    HistoryRow(
                        step=len(history) + 1,
                        episode=episode,
                        latency=rec.latency,
                        reward=rec.reward,
                        num_clusters=rec.num_clusters,
                    )
                )
            self.update()
            episodes = episode
            if (
                self.cfg.target_latency is not None
                and self.best_latency <= self.cfg.target_latency
            ):
                break
        assert self.best_placement is not None
        return TrainResult(
            best_placement=self.best_placement.copy(),
            best_latency=self.best_latency,
            history=tuple(history),
            episodes=episodes,
            two_cycle_pairs=self.two_cycle_pairs,
        )

    def evaluate_greedy(self) -> tuple[np.ndarray, float]:
        """Deterministic cascade: from the original graph, repeatedly parse
        and take the argmax device per cluster, keeping the best simulated
        placement across coarsening levels. Leaves trainer state untouched."""
        adjacency = self.graph.adjacency()
        features = self.x0.values
        projects = True
        composed = _identity_assign(self.graph.num_nodes)
        best: np.ndarray | None = None
        best_latency = float("inf")
        for _ in range(self.graph.num_nodes):
            tape = Tape()
            x = Tensor(features)
            h = mlp_forward(tape, x, self.projection) if projects else x
            z = encode(tape, h, normalize_adjacency(adjacency), self.gcn)
            view = PooledGraph(adjacency, features)
            scores = score_edges(tape, z, view, self.phi)
            assign = parse_clusters(retain_dominant_edges(scores, view), view)
            pooled = pool(assign, adjacency, z.data)
            zp = pool_features(tape, z, assign)
            dist = device_distribution(tape, zp, self.placer)
            composed = composed.compose(assign)
            placement = lift_placement(greedy_placement(dist.data), composed)
            latency = simulate(self.graph, placement, self.cm, self.topo)
            if latency < best_latency:
                best_latency = latency
                best = placement
            if assign.num_clusters == 1 or not pooled.adjacency.any():
                break
            adjacency = pooled.adjacency
            features = zp.data
            projects = False
        assert best is not None
        return best, best_latency


def train(
    graph: CompGraph,
    cm: CostModel,
    cfg: TrainConfig = TrainConfig(),
    model: ModelConfig = ModelConfig(),
    features: FeatureConfig = FeatureConfig(),
) -> TrainResult:
    """Train a placement policy on `graph` against `cm`; returns the best
    sampled placement, its latency, and the full step history."""
    return Trainer(graph, cm, cfg, model, features).run()
