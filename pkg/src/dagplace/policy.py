"""Placement head: per-cluster device distributions, sampling, and lift-back."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .autograd import Tape, Tensor
from .nn import Mlp, init_mlp, mlp_forward
from .partition import AssignMatrix


@dataclass(frozen=True)
class DeviceList:
    """Ordered device names; index is the device id."""

    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.names) < 2:
            raise ValueError("need at least 2 devices")

    @property
    def count(self) -> int:
        return len(self.names)


def default_devices(count: int = 2) -> DeviceList:
    base = ["CPU", "GPU"]
    names = base[:count] + [f"DEVICE{i}" for i in range(2, count)]
    return DeviceList(tuple(names))


def init_placer(
    rng: np.random.Generator, d_in: int, hidden: int, num_devices: int
) -> Mlp:
    """Two hidden layers at the encoder width, then device logits."""
    return init_mlp(rng, [d_in, hidden, hidden, num_devices])


def device_distribution(tape: Tape, z_pooled: Tensor, placer: Mlp) -> Tensor:
    """Row-stochastic |V'| x |D| matrix: softmax over device logits per cluster."""
    return tape.softmax_rows(mlp_forward(tape, z_pooled, placer))


PROB_FLOOR = 1e-12


def log_prob_of(tape: Tape, dist: Tensor, placement: np.ndarray) -> Tensor:
    """Scalar log-probability of a placement under independent cluster draws.

    Picked probabilities are floored at PROB_FLOOR before the log.  A
    saturated softmax can underflow the recorded action's probability to
    an exact zero when the surrogate loss re-evaluates it under updated
    parameters; the floor keeps the loss finite and simply drops such
    terms from the gradient.  At or above the floor the value and the
    gradient are exact.
    """
    n, d = dist.shape
    mask = np.zeros((n, d))
    mask[np.arange(n), placement] = 1.0
    picked = tape.matmul(tape.mul(dist, Tensor(mask)), Tensor(np.ones((d, 1))))
    return tape.sum(tape.log(tape.clip_min(picked, PROB_FLOOR)))


def sample_placement(
    tape: Tape, dist: Tensor, rng: np.random.Generator
) -> tuple[np.ndarray, Tensor]:
    """Draw one device per cluster; the returned log-prob stays on tape."""
    probs = dist.data
    draws = rng.random(probs.shape[0])
    cum = probs.cumsum(axis=1)
    placement = (draws[:, None] > cum).sum(axis=1).astype(np.intp)
    placement = np.minimum(placement, probs.shape[1] - 1)
    return placement, log_prob_of(tape, dist, placement)


def greedy_placement(dist_values: np.ndarray) -> np.ndarray:
    """Argmax device per cluster (ties take the lowest device id)."""
    return np.argmax(dist_values, axis=1).astype(np.intp)


def lift_placement(cluster_placement: np.ndarray, assign: AssignMatrix) -> np.ndarray:
    """Every node inherits the device of its cluster."""
    return np.asarray(cluster_placement, dtype=np.intp)[assign.membership]


def save_placement(
    assignments: np.ndarray, devices: DeviceList, path: str | Path
) -> None:
    data = {
        "assignments": [int(a) for a in assignments],
        "devices": list(devices.names),
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def load_placement(path: str | Path) -> tuple[np.ndarray, DeviceList]:
    with open(path) as fh:
        data = json.load(fh)
    return (
        np.asarray(data["assignments"], dtype=np.intp),
        DeviceList(tuple(data["devices"])),
    )
