"""Minimal reverse-mode autodiff over dense 2-D float64 matrices.

Forward calls go through a Tape, which records one entry per primitive and
replays them in reverse on backward(). Only the primitives the encoder,
edge scorer, and placement head need are provided; everything is 2-D.
"""

from __future__ import annotations

import numpy as np


class ShapeMismatch(Exception):
    pass


class NonScalarLoss(Exception):
    pass


class Tensor:
    """A (rows, cols) float64 value with a same-shape gradient buffer."""

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ShapeMismatch(f"tensors are 2-D, got shape {arr.shape}")
        self.data = arr
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def parameter(data) -> Tensor:
    return Tensor(data, requires_grad=True)


class Tape:
    """Records primitive applications and replays them in reverse.

    Each entry is (output, inputs, backward_fn); backward_fn maps the
    upstream gradient to one gradient array per input. One tape serves one
    forward/backward pair and is single-threaded.
    """

    def __init__(self):
        self._entries: list[tuple[Tensor, tuple[Tensor, ...], object]] = []

    def __len__(self) -> int:
        return len(self._entries)

    def _record(self, out: Tensor, inputs: tuple[Tensor, ...], back) -> Tensor:
        if any(t.requires_grad for t in inputs):
            out.requires_grad = True
            self._entries.append((out, inputs, back))
        return out

    # primitives ---------------------------------------------------------

    def matmul(self, a: Tensor, b: Tensor) -> Tensor:
        if a.shape[1] != b.shape[0]:
            raise ShapeMismatch(f"matmul {a.shape} @ {b.shape}")
        out = Tensor(a.data @ b.data)

        def back(g):
            return g @ b.data.T, a.data.T @ g

        return self._record(out, (a, b), back)

    def add(self, a: Tensor, b: Tensor) -> Tensor:
        if a.shape != b.shape:
            raise ShapeMismatch(f"add {a.shape} + {b.shape}")
        out = Tensor(a.data + b.data)
        return self._record(out, (a, b), lambda g: (g, g))

    def add_bias(self, a: Tensor, bias: Tensor) -> Tensor:
        """Add a 1 x d row vector to every row of an n x d matrix."""
        if bias.shape != (1, a.shape[1]):
            raise ShapeMismatch(f"add_bias {a.shape} + {bias.shape}")
        out = Tensor(a.data + bias.data)
        return self._record(out, (a, bias), lambda g: (g, g.sum(axis=0, keepdims=True)))

    def mul(self, a: Tensor, b: Tensor) -> Tensor:
        if a.shape != b.shape:
            raise ShapeMismatch(f"mul {a.shape} * {b.shape}")
        out = Tensor(a.data * b.data)
        return self._record(out, (a, b), lambda g: (g * b.data, g * a.data))

    def scale(self, a: Tensor, c: float) -> Tensor:
        out = Tensor(a.data * c)
        return self._record(out, (a,), lambda g: (g * c,))

    def relu(self, a: Tensor) -> Tensor:
        out = Tensor(np.maximum(a.data, 0.0))
        mask = (a.data > 0.0).astype(np.float64)
        return self._record(out, (a,), lambda g: (g * mask,))

    def sigmoid(self, a: Tensor) -> Tensor:
        # split by sign so exp never overflows
        x = a.data
        y = np.empty_like(x)
        pos = x >= 0
        y[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        y[~pos] = ex / (1.0 + ex)
        out = Tensor(y)
        return self._record(out, (a,), lambda g: (g * y * (1.0 - y),))

    def log(self, a: Tensor) -> Tensor:
        out = Tensor(np.log(a.data))
        return self._record(out, (a,), lambda g: (g / a.data,))

    def clip_min(self, a: Tensor, floor: float) -> Tensor:
        # entries at or above the floor keep an exact identity gradient
        out = Tensor(np.maximum(a.data, floor))
        mask = (a.data >= floor).astype(np.float64)
        return self._record(out, (a,), lambda g: (g * mask,))

    def softmax_rows(self, a: Tensor) -> Tensor:
        shifted = a.data - a.data.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        y = e / e.sum(axis=1, keepdims=True)
        out = Tensor(y)

        def back(g):
            dot = (g * y).sum(axis=1, keepdims=True)
            return (y * (g - dot),)

        return self._record(out, (a,), back)

    def gather_rows(self, a: Tensor, idx) -> Tensor:
        idx = np.asarray(idx, dtype=np.intp)
        out = Tensor(a.data[idx])

        def back(g):
            acc = np.zeros_like(a.data)
            np.add.at(acc, idx, g)
            return (acc,)

        return self._record(out, (a,), back)

    def scatter_add_rows(self, a: Tensor, idx, num_rows: int) -> Tensor:
        """out[i] = sum of rows j of `a` with idx[j] == i; out has num_rows rows."""
        idx = np.asarray(idx, dtype=np.intp)
        if idx.shape != (a.shape[0],):
            raise ShapeMismatch(f"scatter index length {idx.shape} for {a.shape}")
        acc = np.zeros((num_rows, a.shape[1]), dtype=np.float64)
        np.add.at(acc, idx, a.data)
        out = Tensor(acc)
        return self._record(out, (a,), lambda g: (g[idx],))

    def sum(self, a: Tensor) -> Tensor:
        out = Tensor([[a.data.sum()]])
        return self._record(out, (a,), lambda g: (np.full_like(a.data, g[0, 0]),))

    # backward -----------------------------------------------------------

    def backward(self, loss: Tensor) -> None:
        """Accumulate d loss / d t into t.grad for every recorded tensor."""
        if loss.shape != (1, 1):
            raise NonScalarLoss(f"loss must be 1x1, got {loss.shape}")
        loss.grad[...] = 1.0
        for out, inputs, back in reversed(self._entries):
            grads = back(out.grad)
            for t, g in zip(inputs, grads):
                if t.requires_grad:
                    t.grad += g


class Adam:
    """Adam with bias correction over a fixed parameter list."""

    def __init__(self, params: list[Tensor], lr: float = 1e-4,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]
        self.t = 0

    def step(self) -> None:
        self.t += 1
        for i, p in enumerate(self.params):
            g = p.grad
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * (g * g)
            m_hat = self.m[i] / (1 - self.beta1**self.t)
            v_hat = self.v[i] / (1 - self.beta2**self.t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
