"""Message passing over the data flow graph: GCN layers and GGNN steps.

Aggregation runs over a degree-normalized adjacency. The graph is stored
with edges (src, dst) = "dst originates from src"; the propagation matrix
is oriented so row v collects the states of the occurrences flowing into
v. Forward passes are written once against the ArrayOps/Tape op set, so
the trainable path and the plain path cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import ArrayOps
from .dfg import DataFlowGraph
from .errors import EmptyGraph, ShapeError


@dataclass
class NormalizedAdjacency:
    matrix: np.ndarray
    mode: str  # "symmetric" | "directed_row"
    self_loops: bool = True


def _propagation_matrix(n, edges, dtype):
    a = np.zeros((n, n), dtype=dtype)
    for src, dst in edges:
        a[dst, src] = 1  # row v lists the occurrences feeding v
    return a


def normalize_adjacency(dfg: DataFlowGraph, mode: str = "symmetric",
                        self_loops: bool = True, dtype=np.float32) -> NormalizedAdjacency:
    """Degree-normalized propagation matrix with optional self-loops.

    symmetric:    D^-1/2 (A v A^T [+ I]) D^-1/2
    directed_row: D_in^-1 (A [+ I]), rows sum to 1 (or 0 without self-loops
    on an isolated node).
    """
    n = dfg.n
    if n == 0:
        raise EmptyGraph("cannot normalize the adjacency of an empty graph")
    a = _propagation_matrix(n, dfg.edges, dtype)
    if mode == "symmetric":
        a = np.maximum(a, a.T)
        if self_loops:
            a = a + np.eye(n, dtype=dtype)
        deg = a.sum(axis=1)
        inv_sqrt = 1.0 / np.sqrt(np.maximum(deg, 1))
        matrix = (a * inv_sqrt[:, None]) * inv_sqrt[None, :]
    elif mode == "directed_row":
        if self_loops:
            a = a + np.eye(n, dtype=dtype)
        deg = a.sum(axis=1)
        matrix = a / np.maximum(deg, 1)[:, None]
    else:
        raise ValueError(f"unknown adjacency mode {mode!r}")
    return NormalizedAdjacency(matrix.astype(dtype), mode, self_loops)


def glorot(rng, fan_in, fan_out, dtype=np.float32):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)


@dataclass
class GcnStack:
    """Per-layer weights for H <- ReLU(A H W [+ b]); bias off by default."""

    weights: list[np.ndarray]
    biases: list[np.ndarray] | None = None

    @classmethod
    def init(cls, widths, seed, bias=False, dtype=np.float32):
        rng = np.random.default_rng(seed)
        weights = [glorot(rng, widths[i], widths[i + 1], dtype) for i in range(len(widths) - 1)]
        biases = [np.zeros(widths[i + 1], dtype=dtype) for i in range(len(widths) - 1)] if bias else None
        return cls(weights, biases)

    def validate(self):
        for i in range(len(self.weights) - 1):
            if self.weights[i].shape[1] != self.weights[i + 1].shape[0]:
                raise ShapeError("consecutive layer widths must chain")
        for w in self.weights:
            if not np.isfinite(w).all():
                raise ShapeError("non-finite layer weight")
        return self


@dataclass
class GgnnCell:
    """Gate weights for the gated recurrence; all six matrices are d x d."""

    wz: np.ndarray
    uz: np.ndarray
    wr: np.ndarray
    ur: np.ndarray
    wo: np.ndarray
    uo: np.ndarray
    steps: int = 2

    @classmethod
    def init(cls, d, steps, seed, dtype=np.float32):
        rng = np.random.default_rng(seed)
        mats = [glorot(rng, d, d, dtype) for _ in range(6)]
        return cls(*mats, steps=steps)

    @property
    def dim(self):
        return int(self.wz.shape[0])

    def validate(self):
        if self.steps < 1:
            raise ShapeError("step count must be >= 1")
        for m in (self.wz, self.uz, self.wr, self.ur, self.wo, self.uo):
            if m.shape != (self.dim, self.dim):
                raise ShapeError("gate matrices must share one width")
        return self


def gcn_layers(ops, x, adj, weights, biases=None):
    """ReLU(A H W [+ b]) per layer, on any op backend."""
    h = x
    for i, w in enumerate(weights):
        h = ops.matmul(ops.matmul(adj, h), w)
        if biases is not None:
            h = ops.add(h, biases[i])
        h = ops.relu(h)
    return h


def ggnn_steps(ops, x, adj, cell_handles, steps, one, minus_one):
    """Gated update/reset recurrence, on any op backend.

    a   = A h
    z   = sigmoid(a Wz + h Uz)
    r   = sigmoid(a Wr + h Ur)
    h~  = relu(a Wo + (r * h) Uo)
    h'  = (1 - z) * h + z * h~
    """
    wz, uz, wr, ur, wo, uo = cell_handles
    h = x
    for _ in range(steps):
        agg = ops.matmul(adj, h)
        z = ops.sigmoid(ops.add(ops.matmul(agg, wz), ops.matmul(h, uz)))
        r = ops.sigmoid(ops.add(ops.matmul(agg, wr), ops.matmul(h, ur)))
        cand = ops.relu(ops.add(ops.matmul(agg, wo), ops.matmul(ops.mul(r, h), uo)))
        keep = ops.add(one, ops.mul(minus_one, z))
        h = ops.add(ops.mul(keep, h), ops.mul(z, cand))
    return h


def gcn_forward(x: np.ndarray, adj, stack: GcnStack) -> np.ndarray:
    """Stacked graph convolutions; returns the final node states."""
    matrix = adj.matrix if isinstance(adj, NormalizedAdjacency) else np.asarray(adj)
    x = np.asarray(x)
    stack.validate()
    if x.shape[1] != stack.weights[0].shape[0]:
        raise ShapeError(
            f"feature width {x.shape[1]} does not match first layer input "
            f"{stack.weights[0].shape[0]}"
        )
    if matrix.shape != (x.shape[0], x.shape[0]):
        raise ShapeError(f"adjacency {matrix.shape} does not match {x.shape[0]} nodes")
    return gcn_layers(ArrayOps, x, matrix, stack.weights, stack.biases)


def ggnn_forward(x: np.ndarray, adj, cell: GgnnCell) -> np.ndarray:
    """Gated recurrence over the graph; returns the final node states."""
    matrix = adj.matrix if isinstance(adj, NormalizedAdjacency) else np.asarray(adj)
    x = np.asarray(x)
    cell.validate()
    if x.shape[1] != cell.dim:
        raise ShapeError(f"feature width {x.shape[1]} does not match cell width {cell.dim}")
    if matrix.shape != (x.shape[0], x.shape[0]):
        raise ShapeError(f"adjacency {matrix.shape} does not match {x.shape[0]} nodes")
    one = np.asarray(1, dtype=x.dtype)
    minus_one = np.asarray(-1, dtype=x.dtype)
    handles = (cell.wz, cell.uz, cell.wr, cell.ur, cell.wo, cell.uo)
    return ggnn_steps(ArrayOps, x, matrix, handles, cell.steps, one, minus_one)
