"""Collapse node states into one graph vector.

Soft attention gates each node (sigmoid gate times rectified transform),
a pooling reduction collapses the rows, and a fixed sinusoidal vector can
be added on top: either to the pooled vector (element index as position)
or to the node features before the GNN (token order as position).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import ArrayOps
from .errors import ContractViolation, EmptyGraph, ShapeError
from .gnn import glorot

POOL_MODES = ("sum", "max", "mean", "united")
PE_MODES = ("post_pool", "per_node", "off")


@dataclass
class AttentionReadout:
    """Two independent affine maps: gate and transform."""

    w_gate: np.ndarray
    b_gate: np.ndarray
    w_trans: np.ndarray
    b_trans: np.ndarray

    @classmethod
    def init(cls, d, seed, dtype=np.float32):
        rng = np.random.default_rng(seed)
        return cls(
            w_gate=glorot(rng, d, d, dtype),
            b_gate=np.zeros(d, dtype=dtype),
            w_trans=glorot(rng, d, d, dtype),
            b_trans=np.zeros(d, dtype=dtype),
        )

    @property
    def dim(self):
        return int(self.w_gate.shape[0])


@dataclass
class GraphVector:
    values: np.ndarray
    n_nodes: int
    pe_applied: bool = False


@dataclass
class PositionalEncoder:
    dim: int
    mode: str = "post_pool"
    base: float = 10000.0

    def __post_init__(self):
        if self.mode not in PE_MODES:
            raise ValueError(f"unknown positional encoding mode {self.mode!r}")


def attention_rows(ops, h, w_gate, b_gate, w_trans, b_trans):
    """sigmoid(h Wg + bg) * relu(h Wt + bt), on any op backend."""
    gate = ops.sigmoid(ops.add(ops.matmul(h, w_gate), b_gate))
    trans = ops.relu(ops.add(ops.matmul(h, w_trans), b_trans))
    return ops.mul(gate, trans)


def pool_rows(ops, e, mode):
    if mode == "sum":
        return ops.sum_rows(e)
    if mode == "max":
        return ops.max_rows(e)
    if mode == "mean":
        return ops.mean_rows(e)
    if mode == "united":
        return ops.mul(ops.sum_rows(e), ops.max_rows(e))
    raise ValueError(f"unknown pooling mode {mode!r}")


def attend_nodes(h: np.ndarray, readout: AttentionReadout) -> np.ndarray:
    """Per-node gated vectors, rows aligned with the node states."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[1] != readout.dim:
        raise ShapeError(f"node states {h.shape} do not match attention width {readout.dim}")
    return attention_rows(ArrayOps, h, readout.w_gate, readout.b_gate,
                          readout.w_trans, readout.b_trans)


def pool(e: np.ndarray, mode: str = "united") -> GraphVector:
    """Reduce attention rows to one vector; united = sum * per-dim max."""
    e = np.asarray(e)
    if e.ndim != 2 or e.shape[0] == 0:
        raise EmptyGraph("pooling requires at least one node")
    if mode not in POOL_MODES:
        raise ValueError(f"unknown pooling mode {mode!r}")
    return GraphVector(values=pool_rows(ArrayOps, e, mode), n_nodes=int(e.shape[0]))


def positional_vector(dim: int, base: float = 10000.0, dtype=np.float32) -> np.ndarray:
    """Fixed vector added post-pooling; element index plays the position.

    P[2i] = sin(2i / base^(2i/d)), P[2i+1] = cos((2i+1) / base^(2i/d)).
    """
    p = np.zeros(dim, dtype=np.float64)
    for j in range(dim):
        i2 = j if j % 2 == 0 else j - 1
        angle = j / base ** (i2 / dim)
        p[j] = np.sin(angle) if j % 2 == 0 else np.cos(angle)
    return p.astype(dtype)


def positional_rows(n: int, dim: int, base: float = 10000.0, dtype=np.float32) -> np.ndarray:
    """Standard sinusoidal rows, one per position 0..n-1."""
    rows = np.zeros((n, dim), dtype=np.float64)
    for pos in range(n):
        for j in range(dim):
            i2 = j if j % 2 == 0 else j - 1
            angle = pos / base ** (i2 / dim)
            rows[pos, j] = np.sin(angle) if j % 2 == 0 else np.cos(angle)
    return rows.astype(dtype)


def positional_encode(g: GraphVector, encoder: PositionalEncoder,
                      node_order=None) -> GraphVector:
    """Apply the encoder's mode to a pooled graph vector.

    per_node is a no-op here: its rows are added to node features before
    the GNN (see positional_rows).
    """
    if encoder.mode == "off" or encoder.mode == "per_node":
        return g
    if g.pe_applied:
        raise ContractViolation("positional encoding already applied to this vector")
    if g.values.shape[0] != encoder.dim:
        raise ShapeError(f"vector width {g.values.shape[0]} != encoder width {encoder.dim}")
    p = positional_vector(encoder.dim, encoder.base, dtype=g.values.dtype)
    return GraphVector(values=g.values + p, n_nodes=g.n_nodes, pe_applied=True)
