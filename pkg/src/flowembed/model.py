"""Fuse the graph vector with a code-sequence embedding and classify.

The fused vector feeds a two-layer perceptron trained by mini-batch
gradient descent on softmax cross-entropy. Training is single-threaded
and fully deterministic for a fixed seed; the best-validation-F1
parameter set is retained.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .autodiff import relu, softmax, softmax_cross_entropy
from .data import compute_metrics
from .errors import DataError, EmptyDataset, FormatError, ShapeError
from .gnn import glorot
from .readout import GraphVector


@dataclass
class SequenceEmbedding:
    """Externally produced code-sequence vector for one function."""

    function_id: str
    vector: np.ndarray
    source: str = "zero"


@dataclass
class FusionModel:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @classmethod
    def init(cls, d_in, hidden, seed, dtype=np.float32):
        rng = np.random.default_rng(seed)
        return cls(
            w1=glorot(rng, d_in, hidden, dtype),
            b1=np.zeros(hidden, dtype=dtype),
            w2=glorot(rng, hidden, 2, dtype),
            b2=np.zeros(2, dtype=dtype),
        )

    @property
    def d_in(self):
        return int(self.w1.shape[0])

    def validate(self):
        if self.w1.shape[1] != self.b1.shape[0] or self.w1.shape[1] != self.w2.shape[0]:
            raise ShapeError("fusion layer widths do not chain")
        if self.w2.shape[1] != 2 or self.b2.shape[0] != 2:
            raise ShapeError("fusion output width must be 2")
        return self


def fuse(g, s) -> np.ndarray:
    """Concatenate graph part first, sequence part second."""
    gv = g.values if isinstance(g, GraphVector) else np.asarray(g)
    sv = s.vector if isinstance(s, SequenceEmbedding) else np.asarray(s)
    return np.concatenate([gv, sv])


def forward(model: FusionModel, z: np.ndarray):
    """Logits and softmax probabilities for one fused vector."""
    z = np.asarray(z)
    if z.shape != (model.d_in,):
        raise ShapeError(f"fused vector {z.shape} does not match model input {model.d_in}")
    hidden = relu(z @ model.w1 + model.b1)
    logits = hidden @ model.w2 + model.b2
    return logits, softmax(logits)


def loss(logits, label) -> float:
    """Cross-entropy of the true class, fused stable form."""
    return float(softmax_cross_entropy(np.asarray(logits, dtype=np.float64), int(label)))


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 50
    batch_size: int = 32
    seed: int = 0
    train_graph_branch: bool = True
    train_embedding_table: bool = False
    optimizer: str = "sgd"  # "sgd" | "momentum"
    momentum: float = 0.9
    class_weights: bool = False

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning rate must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.optimizer not in ("sgd", "momentum"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class PreparedSample:
    """One training/evaluation unit: graph, sequence vector, target."""

    id: str
    dfg: object
    seq: np.ndarray
    label: int


@dataclass
class TrainResult:
    history: list[dict]
    best_f1: float
    best_epoch: int
    final_metrics: object = None

    def history_csv(self) -> str:
        lines = ["epoch,split,loss,accuracy,precision,recall,f1"]
        for row in self.history:
            lines.append(
                "%d,%s,%.6f,%.6f,%.6f,%.6f,%.6f"
                % (row["epoch"], row["split"], row["loss"], row["accuracy"],
                   row["precision"], row["recall"], row["f1"])
            )
        return "\n".join(lines) + "\n"


def evaluate(pipeline, samples):
    """Mean loss, metrics report and per-sample predictions; no updates."""
    losses = []
    preds = []
    labels = []
    for sample in samples:
        logits, probs = pipeline.sample_logits(sample.dfg, sample.seq)
        losses.append(loss(logits, sample.label))
        preds.append(predict_label(probs))
        labels.append(sample.label)
    report = compute_metrics(preds, labels)
    return float(np.mean(losses)), report, preds


def predict_label(probs) -> int:
    """Argmax with exact ties resolved to 0."""
    return 0 if probs[0] >= probs[1] else 1


def predict(pipeline, sample: PreparedSample):
    logits, probs = pipeline.sample_logits(sample.dfg, sample.seq)
    return predict_label(probs), probs


def train(train_samples, pipeline, cfg: TrainConfig, valid_samples=None):
    """Mini-batch SGD over cross-entropy; keeps the best-validation-F1 state.

    Gradients flow through the readout and the GNN when
    cfg.train_graph_branch is set, and into the embedding table when
    cfg.train_embedding_table is set; the fusion layers always train.
    """
    if not train_samples:
        raise EmptyDataset("training split is empty")
    rng = np.random.default_rng(cfg.seed)
    n = len(train_samples)
    weights = {0: 1.0, 1: 1.0}
    if cfg.class_weights:
        counts = {0: 0, 1: 0}
        for s in train_samples:
            counts[s.label] += 1
        for c in (0, 1):
            weights[c] = n / (2.0 * max(counts[c], 1))

    velocity = {}
    history = []
    best_f1 = -1.0
    best_epoch = -1
    best_state = None

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        epoch_losses = []
        epoch_preds = []
        epoch_labels = []
        for start in range(0, n, cfg.batch_size):
            batch = [train_samples[i] for i in order[start:start + cfg.batch_size]]
            grads = {}
            for sample in batch:
                tape, loss_h, logits_h = pipeline.tape_loss(
                    sample.dfg, sample.seq, sample.label,
                    train_graph=cfg.train_graph_branch,
                    train_table=cfg.train_embedding_table,
                )
                w = weights[sample.label]
                sample_grads = tape.backward(loss_h)
                for name, g in sample_grads.items():
                    grads[name] = grads.get(name, 0) + w * g
                epoch_losses.append(w * float(tape.value(loss_h)))
                epoch_preds.append(predict_label(softmax(tape.value(logits_h))))
                epoch_labels.append(sample.label)
            params = pipeline.parameters()
            scale = cfg.learning_rate / len(batch)
            for name, g in grads.items():
                step = (scale * g).astype(params[name].dtype)
                if cfg.optimizer == "momentum":
                    v = velocity.get(name)
                    step = step + cfg.momentum * v if v is not None else step
                    velocity[name] = step
                params[name] -= step

        train_report = compute_metrics(epoch_preds, epoch_labels)
        history.append({
            "epoch": epoch, "split": "train",
            "loss": float(np.mean(epoch_losses)),
            "accuracy": train_report.accuracy, "precision": train_report.precision,
            "recall": train_report.recall, "f1": train_report.f1,
        })
        if valid_samples:
            vloss, vreport, _ = evaluate(pipeline, valid_samples)
            history.append({
                "epoch": epoch, "split": "valid",
                "loss": vloss,
                "accuracy": vreport.accuracy, "precision": vreport.precision,
                "recall": vreport.recall, "f1": vreport.f1,
            })
            if vreport.f1 > best_f1:
                best_f1 = vreport.f1
                best_epoch = epoch
                best_state = copy.deepcopy(pipeline.all_parameters())

    if best_state is not None:
        pipeline.set_parameters(best_state)
    else:
        best_epoch = cfg.epochs
    return TrainResult(history=history, best_f1=best_f1, best_epoch=best_epoch)


def load_sequence_embeddings(path):
    """Read the sequence-embedding JSONL.

    An optional leading {"manifest": ...} line records exporter provenance;
    every other line is {"id": ..., "vector": [...]} with one fixed width.
    Returns (vectors_by_id, dim, manifest).
    """
    path = Path(path)
    vectors = {}
    manifest = None
    dim = None
    with path.open() as fh:
        for lineno, raw in enumerate(fh):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if lineno == 0 and isinstance(obj, dict) and "manifest" in obj and "id" not in obj:
                manifest = obj["manifest"]
                continue
            if not isinstance(obj, dict) or "id" not in obj or "vector" not in obj:
                raise FormatError(f"{path}:{lineno}: expected fields 'id' and 'vector'")
            vec = np.asarray(obj["vector"], dtype=np.float32)
            if vec.ndim != 1:
                raise FormatError(f"{path}:{lineno}: vector must be flat")
            if dim is None:
                dim = int(vec.shape[0])
            elif vec.shape[0] != dim:
                raise DataError(
                    f"{path}:{lineno}: vector width {vec.shape[0]} != {dim} seen earlier"
                )
            if not np.isfinite(vec).all():
                raise DataError(f"{path}:{lineno}: non-finite vector entry")
            vectors[str(obj["id"])] = vec
    if not vectors:
        raise FormatError(f"{path}: no embeddings found")
    return vectors, dim, manifest
