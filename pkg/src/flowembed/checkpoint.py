"""Versioned checkpoint container for a full pipeline.

Layout: 10-byte magic, little-endian u64 header length, header JSON
(configuration, vocabulary, array names and shapes), then the raw
little-endian float32 array blobs in header order. No timestamps, so a
rerun with the same seed is byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .embedding import EmbeddingTable, TypeVocabulary
from .errors import FormatError
from .gnn import GcnStack, GgnnCell
from .model import FusionModel
from .pipeline import GraphPipeline, PipelineConfig
from .readout import AttentionReadout

CHECKPOINT_MAGIC = b"DFEPTCKPT1"


def save_checkpoint(pipeline: GraphPipeline, path) -> Path:
    path = Path(path)
    params = pipeline.parameters()
    header = {
        "version": 1,
        "config": pipeline.config.to_dict(),
        "vocab": pipeline.table.vocab.tokens,
        "arrays": [{"name": k, "shape": list(v.shape)} for k, v in params.items()],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with path.open("wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(len(blob).to_bytes(8, "little"))
        fh.write(blob)
        for value in params.values():
            fh.write(np.ascontiguousarray(value, dtype="<f4").tobytes())
    return path


def load_checkpoint(path) -> GraphPipeline:
    path = Path(path)
    data = path.read_bytes()
    if data[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise FormatError(f"{path} lacks the {CHECKPOINT_MAGIC!r} magic")
    off = len(CHECKPOINT_MAGIC)
    header_len = int.from_bytes(data[off:off + 8], "little")
    off += 8
    try:
        header = json.loads(data[off:off + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: bad checkpoint header: {exc}") from exc
    off += header_len
    if header.get("version") != 1:
        raise FormatError(f"unsupported checkpoint version {header.get('version')!r}")

    arrays = {}
    for spec in header["arrays"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        raw = np.frombuffer(data, dtype="<f4", count=count, offset=off)
        if raw.size != count:
            raise FormatError(f"{path}: truncated array {spec['name']!r}")
        arrays[spec["name"]] = raw.reshape(shape).copy()
        off += count * 4

    config = PipelineConfig(**header["config"])
    vocab = TypeVocabulary({tok: i for i, tok in enumerate(header["vocab"])})
    table = EmbeddingTable(vocab, arrays["table"]).validate()

    gcn = ggnn = None
    if config.gnn == "gcn":
        weights = []
        i = 0
        while f"gcn.w{i}" in arrays:
            weights.append(arrays[f"gcn.w{i}"])
            i += 1
        biases = None
        if "gcn.b0" in arrays:
            biases = [arrays[f"gcn.b{j}"] for j in range(len(weights))]
        gcn = GcnStack(weights, biases).validate()
    else:
        ggnn = GgnnCell(
            arrays["ggnn.wz"], arrays["ggnn.uz"], arrays["ggnn.wr"],
            arrays["ggnn.ur"], arrays["ggnn.wo"], arrays["ggnn.uo"],
            steps=config.gnn_depth,
        ).validate()
    attention = AttentionReadout(
        arrays["attention.w_gate"], arrays["attention.b_gate"],
        arrays["attention.w_trans"], arrays["attention.b_trans"],
    )
    fusion = FusionModel(
        arrays["fusion.w1"], arrays["fusion.b1"],
        arrays["fusion.w2"], arrays["fusion.b2"],
    ).validate()
    return GraphPipeline(config, table, gcn, ggnn, attention, fusion)
