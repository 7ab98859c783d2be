"""Node features: data-type strings -> d-dimensional vectors.

Each DFG node carries a type string ("unsigned int", "char *", or a
literal-kind tag); it is tokenized, looked up in an embedding table, and
the subtoken vectors are averaged into one row per node.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dfg import DataFlowGraph
from .errors import DataError, FormatError, InvalidDimension

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_ID = 0
UNK_ID = 1

TABLE_MAGIC = b"DFEPTEMB"


@dataclass
class TypeVocabulary:
    token_to_id: dict[str, int]

    @classmethod
    def from_tokens(cls, tokens):
        """Build a vocabulary; reserved ids 0/1 are added if missing."""
        mapping = {PAD_TOKEN: PAD_ID, UNK_TOKEN: UNK_ID}
        for tok in tokens:
            if tok not in mapping:
                mapping[tok] = len(mapping)
        return cls(mapping)

    def __len__(self):
        return len(self.token_to_id)

    def __contains__(self, token):
        return token in self.token_to_id

    def id(self, token):
        return self.token_to_id.get(token, UNK_ID)

    @property
    def tokens(self):
        out = [None] * len(self.token_to_id)
        for tok, i in self.token_to_id.items():
            out[i] = tok
        return out

    def validate(self):
        ids = sorted(self.token_to_id.values())
        if ids != list(range(len(ids))):
            raise FormatError("vocabulary ids must be dense")
        if self.token_to_id.get(PAD_TOKEN) != PAD_ID:
            raise FormatError(f"vocabulary missing {PAD_TOKEN} at id {PAD_ID}")
        if self.token_to_id.get(UNK_TOKEN) != UNK_ID:
            raise FormatError(f"vocabulary missing {UNK_TOKEN} at id {UNK_ID}")
        return self


@dataclass
class EmbeddingTable:
    vocab: TypeVocabulary
    matrix: np.ndarray  # V x d, float32

    @property
    def dim(self):
        return int(self.matrix.shape[1])

    def validate(self):
        self.vocab.validate()
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.vocab):
            raise FormatError(
                f"matrix shape {self.matrix.shape} does not match vocabulary size {len(self.vocab)}"
            )
        if not np.isfinite(self.matrix).all():
            raise DataError("embedding matrix contains non-finite entries")
        return self


def tokenize_type(type_feature: str, vocab: TypeVocabulary) -> list[int]:
    """Lowercase, split on whitespace and '*' (star is its own token)."""
    text = type_feature.lower().replace("*", " * ")
    parts = text.split()
    if not parts:
        return [UNK_ID]
    return [vocab.id(p) for p in parts]


def embed_nodes(dfg: DataFlowGraph, table: EmbeddingTable) -> np.ndarray:
    """Node feature matrix: row i = mean of subtoken vectors of node i's type."""
    rows = np.zeros((dfg.n, table.dim), dtype=table.matrix.dtype)
    for i, node in enumerate(dfg.nodes):
        ids = tokenize_type(node.type_feature, table.vocab)
        rows[i] = table.matrix[ids].mean(axis=0)
    return rows


def node_token_ids(dfg: DataFlowGraph, vocab: TypeVocabulary) -> list[list[int]]:
    """Per-node subtoken id lists (the differentiable path gathers these)."""
    return [tokenize_type(node.type_feature, vocab) for node in dfg.nodes]


def init_random_table(tokens, d: int, seed: int) -> EmbeddingTable:
    """Seeded uniform[-0.1, 0.1] table over the given tokens plus reserved ids."""
    if d < 1:
        raise InvalidDimension(f"embedding width must be >= 1, got {d}")
    vocab = TypeVocabulary.from_tokens(tokens)
    rng = np.random.default_rng(seed)
    matrix = rng.uniform(-0.1, 0.1, size=(len(vocab), d)).astype(np.float32)
    return EmbeddingTable(vocab, matrix).validate()


def save_embedding_table(table: EmbeddingTable, path, matrix_path=None):
    """Write the table; inline JSON rows or a sibling binary with magic header."""
    path = Path(path)
    payload = {"dim": table.dim, "tokens": table.vocab.tokens}
    if matrix_path is not None:
        matrix_path = Path(matrix_path)
        data = TABLE_MAGIC + np.ascontiguousarray(
            table.matrix, dtype="<f4").tobytes()
        matrix_path.write_bytes(data)
        payload["matrix_path"] = matrix_path.name
    else:
        payload["matrix"] = [[float(x) for x in row] for row in table.matrix]
    path.write_text(json.dumps(payload, separators=(",", ":")))
    return path


def load_embedding_table(path) -> EmbeddingTable:
    """Read a table file written by save_embedding_table or the exporter."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read embedding table {path}: {exc}") from exc
    if not isinstance(payload, dict) or "dim" not in payload or "tokens" not in payload:
        raise FormatError("embedding table requires 'dim' and 'tokens'")
    tokens = payload["tokens"]
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise FormatError("'tokens' must be a list of strings")
    dim = payload["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise FormatError(f"'dim' must be a positive integer, got {dim!r}")

    if "matrix_path" in payload:
        bin_path = path.parent / payload["matrix_path"]
        try:
            blob = bin_path.read_bytes()
        except OSError as exc:
            raise FormatError(f"cannot read matrix file {bin_path}: {exc}") from exc
        if blob[: len(TABLE_MAGIC)] != TABLE_MAGIC:
            raise FormatError(f"matrix file {bin_path} lacks the {TABLE_MAGIC!r} magic")
        raw = np.frombuffer(blob[len(TABLE_MAGIC):], dtype="<f4")
        if raw.size != len(tokens) * dim:
            raise FormatError(
                f"matrix file holds {raw.size} floats, expected {len(tokens) * dim}"
            )
        matrix = raw.reshape(len(tokens), dim).copy()
    elif "matrix" in payload:
        rows = payload["matrix"]
        if not isinstance(rows, list) or len(rows) != len(tokens):
            raise FormatError("inline 'matrix' must hold one row per token")
        if any(not isinstance(r, list) or len(r) != dim for r in rows):
            raise FormatError("inline 'matrix' rows must all have width 'dim'")
        matrix = np.asarray(rows, dtype=np.float32)
    else:
        raise FormatError("embedding table requires 'matrix' or 'matrix_path'")

    vocab = TypeVocabulary({tok: i for i, tok in enumerate(tokens)})
    if len(vocab.token_to_id) != len(tokens):
        raise FormatError("duplicate tokens in vocabulary")
    return EmbeddingTable(vocab, matrix).validate()


def vocab_tokens_from_graphs(graphs) -> list[str]:
    """Sorted unique type subtokens observed across graphs."""
    seen = set()
    for g in graphs:
        for node in g.nodes:
            text = node.type_feature.lower().replace("*", " * ")
            seen.update(text.split())
    return sorted(seen)
