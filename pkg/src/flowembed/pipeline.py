"""End-to-end graph branch: source text -> graph vector -> classifier.

GraphPipeline bundles the embedding table, the selected GNN, the
attention readout, the positional encoder and the fusion classifier. The
same forward structure runs in two ways: plain numpy for inference and
recorded on a Tape for training, built from one shared op set.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass

import numpy as np

from .autodiff import Tape
from .cparser import SourceFunction, parse_function
from .dfg import DataFlowGraph, build_dfg, collect_type_bindings
from .embedding import (
    EmbeddingTable,
    embed_nodes,
    init_random_table,
    node_token_ids,
)
from .errors import ShapeError
from .gnn import GcnStack, GgnnCell, gcn_forward, gcn_layers, ggnn_forward, ggnn_steps, normalize_adjacency
from .model import FusionModel, forward as fusion_forward, fuse
from .readout import (
    AttentionReadout,
    GraphVector,
    PositionalEncoder,
    attend_nodes,
    attention_rows,
    pool,
    pool_rows,
    positional_encode,
    positional_rows,
    positional_vector,
)

# Type subtokens a randomly initialized table should know about even before
# seeing a corpus; everything else maps to <unk>.
DEFAULT_TYPE_TOKENS = [
    "*", "bool", "char", "char_literal", "const", "double", "enum", "false",
    "float", "int", "long", "null", "number_literal", "short", "signed",
    "size_t", "string_literal", "struct", "true", "union", "unknown",
    "unsigned", "void", "volatile",
]

ADJACENCY_MODES = {"symmetric": "symmetric", "directed": "directed_row",
                   "directed_row": "directed_row"}


def derive_seed(seed: int, label: str) -> int:
    """Stable per-subsystem seed from the single run seed."""
    digest = hashlib.sha256(f"{label}:{seed}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class PipelineConfig:
    gnn: str = "gcn"              # "gcn" | "ggnn"
    pool: str = "united"          # "sum" | "max" | "mean" | "united"
    pe: str = "post_pool"         # "post_pool" | "per_node" | "off"
    adjacency: str = "symmetric"  # "symmetric" | "directed"
    embed_dim: int = 128
    gnn_depth: int = 2
    seq_dim: int = 768
    hidden_dim: int = 0           # 0 -> (embed_dim + seq_dim) // 2
    seed: int = 0

    def __post_init__(self):
        if self.gnn not in ("gcn", "ggnn"):
            raise ValueError(f"unknown gnn kind {self.gnn!r}")
        if self.pool not in ("sum", "max", "mean", "united"):
            raise ValueError(f"unknown pooling mode {self.pool!r}")
        if self.pe not in ("post_pool", "per_node", "off"):
            raise ValueError(f"unknown positional encoding mode {self.pe!r}")
        if self.adjacency not in ADJACENCY_MODES:
            raise ValueError(f"unknown adjacency mode {self.adjacency!r}")

    @property
    def resolved_hidden(self):
        return self.hidden_dim or (self.embed_dim + self.seq_dim) // 2

    @property
    def adjacency_mode(self):
        return ADJACENCY_MODES[self.adjacency]

    def to_dict(self):
        return asdict(self)


class GraphPipeline:
    """All trainable state plus the forward logic for one configuration."""

    def __init__(self, config: PipelineConfig, table: EmbeddingTable,
                 gcn: GcnStack | None = None, ggnn: GgnnCell | None = None,
                 attention: AttentionReadout | None = None,
                 fusion: FusionModel | None = None):
        self.config = config
        self.table = table
        self.gcn = gcn
        self.ggnn = ggnn
        self.attention = attention
        self.fusion = fusion
        self.encoder = PositionalEncoder(dim=config.embed_dim, mode=config.pe)

    @classmethod
    def build(cls, config: PipelineConfig, table: EmbeddingTable | None = None,
              vocab_tokens=None) -> "GraphPipeline":
        if table is None:
            tokens = vocab_tokens if vocab_tokens is not None else DEFAULT_TYPE_TOKENS
            table = init_random_table(tokens, config.embed_dim,
                                      derive_seed(config.seed, "table"))
        elif table.dim != config.embed_dim:
            config.embed_dim = table.dim  # the table dictates d
        d = config.embed_dim
        gcn = ggnn = None
        if config.gnn == "gcn":
            gcn = GcnStack.init([d] * (config.gnn_depth + 1), derive_seed(config.seed, "gnn"))
        else:
            ggnn = GgnnCell.init(d, config.gnn_depth, derive_seed(config.seed, "gnn"))
        attention = AttentionReadout.init(d, derive_seed(config.seed, "attention"))
        fusion = FusionModel.init(d + config.seq_dim, config.resolved_hidden,
                                  derive_seed(config.seed, "fusion"))
        return cls(config, table, gcn, ggnn, attention, fusion)

    # -- plain forward -------------------------------------------------

    @property
    def dtype(self):
        return self.table.matrix.dtype

    def node_features(self, dfg: DataFlowGraph) -> np.ndarray:
        x = embed_nodes(dfg, self.table)
        if self.config.pe == "per_node" and dfg.n:
            x = x + positional_rows(dfg.n, self.config.embed_dim, dtype=x.dtype)
        return x

    def _adjacency(self, dfg):
        # GGNN aggregation reuses the selected normalization but without
        # self-loops: the gate recurrence already mixes in the node's own state.
        return normalize_adjacency(dfg, self.config.adjacency_mode,
                                   self_loops=self.config.gnn == "gcn",
                                   dtype=self.dtype)

    def graph_vector(self, dfg: DataFlowGraph) -> GraphVector:
        """Pooled, positionally encoded graph embedding (all-zero if empty)."""
        d = self.config.embed_dim
        if dfg.n == 0:
            return GraphVector(np.zeros(d, dtype=self.dtype), 0, pe_applied=True)
        x = self.node_features(dfg)
        adj = self._adjacency(dfg)
        if self.gcn is not None:
            h = gcn_forward(x, adj, self.gcn)
        else:
            h = ggnn_forward(x, adj, self.ggnn)
        e = attend_nodes(h, self.attention)
        g = pool(e, self.config.pool)
        return positional_encode(g, self.encoder)

    def sample_logits(self, dfg: DataFlowGraph, seq: np.ndarray):
        g = self.graph_vector(dfg)
        seq = np.asarray(seq, dtype=self.dtype)
        if seq.shape != (self.config.seq_dim,):
            raise ShapeError(
                f"sequence embedding {seq.shape} does not match configured "
                f"width {self.config.seq_dim}"
            )
        return fusion_forward(self.fusion, fuse(g, seq))

    # -- recorded forward -----------------------------------------------

    def tape_loss(self, dfg: DataFlowGraph, seq: np.ndarray, label: int,
                  train_graph: bool = True, train_table: bool = False):
        """Record the full forward on a Tape; returns (tape, loss, logits)."""
        cfg = self.config
        dtype = self.dtype
        tape = Tape()
        if dfg.n == 0:
            g_h = tape.leaf(np.zeros(cfg.embed_dim, dtype=dtype))
        else:
            table_h = tape.leaf(self.table.matrix, param="table" if train_table else None)
            ids = node_token_ids(dfg, self.table.vocab)
            flat = [tok for lst in ids for tok in lst]
            rows_h = tape.gather(table_h, flat)
            avg = np.zeros((dfg.n, len(flat)), dtype=dtype)
            col = 0
            for i, lst in enumerate(ids):
                avg[i, col:col + len(lst)] = 1.0 / len(lst)
                col += len(lst)
            x_h = tape.matmul(tape.leaf(avg), rows_h)
            if cfg.pe == "per_node":
                x_h = tape.add(x_h, tape.leaf(positional_rows(dfg.n, cfg.embed_dim,
                                                              dtype=dtype)))
            adj_h = tape.leaf(self._adjacency(dfg).matrix)
            gp = "gnn" if train_graph else None
            if self.gcn is not None:
                w_hs = [tape.leaf(w, param=f"gcn.w{i}" if gp else None)
                        for i, w in enumerate(self.gcn.weights)]
                b_hs = None
                if self.gcn.biases is not None:
                    b_hs = [tape.leaf(b, param=f"gcn.b{i}" if gp else None)
                            for i, b in enumerate(self.gcn.biases)]
                h = gcn_layers(tape, x_h, adj_h, w_hs, b_hs)
            else:
                names = ("wz", "uz", "wr", "ur", "wo", "uo")
                cell = self.ggnn
                handles = tuple(
                    tape.leaf(getattr(cell, nm), param=f"ggnn.{nm}" if gp else None)
                    for nm in names
                )
                one = tape.leaf(np.asarray(1, dtype=dtype))
                minus_one = tape.leaf(np.asarray(-1, dtype=dtype))
                h = ggnn_steps(tape, x_h, adj_h, handles, cell.steps, one, minus_one)
            att = self.attention
            e = attention_rows(
                tape, h,
                tape.leaf(att.w_gate, param="attention.w_gate" if gp else None),
                tape.leaf(att.b_gate, param="attention.b_gate" if gp else None),
                tape.leaf(att.w_trans, param="attention.w_trans" if gp else None),
                tape.leaf(att.b_trans, param="attention.b_trans" if gp else None),
            )
            g_h = pool_rows(tape, e, cfg.pool)
            if cfg.pe == "post_pool":
                g_h = tape.add(g_h, tape.leaf(positional_vector(cfg.embed_dim, dtype=dtype)))
        seq = np.asarray(seq, dtype=dtype)
        if seq.shape != (cfg.seq_dim,):
            raise ShapeError(
                f"sequence embedding {seq.shape} does not match configured "
                f"width {cfg.seq_dim}"
            )
        z_h = tape.concat(g_h, tape.leaf(seq))
        hid = tape.relu(tape.add(tape.matmul(z_h, tape.leaf(self.fusion.w1, param="fusion.w1")),
                                 tape.leaf(self.fusion.b1, param="fusion.b1")))
        logits_h = tape.add(tape.matmul(hid, tape.leaf(self.fusion.w2, param="fusion.w2")),
                            tape.leaf(self.fusion.b2, param="fusion.b2"))
        loss_h = tape.softmax_cross_entropy(logits_h, label)
        return tape, loss_h, logits_h

    # -- parameter access -------------------------------------------------

    def parameters(self) -> dict[str, np.ndarray]:
        """Live references, keyed exactly like the tape parameter names."""
        params = {"table": self.table.matrix}
        if self.gcn is not None:
            for i, w in enumerate(self.gcn.weights):
                params[f"gcn.w{i}"] = w
            if self.gcn.biases is not None:
                for i, b in enumerate(self.gcn.biases):
                    params[f"gcn.b{i}"] = b
        if self.ggnn is not None:
            for nm in ("wz", "uz", "wr", "ur", "wo", "uo"):
                params[f"ggnn.{nm}"] = getattr(self.ggnn, nm)
        att = self.attention
        params["attention.w_gate"] = att.w_gate
        params["attention.b_gate"] = att.b_gate
        params["attention.w_trans"] = att.w_trans
        params["attention.b_trans"] = att.b_trans
        params["fusion.w1"] = self.fusion.w1
        params["fusion.b1"] = self.fusion.b1
        params["fusion.w2"] = self.fusion.w2
        params["fusion.b2"] = self.fusion.b2
        return params

    def all_parameters(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.parameters().items()}

    def set_parameters(self, state: dict[str, np.ndarray]):
        for name, value in state.items():
            value = np.asarray(value)
            if value.dtype not in (np.float32, np.float64):
                value = value.astype(np.float32)
            if name == "table":
                self.table.matrix = value
            elif name.startswith("gcn.w"):
                self.gcn.weights[int(name[5:])] = value
            elif name.startswith("gcn.b"):
                self.gcn.biases[int(name[5:])] = value
            elif name.startswith("ggnn."):
                setattr(self.ggnn, name[5:], value)
            elif name.startswith("attention."):
                setattr(self.attention, name[10:], value)
            elif name.startswith("fusion."):
                setattr(self.fusion, name[7:], value)
            else:
                raise KeyError(f"unknown parameter {name!r}")
        return self


def extract_graph(source: SourceFunction, loop_back_edges: bool = False,
                  strict: bool = False):
    """Parse one sample and build its DFG; returns (graph, tree)."""
    tree = parse_function(source, strict=strict)
    bindings = collect_type_bindings(tree)
    graph = build_dfg(tree, bindings, function_id=source.id,
                      loop_back_edges=loop_back_edges)
    return graph, tree


def empty_graph(function_id: str) -> DataFlowGraph:
    return DataFlowGraph(function_id, [], set())
