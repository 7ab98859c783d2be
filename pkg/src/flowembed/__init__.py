"""Data flow graphs, graph embeddings and vulnerability classification for C."""

from .cparser import SourceFunction, SyntaxNode, SyntaxTree, leaf_tokens, parse_function
from .data import (
    Corpus,
    MetricsReport,
    SplitSpec,
    compute_metrics,
    load_jsonl,
    split,
)
from .dfg import (
    DataFlowGraph,
    DfgNode,
    build_dfg,
    collect_type_bindings,
    export_graph,
    parse_graph_json,
)
from .embedding import (
    EmbeddingTable,
    TypeVocabulary,
    embed_nodes,
    init_random_table,
    load_embedding_table,
    save_embedding_table,
    tokenize_type,
)
from .autodiff import Tape, backward
from .gnn import (
    GcnStack,
    GgnnCell,
    NormalizedAdjacency,
    gcn_forward,
    ggnn_forward,
    normalize_adjacency,
)
from .readout import (
    AttentionReadout,
    GraphVector,
    PositionalEncoder,
    attend_nodes,
    pool,
    positional_encode,
)
from .model import (
    FusionModel,
    PreparedSample,
    SequenceEmbedding,
    TrainConfig,
    evaluate,
    forward,
    fuse,
    loss,
    predict,
    train,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .pipeline import GraphPipeline, PipelineConfig, derive_seed, extract_graph
from .estimator import FlowGraphClassifier, GraphVectorizer
from .synthetic import synthetic_corpus

__version__ = "0.1.0"

__all__ = [
    "AttentionReadout", "Corpus", "DataFlowGraph", "DfgNode", "EmbeddingTable",
    "FlowGraphClassifier", "FusionModel", "GcnStack", "GgnnCell",
    "GraphPipeline", "GraphVector", "GraphVectorizer", "MetricsReport",
    "NormalizedAdjacency", "PipelineConfig", "PositionalEncoder",
    "PreparedSample", "SequenceEmbedding", "SourceFunction", "SplitSpec",
    "SyntaxNode", "SyntaxTree", "Tape", "TrainConfig", "TypeVocabulary",
    "attend_nodes", "backward", "build_dfg", "collect_type_bindings",
    "compute_metrics", "derive_seed", "embed_nodes", "evaluate",
    "export_graph", "extract_graph", "forward", "fuse", "gcn_forward",
    "ggnn_forward", "init_random_table", "leaf_tokens", "load_checkpoint",
    "load_embedding_table", "load_jsonl", "loss", "normalize_adjacency",
    "parse_function", "parse_graph_json", "pool", "positional_encode",
    "predict", "save_checkpoint", "save_embedding_table", "split",
    "synthetic_corpus", "tokenize_type", "train",
]
