"""scikit-learn style wrappers around the pipeline.

GraphVectorizer turns raw C function strings into pooled graph vectors
(fit learns the type vocabulary), and FlowGraphClassifier is a
fit/predict binary classifier over code strings, so both compose with
Pipelines, grid search and cross-validation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import column_or_1d

from .embedding import load_embedding_table, vocab_tokens_from_graphs
from .errors import FlowEmbedError
from .model import PreparedSample, TrainConfig, predict_label, train
from .pipeline import GraphPipeline, PipelineConfig, derive_seed, empty_graph, extract_graph


def _check_codes(X):
    codes = list(X)
    if not codes:
        raise ValueError("X must hold at least one code string")
    for i, code in enumerate(codes):
        if not isinstance(code, str) or not code.strip():
            raise ValueError(f"X[{i}] must be a non-empty C source string")
    return codes


def _graphs_for(codes, loop_back_edges=False):
    graphs = []
    for i, code in enumerate(codes):
        try:
            graph, _ = extract_graph(
                _source(i, code), loop_back_edges=loop_back_edges)
        except FlowEmbedError:
            graph = empty_graph(str(i))
        graphs.append(graph)
    return graphs


def _source(i, code):
    from .cparser import SourceFunction
    return SourceFunction(id=str(i), code=code)


class GraphVectorizer(BaseEstimator, TransformerMixin):
    """Code strings -> pooled graph-embedding rows.

    fit() learns the type vocabulary from the training graphs (unless a
    table file is given) and freezes seeded GNN/readout weights; transform
    is then a pure function of the code.
    """

    def __init__(self, gnn="gcn", pool="united", pe="post_pool",
                 adjacency="symmetric", embed_dim=64, gnn_depth=2, seed=0,
                 table_path=None, loop_back_edges=False):
        self.gnn = gnn
        self.pool = pool
        self.pe = pe
        self.adjacency = adjacency
        self.embed_dim = embed_dim
        self.gnn_depth = gnn_depth
        self.seed = seed
        self.table_path = table_path
        self.loop_back_edges = loop_back_edges

    def _config(self, seq_dim=1):
        return PipelineConfig(
            gnn=self.gnn, pool=self.pool, pe=self.pe, adjacency=self.adjacency,
            embed_dim=self.embed_dim, gnn_depth=self.gnn_depth,
            seq_dim=seq_dim, seed=self.seed,
        )

    def fit(self, X, y=None):
        codes = _check_codes(X)
        graphs = _graphs_for(codes, self.loop_back_edges)
        table = load_embedding_table(self.table_path) if self.table_path else None
        vocab_tokens = None if table else vocab_tokens_from_graphs(graphs)
        self.pipeline_ = GraphPipeline.build(self._config(), table=table,
                                             vocab_tokens=vocab_tokens)
        return self

    def transform(self, X):
        if not hasattr(self, "pipeline_"):
            raise NotFittedError("GraphVectorizer must be fitted before transform")
        codes = _check_codes(X)
        graphs = _graphs_for(codes, self.loop_back_edges)
        return np.stack([self.pipeline_.graph_vector(g).values for g in graphs])


class FlowGraphClassifier(BaseEstimator, ClassifierMixin):
    """Binary vulnerability classifier over raw C function strings."""

    def __init__(self, gnn="gcn", pool="united", pe="post_pool",
                 adjacency="symmetric", embed_dim=64, gnn_depth=2, seq_dim=8,
                 hidden_dim=0, seed=0, table_path=None, epochs=50,
                 learning_rate=0.01, batch_size=32, optimizer="sgd",
                 momentum=0.9, train_graph_branch=True,
                 train_embedding_table=False, class_weights=False,
                 loop_back_edges=False):
        self.gnn = gnn
        self.pool = pool
        self.pe = pe
        self.adjacency = adjacency
        self.embed_dim = embed_dim
        self.gnn_depth = gnn_depth
        self.seq_dim = seq_dim
        self.hidden_dim = hidden_dim
        self.seed = seed
        self.table_path = table_path
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.optimizer = optimizer
        self.momentum = momentum
        self.train_graph_branch = train_graph_branch
        self.train_embedding_table = train_embedding_table
        self.class_weights = class_weights
        self.loop_back_edges = loop_back_edges

    def _prepare(self, codes, labels=None, seq_vectors=None):
        graphs = _graphs_for(codes, self.loop_back_edges)
        if seq_vectors is None:
            seq_vectors = np.zeros((len(codes), self.seq_dim), dtype=np.float32)
        samples = []
        for i, graph in enumerate(graphs):
            label = int(labels[i]) if labels is not None else 0
            samples.append(PreparedSample(str(i), graph,
                                          np.asarray(seq_vectors[i], dtype=np.float32),
                                          label))
        return samples

    def fit(self, X, y, seq_vectors=None):
        codes = _check_codes(X)
        y = column_or_1d(y)
        if len(y) != len(codes):
            raise ValueError(f"{len(codes)} samples but {len(y)} labels")
        labels = sorted(set(int(v) for v in y))
        if not set(labels) <= {0, 1}:
            raise ValueError(f"labels must be binary 0/1, got {labels}")
        self.classes_ = np.array([0, 1])

        graphs = _graphs_for(codes, self.loop_back_edges)
        table = load_embedding_table(self.table_path) if self.table_path else None
        vocab_tokens = None if table else vocab_tokens_from_graphs(graphs)
        config = PipelineConfig(
            gnn=self.gnn, pool=self.pool, pe=self.pe, adjacency=self.adjacency,
            embed_dim=self.embed_dim, gnn_depth=self.gnn_depth,
            seq_dim=self.seq_dim, hidden_dim=self.hidden_dim, seed=self.seed,
        )
        self.pipeline_ = GraphPipeline.build(config, table=table,
                                             vocab_tokens=vocab_tokens)
        samples = self._prepare(codes, labels=y, seq_vectors=seq_vectors)
        cfg = TrainConfig(
            learning_rate=self.learning_rate, epochs=self.epochs,
            batch_size=self.batch_size, seed=derive_seed(self.seed, "estimator"),
            train_graph_branch=self.train_graph_branch,
            train_embedding_table=self.train_embedding_table,
            optimizer=self.optimizer, momentum=self.momentum,
            class_weights=self.class_weights,
        )
        self.history_ = train(samples, self.pipeline_, cfg).history
        return self

    def predict_proba(self, X, seq_vectors=None):
        if not hasattr(self, "pipeline_"):
            raise NotFittedError("FlowGraphClassifier must be fitted before predict")
        samples = self._prepare(_check_codes(X), seq_vectors=seq_vectors)
        out = np.zeros((len(samples), 2), dtype=np.float64)
        for i, s in enumerate(samples):
            _, probs = self.pipeline_.sample_logits(s.dfg, s.seq)
            out[i] = probs
        return out

    def predict(self, X, seq_vectors=None):
        probs = self.predict_proba(X, seq_vectors=seq_vectors)
        return np.array([predict_label(p) for p in probs])
