"""Command-line surface: extract | embed | train | eval | grid | export-dot.

Every command writes its fully resolved configuration next to its outputs
and derives all randomness from the single --seed, so a rerun with the
same inputs is byte-identical. Per-sample extraction failures never abort
a batch run; they are counted in the summary instead.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .cparser import SourceFunction
from .data import (
    SplitSpec,
    load_jsonl,
    load_split_manifest,
    split,
    split_by_manifest,
)
from .dfg import export_graph
from .embedding import load_embedding_table
from .errors import FlowEmbedError
from .model import (
    PreparedSample,
    TrainConfig,
    evaluate,
    load_sequence_embeddings,
    train,
)
from .pipeline import (
    GraphPipeline,
    PipelineConfig,
    derive_seed,
    empty_graph,
    extract_graph,
)

PE_FLAGS = {"post-pool": "post_pool", "per-node": "per_node", "off": "off"}
GRID_ORDER = [
    ("ggnn", "sum"), ("gcn", "sum"),
    ("ggnn", "max"), ("gcn", "max"),
    ("ggnn", "mean"), ("gcn", "mean"),
    ("ggnn", "united"), ("gcn", "united"),
]


def grid_label(gnn: str, pool: str) -> str:
    return f"{gnn.upper()}-{'uni' if pool == 'united' else pool}"


def _safe_name(sample_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", sample_id)


def _write_config(out_dir: Path, resolved: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(
        json.dumps(resolved, sort_keys=True, indent=2) + "\n"
    )


def _resolved(args, extra=None):
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    if extra:
        resolved.update(extra)
    return resolved


def _extract_one(payload):
    sample_id, code, loop_back, strict = payload
    source = SourceFunction(id=sample_id, code=code)
    try:
        graph, tree = extract_graph(source, loop_back_edges=loop_back, strict=strict)
        return sample_id, export_graph(graph, "json"), tree.error_count, graph.n, None
    except FlowEmbedError as exc:
        return sample_id, None, 0, 0, str(exc)


def _extract_corpus(corpus, loop_back, strict, jobs):
    payloads = [(s.id, s.code, loop_back, strict) for s in corpus]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool_exec:
            return list(pool_exec.map(_extract_one, payloads, chunksize=16))
    return [_extract_one(p) for p in payloads]


def cmd_extract(args):
    corpus = load_jsonl(args.dataset)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {"total": len(corpus), "parsed": 0, "error_trees": 0,
               "empty_graphs": 0, "failed": 0}
    for sample_id, graph_json, error_count, n_nodes, failure in _extract_corpus(
            corpus, args.loop_back_edges, args.strict, args.jobs):
        if failure is not None:
            summary["failed"] += 1
            print(f"warning: {sample_id}: {failure}", file=sys.stderr)
            continue
        summary["parsed"] += 1
        if error_count:
            summary["error_trees"] += 1
        if n_nodes == 0:
            summary["empty_graphs"] += 1
        (out_dir / f"{_safe_name(sample_id)}.json").write_text(graph_json + "\n")
        if args.dot:
            source = next(s for s in corpus if s.id == sample_id)
            graph, _ = extract_graph(source, loop_back_edges=args.loop_back_edges)
            (out_dir / f"{_safe_name(sample_id)}.dot").write_text(
                export_graph(graph, "dot") + "\n")
    (out_dir / "summary.json").write_text(json.dumps(summary, sort_keys=True) + "\n")
    _write_config(out_dir, _resolved(args))
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_export_dot(args):
    if args.dataset:
        corpus = load_jsonl(args.dataset)
        wanted = str(args.id)
        sample = next((s for s in corpus if s.id == wanted), None)
        if sample is None:
            print(f"error: sample {wanted!r} not in {args.dataset}", file=sys.stderr)
            return 2
    else:
        code = Path(args.file).read_text()
        sample = SourceFunction(id=Path(args.file).stem, code=code)
    graph, tree = extract_graph(sample, loop_back_edges=args.loop_back_edges)
    if args.tree:
        print(tree.sexp())
    print(export_graph(graph, "dot"))
    return 0


def _build_pipeline(args, corpus=None):
    config = PipelineConfig(
        gnn=args.gnn, pool=args.pool, pe=PE_FLAGS[args.pe],
        adjacency=args.adjacency, embed_dim=args.embed_dim,
        gnn_depth=args.gnn_depth, seq_dim=args.seq_dim,
        hidden_dim=args.hidden_dim, seed=args.seed,
    )
    table = load_embedding_table(args.table) if args.table else None
    return GraphPipeline.build(config, table=table)


def _sequence_vectors(spec, corpus, seq_dim):
    """Resolve --seq-embeddings: a JSONL path, "zero", or "random:SEED"."""
    if spec == "zero":
        return {s.id: np.zeros(seq_dim, dtype=np.float32) for s in corpus}, seq_dim
    if spec.startswith("random"):
        seed = int(spec.split(":", 1)[1]) if ":" in spec else 0
        vectors = {}
        for s in corpus:
            rng = np.random.default_rng(derive_seed(seed, f"seq:{s.id}"))
            vectors[s.id] = rng.standard_normal(seq_dim).astype(np.float32)
        return vectors, seq_dim
    vectors, dim, _ = load_sequence_embeddings(spec)
    missing = [s.id for s in corpus if s.id not in vectors]
    if missing:
        raise FlowEmbedError(
            f"sequence embeddings missing for {len(missing)} samples, "
            f"e.g. {missing[:3]}"
        )
    return vectors, dim


def _prepare(corpus, vectors, loop_back, jobs):
    """Corpus -> PreparedSamples; unparseable samples get an empty graph."""
    samples = []
    failures = 0
    results = _extract_corpus(corpus, loop_back, False, jobs)
    graphs = {}
    for sample_id, graph_json, _, _, failure in results:
        if failure is None:
            from .dfg import parse_graph_json
            graphs[sample_id] = parse_graph_json(graph_json)
        else:
            failures += 1
            graphs[sample_id] = empty_graph(sample_id)
    for s in corpus:
        samples.append(PreparedSample(s.id, graphs[s.id], vectors[s.id], s.label))
    return samples, failures


def _three_way(args, corpus):
    if args.manifest:
        return split_by_manifest(corpus, load_split_manifest(args.manifest))
    return split(corpus, SplitSpec(seed=args.seed, strategy=args.split))


def cmd_train(args):
    corpus = load_jsonl(args.dataset)
    vectors, dim = _sequence_vectors(args.seq_embeddings, corpus, args.seq_dim)
    args.seq_dim = dim  # a JSONL file dictates the sequence width
    pipeline = _build_pipeline(args)
    train_c, valid_c, test_c = _three_way(args, corpus)
    train_s, fail_train = _prepare(train_c, vectors, args.loop_back_edges, args.jobs)
    valid_s, fail_valid = _prepare(valid_c, vectors, args.loop_back_edges, args.jobs)
    failures = fail_train + fail_valid
    if failures:
        print(f"warning: {failures} samples fell back to empty graphs", file=sys.stderr)

    cfg = TrainConfig(
        learning_rate=args.lr, epochs=args.epochs, batch_size=args.batch_size,
        seed=args.seed, train_graph_branch=not args.no_train_graph_branch,
        train_embedding_table=args.train_embedding_table,
        optimizer=args.optimizer, momentum=args.momentum,
        class_weights=args.class_weights,
    )
    result = train(train_s, pipeline, cfg, valid_samples=valid_s)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(pipeline, out_dir / "checkpoint.bin")
    (out_dir / "history.csv").write_text(result.history_csv())
    vloss, vreport, _ = evaluate(pipeline, valid_s)
    (out_dir / "metrics.json").write_text(json.dumps(
        {"split": "valid", "loss": vloss, "best_epoch": result.best_epoch,
         "metrics": vreport.to_dict()}, sort_keys=True) + "\n")
    _write_config(out_dir, _resolved(args, {
        "resolved_embed_dim": pipeline.config.embed_dim,
        "resolved_seq_dim": pipeline.config.seq_dim,
    }))
    print(f"best validation F1 {result.best_f1:.4f} at epoch {result.best_epoch}")
    print(vreport.format_table())
    return 0


def cmd_eval(args):
    pipeline = load_checkpoint(args.checkpoint)
    corpus = load_jsonl(args.dataset)
    vectors, dim = _sequence_vectors(args.seq_embeddings, corpus,
                                     pipeline.config.seq_dim)
    if args.subset == "all":
        subset = corpus
    else:
        parts = dict(zip(("train", "valid", "test"), _three_way(args, corpus)))
        subset = parts[args.subset]
    samples, failures = _prepare(subset, vectors, args.loop_back_edges, args.jobs)
    if failures:
        print(f"warning: {failures} samples fell back to empty graphs", file=sys.stderr)
    loss, report, _ = evaluate(pipeline, samples)
    payload = {"split": args.subset, "loss": loss, "metrics": report.to_dict()}
    if args.out:
        Path(args.out).write_text(json.dumps(payload, sort_keys=True) + "\n")
    print(report.format_table())
    return 0


def cmd_grid(args):
    corpus = load_jsonl(args.dataset)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pe_modes = [args.pe, "off"] if args.ablate_pe and args.pe != "off" else [args.pe]
    vectors, dim = _sequence_vectors(args.seq_embeddings, corpus, args.seq_dim)
    _, _, test_c = _three_way(args, corpus)
    test_s, _ = _prepare(test_c, vectors, args.loop_back_edges, args.jobs)
    rows = []
    for pe in pe_modes:
        for gnn, pool_mode in GRID_ORDER:
            label = grid_label(gnn, pool_mode) + ("" if pe == args.pe else "-nope")
            sub = argparse.Namespace(**vars(args))
            sub.gnn, sub.pool, sub.pe = gnn, pool_mode, pe
            sub.seq_dim = dim
            sub.out = str(out_dir / label)
            print(f"== {label}")
            cmd_train(sub)
            pipeline = load_checkpoint(Path(sub.out) / "checkpoint.bin")
            _, report, _ = evaluate(pipeline, test_s)
            rows.append({"label": label, "accuracy": report.accuracy,
                         "f1": report.f1, "precision": report.precision,
                         "recall": report.recall})
    header = f"{'config':<14} {'accuracy':>9} {'f1':>9} {'precision':>9} {'recall':>9}"
    lines = [header] + [
        f"{r['label']:<14} {r['accuracy']:>9.4f} {r['f1']:>9.4f} "
        f"{r['precision']:>9.4f} {r['recall']:>9.4f}"
        for r in rows
    ]
    table_text = "\n".join(lines)
    (out_dir / "report.json").write_text(json.dumps(rows, sort_keys=True, indent=2) + "\n")
    (out_dir / "report.txt").write_text(table_text + "\n")
    _write_config(out_dir, _resolved(args))
    print(table_text)
    return 0


def cmd_embed(args):
    corpus = load_jsonl(args.dataset)
    if args.checkpoint:
        pipeline = load_checkpoint(args.checkpoint)
    else:
        pipeline = _build_pipeline(args)
    lines = []
    for s in corpus:
        try:
            graph, _ = extract_graph(s, loop_back_edges=args.loop_back_edges)
        except FlowEmbedError:
            graph = empty_graph(s.id)
        g = pipeline.graph_vector(graph)
        lines.append(json.dumps(
            {"id": s.id, "vector": [round(float(x), 8) for x in g.values]}))
    out_path = Path(args.out)
    out_path.write_text("\n".join(lines) + "\n")
    _write_config(out_path.parent, _resolved(args))
    print(f"wrote {len(lines)} graph vectors to {out_path}")
    return 0


def _add_pipeline_flags(p):
    p.add_argument("--gnn", choices=["gcn", "ggnn"], default="gcn")
    p.add_argument("--pool", choices=["sum", "max", "mean", "united"], default="united")
    p.add_argument("--pe", choices=["post-pool", "per-node", "off"], default="post-pool")
    p.add_argument("--adjacency", choices=["symmetric", "directed"], default="symmetric")
    p.add_argument("--embed-dim", type=int, default=128)
    p.add_argument("--gnn-depth", type=int, default=2)
    p.add_argument("--seq-dim", type=int, default=768)
    p.add_argument("--hidden-dim", type=int, default=0)
    p.add_argument("--table", default=None, help="embedding table file")


def _add_train_flags(p):
    p.add_argument("--seq-embeddings", default="zero",
                   help="JSONL path, 'zero', or 'random:SEED'")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--optimizer", choices=["sgd", "momentum"], default="sgd")
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--class-weights", action="store_true")
    p.add_argument("--no-train-graph-branch", action="store_true")
    p.add_argument("--train-embedding-table", action="store_true")
    p.add_argument("--split", choices=["shuffled", "sequential"], default="shuffled")
    p.add_argument("--manifest", default=None, help="split manifest JSON")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--loop-back-edges", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flowembed",
        description="Data flow graphs, graph embeddings and a vulnerability classifier for C functions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="dataset JSONL -> one graph JSON per sample")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--dot", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("export-dot", help="print one graph as DOT")
    p.add_argument("file", nargs="?", help="C snippet file")
    p.add_argument("--dataset", default=None)
    p.add_argument("--id", default=None, help="sample id inside --dataset")
    p.add_argument("--tree", action="store_true", help="also print the syntax tree")
    _add_common(p)
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("embed", help="write pooled graph vectors as JSONL")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--checkpoint", default=None)
    _add_pipeline_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("train", help="train the fused classifier")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    _add_pipeline_flags(p)
    _add_train_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--subset", choices=["train", "valid", "test", "all"], default="test")
    p.add_argument("--seq-embeddings", default="zero")
    p.add_argument("--split", choices=["shuffled", "sequential"], default="shuffled")
    p.add_argument("--manifest", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid", help="train/evaluate all gnn x pooling combinations")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ablate-pe", action="store_true")
    _add_pipeline_flags(p)
    _add_train_flags(p)
    _add_common(p)
    # --gnn/--pool are owned by the grid itself
    p.set_defaults(func=cmd_grid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FlowEmbedError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort CLI guard
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
