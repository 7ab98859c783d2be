import json

import numpy as np
import pytest

from flowembed.cli import main, grid_label
from flowembed.data import save_jsonl
from flowembed.embedding import EmbeddingTable, TypeVocabulary, save_embedding_table
from flowembed.pipeline import DEFAULT_TYPE_TOKENS
from flowembed.synthetic import synthetic_corpus


@pytest.fixture
def dataset(tmp_path):
    corpus = synthetic_corpus(n=30, seed=4)
    path = tmp_path / "data.jsonl"
    save_jsonl(corpus, path)
    return path


@pytest.fixture
def table_file(tmp_path):
    vocab = TypeVocabulary.from_tokens(DEFAULT_TYPE_TOKENS)
    rng = np.random.default_rng(8)
    table = EmbeddingTable(
        vocab, rng.uniform(-1, 1, size=(len(vocab), 16)).astype(np.float32))
    path = tmp_path / "table.json"
    save_embedding_table(table, path)
    return path


def test_extract_writes_graphs_and_summary(tmp_path, dataset):
    out = tmp_path / "graphs"
    rc = main(["extract", "--dataset", str(dataset), "--out", str(out)])
    assert rc == 0
    files = sorted(out.glob("syn*.json"))
    assert len(files) == 30
    summary = json.loads((out / "summary.json").read_text())
    assert summary["parsed"] == 30
    assert summary["failed"] == 0
    assert (out / "config.json").exists()


def test_extract_counts_failures_but_exits_zero(tmp_path):
    path = tmp_path / "data.jsonl"
    path.write_text(
        '{"func": "int a = 1;", "target": 0}\n'
        '{"func": "   ", "target": 1}\n'  # empty source fails extraction
    )
    out = tmp_path / "graphs"
    rc = main(["extract", "--dataset", str(path), "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["parsed"] == 1
    assert summary["failed"] == 1


def test_extract_parallel_matches_serial(tmp_path, dataset):
    out1 = tmp_path / "g1"
    out2 = tmp_path / "g2"
    assert main(["extract", "--dataset", str(dataset), "--out", str(out1)]) == 0
    assert main(["extract", "--dataset", str(dataset), "--out", str(out2),
                 "--jobs", "4"]) == 0
    graph_files = sorted(out1.glob("syn*.json"))
    assert graph_files
    for f1 in graph_files:
        assert f1.read_bytes() == (out2 / f1.name).read_bytes()
    assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()


def test_export_dot_contains_null_path(tmp_path, capsys):
    snippet = tmp_path / "fig.c"
    snippet.write_text('int f(){ char* str1 = NULL; printf("%s", str1); return 0; }')
    rc = main(["export-dot", str(snippet)])
    assert rc == 0
    out = capsys.readouterr().out
    assert 'label="NULL@' in out
    assert "->" in out
    # NULL feeds the definition which feeds the use: a directed path exists
    lines = [l for l in out.splitlines() if "->" in l]
    assert len(lines) == 2


def test_export_dot_tree_flag(tmp_path, capsys):
    snippet = tmp_path / "f.c"
    snippet.write_text("int f(){ return 0; }")
    rc = main(["export-dot", str(snippet), "--tree"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "(function_definition" in out


def test_unknown_pool_is_usage_error(dataset, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["train", "--dataset", str(dataset), "--out", str(tmp_path / "r"),
              "--pool", "bogus"])
    assert info.value.code == 2


def test_missing_dataset_is_exit_2(tmp_path):
    rc = main(["extract", "--dataset", str(tmp_path / "missing.jsonl"),
               "--out", str(tmp_path / "out")])
    assert rc == 2


def test_train_writes_artifacts(tmp_path, dataset, table_file):
    out = tmp_path / "run"
    rc = main(["train", "--dataset", str(dataset), "--out", str(out),
               "--table", str(table_file), "--seq-dim", "4",
               "--epochs", "8", "--lr", "0.01", "--optimizer", "momentum",
               "--seed", "1"])
    assert rc == 0
    assert (out / "checkpoint.bin").exists()
    assert (out / "history.csv").exists()
    assert (out / "metrics.json").exists()
    assert (out / "config.json").exists()
    header = (out / "history.csv").read_text().splitlines()[0]
    assert header == "epoch,split,loss,accuracy,precision,recall,f1"


def test_train_loss_decreases_smoothed(tmp_path, dataset, table_file):
    out = tmp_path / "run"
    rc = main(["train", "--dataset", str(dataset), "--out", str(out),
               "--table", str(table_file), "--seq-dim", "4",
               "--epochs", "20", "--lr", "0.01", "--optimizer", "momentum",
               "--seed", "1"])
    assert rc == 0
    rows = [l.split(",") for l in (out / "history.csv").read_text().splitlines()[1:]]
    losses = [float(r[2]) for r in rows if r[1] == "train"]
    window = 5
    smoothed = [sum(losses[i:i + window]) / window
                for i in range(len(losses) - window + 1)]
    for a, b in zip(smoothed, smoothed[1:]):
        assert b <= a + 0.02
    assert smoothed[-1] < smoothed[0]


def test_train_determinism_byte_identical(tmp_path, dataset, table_file):
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        rc = main(["train", "--dataset", str(dataset), "--out", str(out),
                   "--table", str(table_file), "--seq-dim", "4",
                   "--epochs", "3", "--seed", "7"])
        assert rc == 0
        outs.append(out)
    a, b = outs
    assert (a / "checkpoint.bin").read_bytes() == (b / "checkpoint.bin").read_bytes()
    assert (a / "metrics.json").read_bytes() == (b / "metrics.json").read_bytes()
    assert (a / "history.csv").read_bytes() == (b / "history.csv").read_bytes()


def test_eval_runs_on_checkpoint(tmp_path, dataset, table_file, capsys):
    out = tmp_path / "run"
    main(["train", "--dataset", str(dataset), "--out", str(out),
          "--table", str(table_file), "--seq-dim", "4", "--epochs", "3",
          "--seed", "1"])
    rc = main(["eval", "--checkpoint", str(out / "checkpoint.bin"),
               "--dataset", str(dataset), "--subset", "test", "--seed", "1",
               "--out", str(tmp_path / "m.json")])
    assert rc == 0
    payload = json.loads((tmp_path / "m.json").read_text())
    assert payload["split"] == "test"
    assert 0.0 <= payload["metrics"]["accuracy"] <= 1.0
    assert "accuracy" in capsys.readouterr().out


def test_embed_writes_vectors(tmp_path, dataset, table_file):
    out = tmp_path / "vectors.jsonl"
    rc = main(["embed", "--dataset", str(dataset), "--out", str(out),
               "--table", str(table_file), "--seed", "0"])
    assert rc == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 30
    first = json.loads(lines[0])
    assert set(first) == {"id", "vector"}
    assert len(first["vector"]) == 16


def test_grid_labels():
    assert grid_label("gcn", "united") == "GCN-uni"
    assert grid_label("ggnn", "sum") == "GGNN-sum"
    assert grid_label("gcn", "mean") == "GCN-mean"


def test_grid_emits_eight_rows(tmp_path, dataset, table_file):
    out = tmp_path / "grid"
    rc = main(["grid", "--dataset", str(dataset), "--out", str(out),
               "--table", str(table_file), "--seq-dim", "4",
               "--epochs", "2", "--seed", "5"])
    assert rc == 0
    rows = json.loads((out / "report.json").read_text())
    assert len(rows) == 8
    labels = [r["label"] for r in rows]
    assert labels == ["GGNN-sum", "GCN-sum", "GGNN-max", "GCN-max",
                      "GGNN-mean", "GCN-mean", "GGNN-uni", "GCN-uni"]
    assert (out / "report.txt").exists()


def test_grid_ablate_pe_doubles_rows(tmp_path, table_file):
    corpus = synthetic_corpus(n=12, seed=9)
    dataset = table_file.parent / "tiny.jsonl"
    save_jsonl(corpus, dataset)
    out = table_file.parent / "grid2"
    rc = main(["grid", "--dataset", str(dataset), "--out", str(out),
               "--table", str(table_file), "--seq-dim", "4",
               "--epochs", "1", "--seed", "5", "--ablate-pe"])
    assert rc == 0
    rows = json.loads((out / "report.json").read_text())
    assert len(rows) == 16


def test_grid_determinism(tmp_path, dataset, table_file):
    reports = []
    for name in ("g1", "g2"):
        out = tmp_path / name
        rc = main(["grid", "--dataset", str(dataset), "--out", str(out),
                   "--table", str(table_file), "--seq-dim", "4",
                   "--epochs", "1", "--seed", "5"])
        assert rc == 0
        reports.append((out / "report.json").read_bytes())
    assert reports[0] == reports[1]
