"""Round-trip the TypeScript exporter's outputs through the pipeline.

Requires node and the built exporter (exporter/dist/cli.js); skipped
otherwise. Covers: the exported table loads cleanly, the exported
sequence JSONL feeds training without shape errors, and deterministic
re-export is bitwise identical.
"""

import json
import shutil
import subprocess
from pathlib import Path

import pytest

from flowembed.cli import main
from flowembed.data import save_jsonl
from flowembed.embedding import load_embedding_table
from flowembed.model import load_sequence_embeddings
from flowembed.synthetic import synthetic_corpus

EXPORTER_CLI = Path(__file__).resolve().parent.parent / "exporter" / "dist" / "cli.js"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not EXPORTER_CLI.exists(),
    reason="node or the built exporter is unavailable",
)


def run_exporter(manifest_path):
    return subprocess.run(
        ["node", str(EXPORTER_CLI), "--manifest", str(manifest_path)],
        capture_output=True, text=True,
    )


@pytest.fixture
def export_run(tmp_path):
    corpus = synthetic_corpus(n=12, seed=13)
    dataset = tmp_path / "data.jsonl"
    save_jsonl(corpus, dataset)
    manifest = {
        "model": "hash-v1",
        "pooling": "mean",
        "dim": 16,
        "dataset": str(dataset),
        "outputs": {
            "sequence": str(tmp_path / "seq.jsonl"),
            "table": str(tmp_path / "table.json"),
            "tableMatrix": str(tmp_path / "table.bin"),
        },
    }
    manifest_path = tmp_path / "manifest.json"
    manifest_path.write_text(json.dumps(manifest))
    result = run_exporter(manifest_path)
    assert result.returncode == 0, result.stderr
    return tmp_path, dataset, manifest_path


def test_exported_table_loads(export_run):
    tmp_path, _, _ = export_run
    table = load_embedding_table(tmp_path / "table.json")
    assert table.dim == 16
    assert "int" in table.vocab
    assert table.vocab.id("<pad>") == 0
    assert table.vocab.id("<unk>") == 1


def test_exported_sequences_load(export_run):
    tmp_path, _, _ = export_run
    vectors, dim, manifest = load_sequence_embeddings(tmp_path / "seq.jsonl")
    assert dim == 16
    assert len(vectors) == 12
    assert manifest["model"] == "hash-v1"
    assert manifest["pooling"] == "mean"


def test_exported_artifacts_feed_training(export_run):
    tmp_path, dataset, _ = export_run
    out = tmp_path / "run"
    rc = main([
        "train", "--dataset", str(dataset), "--out", str(out),
        "--table", str(tmp_path / "table.json"),
        "--seq-embeddings", str(tmp_path / "seq.jsonl"),
        "--epochs", "2", "--seed", "3",
    ])
    assert rc == 0
    assert (out / "checkpoint.bin").exists()
    config = json.loads((out / "config.json").read_text())
    assert config["resolved_seq_dim"] == 16
    assert config["resolved_embed_dim"] == 16


def test_reexport_is_bitwise_identical(export_run):
    tmp_path, _, manifest_path = export_run
    before = {
        name: (tmp_path / name).read_bytes()
        for name in ("seq.jsonl", "table.json", "table.bin")
    }
    result = run_exporter(manifest_path)
    assert result.returncode == 0, result.stderr
    for name, blob in before.items():
        assert (tmp_path / name).read_bytes() == blob, name


def test_unknown_encoder_fails_with_message(tmp_path, export_run):
    _, dataset, _ = export_run
    manifest = {
        "model": "roberta-base", "pooling": "mean", "dim": 8,
        "dataset": str(dataset),
        "outputs": {"sequence": str(tmp_path / "s.jsonl"),
                    "table": str(tmp_path / "t.json")},
    }
    path = tmp_path / "bad_manifest.json"
    path.write_text(json.dumps(manifest))
    result = run_exporter(path)
    assert result.returncode == 1
    assert "cannot load encoder" in result.stderr
