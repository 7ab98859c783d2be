"""Corpus loading, 8:1:1 splitting, and classification metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cparser import SourceFunction
from .errors import ContractViolation, DataError, FormatError, TooSmall


@dataclass
class Corpus:
    samples: list[SourceFunction]
    name: str = ""

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def ids(self):
        return [s.id for s in self.samples]


@dataclass
class SplitSpec:
    """Fixed 8:1:1 ratios; odd remainders give the extra sample to valid."""

    seed: int = 0
    strategy: str = "shuffled"  # "shuffled" | "sequential"

    def __post_init__(self):
        if self.strategy not in ("shuffled", "sequential"):
            raise ValueError(f"unknown split strategy {self.strategy!r}")


@dataclass
class MetricsReport:
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float

    def to_dict(self):
        return {
            "tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn,
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "f1": self.f1,
        }

    def format_table(self):
        rows = [
            ("accuracy", self.accuracy), ("precision", self.precision),
            ("recall", self.recall), ("f1", self.f1),
        ]
        lines = [f"TP {self.tp}  TN {self.tn}  FP {self.fp}  FN {self.fn}"]
        lines += [f"{name:<10} {value:.4f}" for name, value in rows]
        return "\n".join(lines)


def load_jsonl(path, name: str | None = None) -> Corpus:
    """One JSON object per line: "func" (string), "target" (0/1), optional "idx"."""
    path = Path(path)
    samples = []
    seen_ids = set()
    with path.open() as fh:
        for lineno, raw in enumerate(fh):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict) or "func" not in obj:
                raise FormatError(f"{path}:{lineno}: missing 'func' field")
            if not isinstance(obj["func"], str):
                raise FormatError(f"{path}:{lineno}: 'func' must be a string")
            if "target" not in obj:
                raise FormatError(f"{path}:{lineno}: missing 'target' field")
            target = obj["target"]
            if target not in (0, 1):
                raise DataError(f"{path}:{lineno}: target must be 0 or 1, got {target!r}")
            sample_id = str(obj.get("idx", lineno))
            if sample_id in seen_ids:
                raise DataError(f"{path}:{lineno}: duplicate sample id {sample_id!r}")
            seen_ids.add(sample_id)
            samples.append(SourceFunction(id=sample_id, code=obj["func"], label=int(target)))
    return Corpus(samples=samples, name=name or path.stem)


def save_jsonl(corpus: Corpus, path):
    path = Path(path)
    with path.open("w") as fh:
        for s in corpus.samples:
            fh.write(json.dumps({"idx": s.id, "func": s.code, "target": s.label}) + "\n")
    return path


def split_sizes(n: int) -> tuple[int, int, int]:
    n_train = int(np.floor(0.8 * n))
    rem = n - n_train
    n_valid = rem - rem // 2  # larger half to valid when odd
    return n_train, n_valid, rem // 2


def split(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus, Corpus]:
    """Disjoint, exhaustive 8:1:1 partition; shuffled or file-order cut."""
    n = len(corpus)
    if n < 3:
        raise TooSmall(f"need at least 3 samples to split, got {n}")
    if spec.strategy == "shuffled":
        order = np.random.default_rng(spec.seed).permutation(n)
    else:
        order = np.arange(n)
    n_train, n_valid, n_test = split_sizes(n)
    picked = [corpus.samples[i] for i in order]
    return (
        Corpus(picked[:n_train], corpus.name + "-train"),
        Corpus(picked[n_train:n_train + n_valid], corpus.name + "-valid"),
        Corpus(picked[n_train + n_valid:], corpus.name + "-test"),
    )


def load_split_manifest(path) -> dict[str, list[str]]:
    """Optional externally published split: {"train": [ids], "valid": ..., "test": ...}."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read split manifest {path}: {exc}") from exc
    for key in ("train", "valid", "test"):
        if key not in payload or not isinstance(payload[key], list):
            raise FormatError(f"split manifest missing id list {key!r}")
    return {k: [str(i) for i in payload[k]] for k in ("train", "valid", "test")}


def split_by_manifest(corpus: Corpus, manifest: dict[str, list[str]]):
    by_id = {s.id: s for s in corpus.samples}
    parts = []
    for key in ("train", "valid", "test"):
        missing = [i for i in manifest[key] if i not in by_id]
        if missing:
            raise DataError(f"manifest {key} ids not in corpus: {missing[:5]}")
        parts.append(Corpus([by_id[i] for i in manifest[key]], corpus.name + "-" + key))
    return tuple(parts)


def compute_metrics(predictions, labels) -> MetricsReport:
    """Accuracy, precision, recall, F1 with a return-0 zero-division policy."""
    if len(predictions) != len(labels):
        raise ContractViolation(
            f"{len(predictions)} predictions vs {len(labels)} labels"
        )
    if len(labels) == 0:
        raise ContractViolation("metrics require at least one sample")
    tp = tn = fp = fn = 0
    for p, y in zip(predictions, labels):
        if y == 1:
            if p == 1:
                tp += 1
            else:
                fn += 1
        else:
            if p == 1:
                fp += 1
            else:
                tn += 1
    return metrics_from_counts(tp, tn, fp, fn)


def metrics_from_counts(tp: int, tn: int, fp: int, fn: int) -> MetricsReport:
    total = tp + tn + fp + fn
    accuracy = (tp + tn) / total if total else 0.0
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return MetricsReport(tp, tn, fp, fn, accuracy, precision, recall, f1)
