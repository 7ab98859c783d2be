import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { run } from "../src/cli.js";
import { readDataset } from "../src/dataset.js";
import { loadManifest, validateManifest } from "../src/manifest.js";
import { renderSequenceEmbeddings, exportSequenceEmbeddings } from "../src/seqExport.js";
import { buildVocabulary, renderEmbeddingTable, exportEmbeddingTable, TABLE_MAGIC } from "../src/tableExport.js";
import type { ExportManifest } from "../src/manifest.js";

function workspace(): { dir: string; manifest: ExportManifest } {
  const dir = mkdtempSync(join(tmpdir(), "exporter-"));
  const dataset = join(dir, "data.jsonl");
  writeFileSync(dataset, [
    '{"func": "int f(int a){ return a; }", "target": 0, "idx": "fn0"}',
    '{"func": "void g(){ char *s = NULL; use(s); }", "target": 1}',
    '{"func": "uint32_t h(size_t n){ return n; }", "target": 0}',
  ].join("\n") + "\n");
  const manifest: ExportManifest = {
    model: "hash-v1",
    pooling: "mean",
    dim: 12,
    dataset,
    outputs: {
      sequence: join(dir, "seq.jsonl"),
      table: join(dir, "table.json"),
      tableMatrix: null,
    },
  };
  return { dir, manifest };
}

describe("dataset reader", () => {
  it("mirrors the pipeline's id synthesis", () => {
    const { manifest } = workspace();
    const samples = readDataset(manifest.dataset);
    expect(samples.map((s) => s.id)).toEqual(["fn0", "1", "2"]);
  });

  it("rejects missing func", () => {
    const dir = mkdtempSync(join(tmpdir(), "exporter-"));
    const bad = join(dir, "bad.jsonl");
    writeFileSync(bad, '{"target": 1}\n');
    expect(() => readDataset(bad)).toThrow(/func/);
  });
});

describe("manifest validation", () => {
  it("accepts a complete manifest", () => {
    const { manifest } = workspace();
    expect(validateManifest(manifest)).toEqual(manifest);
  });

  it("rejects bad pooling and missing outputs", () => {
    const { manifest } = workspace();
    expect(() => validateManifest({ ...manifest, pooling: "cls" })).toThrow(/pooling/);
    expect(() => validateManifest({ ...manifest, outputs: {} })).toThrow(/outputs/);
    expect(() => validateManifest({ ...manifest, dim: 0 })).toThrow(/dim/);
  });
});

describe("sequence export", () => {
  it("writes a manifest header and one line per sample", () => {
    const { manifest } = workspace();
    const text = renderSequenceEmbeddings(manifest);
    const lines = text.trim().split("\n");
    expect(lines).toHaveLength(4);
    const header = JSON.parse(lines[0]);
    expect(header.manifest.model).toBe("hash-v1");
    const first = JSON.parse(lines[1]);
    expect(first.id).toBe("fn0");
    expect(first.vector).toHaveLength(12);
    const widths = lines.slice(1).map((l) => JSON.parse(l).vector.length);
    expect(new Set(widths).size).toBe(1);
  });

  it("re-export is bitwise identical", () => {
    const { manifest } = workspace();
    exportSequenceEmbeddings(manifest);
    const first = readFileSync(manifest.outputs.sequence);
    exportSequenceEmbeddings(manifest);
    const second = readFileSync(manifest.outputs.sequence);
    expect(first.equals(second)).toBe(true);
  });
});

describe("table export", () => {
  it("vocabulary has reserved slots, C types and dataset typedefs", () => {
    const vocab = buildVocabulary(["uint32_t h(size_t n){}"]);
    expect(vocab[0]).toBe("<pad>");
    expect(vocab[1]).toBe("<unk>");
    expect(vocab).toContain("int");
    expect(vocab).toContain("*");
    expect(vocab).toContain("uint32_t");
    expect(vocab).toContain("size_t");
  });

  it("inline table matches the schema with a zero pad row", () => {
    const { manifest } = workspace();
    const { json, binary } = renderEmbeddingTable(manifest);
    expect(binary).toBeNull();
    const payload = JSON.parse(json);
    expect(payload.dim).toBe(12);
    expect(payload.tokens).toHaveLength(payload.matrix.length);
    expect(payload.matrix[0]).toEqual(new Array(12).fill(0));
    expect(payload.manifest.pooling).toBe("mean");
  });

  it("binary table carries the magic and float32 payload", () => {
    const { dir, manifest } = workspace();
    manifest.outputs.tableMatrix = join(dir, "table.bin");
    exportEmbeddingTable(manifest);
    const payload = JSON.parse(readFileSync(manifest.outputs.table, "utf8"));
    expect(payload.matrix_path).toBe("table.bin");
    const blob = readFileSync(join(dir, "table.bin"));
    expect(blob.subarray(0, 8).toString("ascii")).toBe(TABLE_MAGIC);
    expect(blob.length).toBe(8 + payload.tokens.length * payload.dim * 4);
  });

  it("re-export is bitwise identical", () => {
    const { manifest } = workspace();
    exportEmbeddingTable(manifest);
    const first = readFileSync(manifest.outputs.table);
    exportEmbeddingTable(manifest);
    expect(first.equals(readFileSync(manifest.outputs.table))).toBe(true);
  });
});

describe("cli", () => {
  it("runs both exports from a manifest file", () => {
    const { dir, manifest } = workspace();
    const manifestPath = join(dir, "manifest.json");
    writeFileSync(manifestPath, JSON.stringify(manifest));
    expect(run(["--manifest", manifestPath])).toBe(0);
    expect(loadManifest(manifestPath).model).toBe("hash-v1");
    expect(readFileSync(manifest.outputs.sequence, "utf8")).toContain('"id"');
    expect(readFileSync(manifest.outputs.table, "utf8")).toContain('"tokens"');
  });

  it("bad usage exits 2, encoder failure exits 1", () => {
    expect(run([])).toBe(2);
    expect(run(["--only", "nonsense"])).toBe(2);
    const { dir, manifest } = workspace();
    const manifestPath = join(dir, "manifest.json");
    writeFileSync(manifestPath, JSON.stringify({ ...manifest, model: "gpt-9" }));
    expect(run(["--manifest", manifestPath])).toBe(1);
  });
});
