/** Write the encoder's embedding table in the pipeline's table format.
 *
 * JSON schema: {"dim", "tokens", "matrix" | "matrix_path", "manifest"};
 * the optional sibling binary is the 8-byte "DFEPTEMB" magic followed by
 * little-endian float32 rows. Reserved vocabulary slots 0/1 are <pad>
 * (all-zero row) and <unk>.
 */

import { writeFileSync } from "node:fs";
import { basename, dirname, join } from "node:path";

import { readDataset } from "./dataset.js";
import { loadEncoder } from "./encoder.js";
import type { ExportManifest } from "./manifest.js";

export const TABLE_MAGIC = "DFEPTEMB";

const C_TYPE_TOKENS = [
  "*", "bool", "char", "char_literal", "const", "double", "enum", "false",
  "float", "int", "long", "null", "number_literal", "short", "signed",
  "size_t", "string_literal", "struct", "true", "union", "unknown",
  "unsigned", "void", "volatile",
];

/** Fixed C type tokens plus typedef-looking names seen in the dataset. */
export function buildVocabulary(codes: string[]): string[] {
  const seen = new Set<string>(C_TYPE_TOKENS);
  const typedefish = /\b[a-z_][a-z_0-9]*_t\b/g;
  for (const code of codes) {
    for (const match of code.matchAll(typedefish)) {
      seen.add(match[0]);
    }
  }
  return ["<pad>", "<unk>", ...Array.from(seen).sort()];
}

export interface TableExport {
  json: string;
  binary: Buffer | null;
}

export function renderEmbeddingTable(manifest: ExportManifest): TableExport {
  const encoder = loadEncoder(manifest.model, manifest.dim);
  const samples = readDataset(manifest.dataset);
  const tokens = buildVocabulary(samples.map((s) => s.code));
  const rows: Float32Array[] = tokens.map((token) =>
    token === "<pad>" ? new Float32Array(manifest.dim) : encoder.tokenVector(token)
  );

  const payload: Record<string, unknown> = {
    dim: manifest.dim,
    tokens,
    manifest,
  };
  let binary: Buffer | null = null;
  if (manifest.outputs.tableMatrix) {
    const body = Buffer.alloc(tokens.length * manifest.dim * 4);
    let off = 0;
    for (const row of rows) {
      for (const value of row) {
        body.writeFloatLE(value, off);
        off += 4;
      }
    }
    binary = Buffer.concat([Buffer.from(TABLE_MAGIC, "ascii"), body]);
    payload.matrix_path = basename(manifest.outputs.tableMatrix);
  } else {
    payload.matrix = rows.map((row) => Array.from(row));
  }
  return { json: JSON.stringify(payload), binary };
}

export function exportEmbeddingTable(manifest: ExportManifest): number {
  const { json, binary } = renderEmbeddingTable(manifest);
  writeFileSync(manifest.outputs.table, json);
  if (binary !== null && manifest.outputs.tableMatrix) {
    const target = join(dirname(manifest.outputs.table),
                        basename(manifest.outputs.tableMatrix));
    writeFileSync(target, binary);
  }
  return (JSON.parse(json) as { tokens: string[] }).tokens.length;
}
