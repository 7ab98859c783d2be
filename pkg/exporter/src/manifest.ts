/** Export manifest: the full recipe for one export run, recorded verbatim
 * into every output header for provenance. */

import { readFileSync } from "node:fs";

import type { PoolingRule } from "./encoder.js";

export interface ExportManifest {
  model: string;
  pooling: PoolingRule;
  dim: number;
  dataset: string;
  outputs: {
    sequence: string;
    table: string;
    /** sibling binary for the table matrix; inline JSON rows when absent */
    tableMatrix?: string | null;
  };
}

export function validateManifest(raw: unknown): ExportManifest {
  if (typeof raw !== "object" || raw === null) {
    throw new Error("manifest must be a JSON object");
  }
  const m = raw as Record<string, unknown>;
  if (typeof m.model !== "string" || m.model.length === 0) {
    throw new Error("manifest.model must be a non-empty string");
  }
  if (m.pooling !== "first-token" && m.pooling !== "mean") {
    throw new Error(`manifest.pooling must be "first-token" or "mean", got ${JSON.stringify(m.pooling)}`);
  }
  if (typeof m.dim !== "number" || !Number.isInteger(m.dim) || m.dim < 1) {
    throw new Error("manifest.dim must be a positive integer");
  }
  if (typeof m.dataset !== "string" || m.dataset.length === 0) {
    throw new Error("manifest.dataset must name the input JSONL");
  }
  const outputs = m.outputs as Record<string, unknown> | undefined;
  if (
    typeof outputs !== "object" || outputs === null ||
    typeof outputs.sequence !== "string" || typeof outputs.table !== "string"
  ) {
    throw new Error("manifest.outputs must name 'sequence' and 'table' paths");
  }
  const tableMatrix = outputs.tableMatrix;
  if (tableMatrix !== undefined && tableMatrix !== null && typeof tableMatrix !== "string") {
    throw new Error("manifest.outputs.tableMatrix must be a string when present");
  }
  return {
    model: m.model,
    pooling: m.pooling,
    dim: m.dim,
    dataset: m.dataset,
    outputs: {
      sequence: outputs.sequence,
      table: outputs.table,
      tableMatrix: (tableMatrix as string | null | undefined) ?? null,
    },
  };
}

export function loadManifest(path: string): ExportManifest {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`cannot read manifest ${path}: ${(err as Error).message}`);
  }
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new Error(`manifest ${path} is not valid JSON: ${(err as Error).message}`);
  }
  return validateManifest(raw);
}
