/** Write the per-function sequence-embedding JSONL.
 *
 * Line 1 is {"manifest": ...} (provenance header); every following line
 * is {"id", "vector"} in dataset order with one fixed vector width.
 */

import { writeFileSync } from "node:fs";

import { readDataset } from "./dataset.js";
import { loadEncoder } from "./encoder.js";
import type { ExportManifest } from "./manifest.js";

export function renderSequenceEmbeddings(manifest: ExportManifest): string {
  const encoder = loadEncoder(manifest.model, manifest.dim);
  const samples = readDataset(manifest.dataset);
  const lines: string[] = [JSON.stringify({ manifest })];
  for (const sample of samples) {
    const vector = encoder.encode(sample.code, manifest.pooling);
    lines.push(JSON.stringify({ id: sample.id, vector: Array.from(vector) }));
  }
  return lines.join("\n") + "\n";
}

export function exportSequenceEmbeddings(manifest: ExportManifest): number {
  const text = renderSequenceEmbeddings(manifest);
  writeFileSync(manifest.outputs.sequence, text);
  return text.split("\n").length - 2; // minus header and trailing newline
}
