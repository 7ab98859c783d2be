/** Reader for the dataset JSONL the graph pipeline consumes.
 *
 * Sample ids follow the pipeline's convention: an explicit "idx" field
 * wins, otherwise the zero-based line number is the id.
 */

import { readFileSync } from "node:fs";

export interface DatasetSample {
  id: string;
  code: string;
}

export function readDataset(path: string): DatasetSample[] {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`cannot read dataset ${path}: ${(err as Error).message}`);
  }
  const samples: DatasetSample[] = [];
  const lines = text.split("\n");
  for (let lineno = 0; lineno < lines.length; lineno++) {
    const raw = lines[lineno].trim();
    if (raw.length === 0) continue;
    let obj: unknown;
    try {
      obj = JSON.parse(raw);
    } catch (err) {
      throw new Error(`${path}:${lineno}: invalid JSON: ${(err as Error).message}`);
    }
    const record = obj as Record<string, unknown>;
    if (typeof record.func !== "string") {
      throw new Error(`${path}:${lineno}: missing 'func' field`);
    }
    const id = record.idx === undefined ? String(lineno) : String(record.idx);
    samples.push({ id, code: record.func });
  }
  if (samples.length === 0) {
    throw new Error(`${path}: no samples found`);
  }
  return samples;
}
