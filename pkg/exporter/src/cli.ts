#!/usr/bin/env node
/** CLI: seq-embed-exporter --manifest FILE [--only sequence|table] */

import { loadManifest } from "./manifest.js";
import { exportSequenceEmbeddings } from "./seqExport.js";
import { exportEmbeddingTable } from "./tableExport.js";

export function run(argv: string[]): number {
  let manifestPath: string | null = null;
  let only: "sequence" | "table" | null = null;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--manifest") {
      manifestPath = argv[++i] ?? null;
    } else if (arg === "--only") {
      const value = argv[++i];
      if (value !== "sequence" && value !== "table") {
        console.error(`error: --only expects "sequence" or "table", got ${value}`);
        return 2;
      }
      only = value;
    } else if (arg === "--help" || arg === "-h") {
      console.log("usage: seq-embed-exporter --manifest FILE [--only sequence|table]");
      return 0;
    } else {
      console.error(`error: unknown argument ${arg}`);
      return 2;
    }
  }
  if (!manifestPath) {
    console.error("error: --manifest is required");
    return 2;
  }
  try {
    const manifest = loadManifest(manifestPath);
    if (only !== "table") {
      const n = exportSequenceEmbeddings(manifest);
      console.log(`wrote ${n} sequence embeddings to ${manifest.outputs.sequence}`);
    }
    if (only !== "sequence") {
      const v = exportEmbeddingTable(manifest);
      console.log(`wrote ${v}-token embedding table to ${manifest.outputs.table}`);
    }
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js") ?? false;
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
