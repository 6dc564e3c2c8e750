/**
 * Orchestration: dataset JSONL -> EMB1 file + manifest sidecar.
 */

import { createHash } from "node:crypto";
import { readFileSync, writeFileSync } from "node:fs";

import { encodeEmb1 } from "./emb1.js";
import { Embedder, Pooling } from "./embedder.js";
import { readDataset } from "./jsonl.js";

export interface ExportManifest {
  model: string;
  pooling: Pooling;
  dim: number;
  count: number;
  dataset_sha256: string;
}

export interface ExportResult {
  emb1Path: string;
  manifestPath: string;
  manifest: ExportManifest;
}

export function manifestPathFor(outPath: string): string {
  return `${outPath}.manifest.json`;
}

const BATCH = 64;

export async function exportEmbeddings(
  datasetPath: string,
  embedder: Embedder,
  pooling: Pooling,
  outPath: string,
): Promise<ExportResult> {
  const dataset = readDataset(datasetPath);
  const rows: Float32Array[] = [];
  for (let start = 0; start < dataset.records.length; start += BATCH) {
    const chunk = dataset.records.slice(start, start + BATCH).map((r) => r.text);
    const vecs = await embedder.embedBatch(chunk, pooling);
    if (vecs.length !== chunk.length) {
      throw new Error(`embedder returned ${vecs.length} rows for ${chunk.length} texts`);
    }
    rows.push(...vecs);
  }

  for (let i = 0; i < rows.length; i++) {
    let norm = 0;
    for (const v of rows[i]) {
      if (!Number.isFinite(v)) {
        throw new Error(`non-finite embedding for utterance id ${i}`);
      }
      norm += v * v;
    }
    if (dataset.records[i].text.length > 0 && norm === 0) {
      throw new Error(`zero embedding for non-empty utterance id ${i}`);
    }
  }

  writeFileSync(outPath, encodeEmb1(rows, embedder.dim));

  const digest = createHash("sha256").update(readFileSync(datasetPath)).digest("hex");
  const manifest: ExportManifest = {
    model: embedder.id,
    pooling,
    dim: embedder.dim,
    count: rows.length,
    dataset_sha256: digest,
  };
  const manifestPath = manifestPathFor(outPath);
  writeFileSync(manifestPath, JSON.stringify(manifest, Object.keys(manifest).sort(), 2) + "\n");
  return { emb1Path: outPath, manifestPath, manifest };
}
