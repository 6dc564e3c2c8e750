#!/usr/bin/env node
/**
 * embed-export <dataset.jsonl> <model-id> <out.emb1> [--pooling mean|cls] [--dim 768]
 *
 * Writes the EMB1 table plus `<out>.manifest.json`. The model id
 * "deterministic-hash-v1" selects the offline pinned encoder; anything
 * else is loaded as a transformers.js feature-extraction model.
 */

import { parseArgs } from "node:util";

import { makeEmbedder, Pooling } from "./embedder.js";
import { exportEmbeddings } from "./export.js";

function usage(): never {
  console.error(
    "usage: embed-export <dataset.jsonl> <model-id> <out.emb1> " +
      "[--pooling mean|cls] [--dim N]",
  );
  process.exit(2);
}

async function main(): Promise<void> {
  let parsed;
  try {
    parsed = parseArgs({
      args: process.argv.slice(2),
      allowPositionals: true,
      options: {
        pooling: { type: "string", default: "mean" },
        dim: { type: "string", default: "768" },
      },
    });
  } catch (err) {
    console.error((err as Error).message);
    usage();
  }
  const { positionals, values } = parsed;
  if (positionals.length !== 3) usage();
  const [datasetPath, modelId, outPath] = positionals;
  if (values.pooling !== "mean" && values.pooling !== "cls") usage();
  const dim = Number(values.dim);
  if (!Number.isInteger(dim) || dim < 1) usage();

  const embedder = makeEmbedder(modelId, dim);
  const result = await exportEmbeddings(datasetPath, embedder, values.pooling as Pooling, outPath);
  console.log(
    `wrote ${result.manifest.count} x ${result.manifest.dim} embeddings to ` +
      `${result.emb1Path} (manifest ${result.manifestPath})`,
  );
}

main().catch((err) => {
  console.error(err instanceof Error ? err.message : String(err));
  process.exit(1);
});
