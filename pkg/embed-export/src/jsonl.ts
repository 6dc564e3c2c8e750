/**
 * Canonical dataset reader (JSON Lines, UTF-8).
 *
 * An optional first line `{"vocab": [...]}` pins class order; every other
 * non-blank line is `{"text", "label", "split"}`. Data-line order defines
 * utterance ids, which is what binds EMB1 rows to utterances.
 */

import { readFileSync } from "node:fs";

export interface DatasetRecord {
  id: number;
  text: string;
  label: string;
  split: "train" | "validation" | "test";
}

export interface Dataset {
  vocab: string[] | null;
  records: DatasetRecord[];
}

const SPLITS = new Set(["train", "validation", "test"]);

export function readDataset(path: string): Dataset {
  const raw = readFileSync(path, "utf-8");
  const lines = raw.split("\n");
  const records: DatasetRecord[] = [];
  let vocab: string[] | null = null;
  let sawHeaderCandidate = false;

  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${i + 1}: malformed JSON: ${(err as Error).message}`);
    }
    if (typeof obj !== "object" || obj === null) {
      throw new Error(`${path}:${i + 1}: expected a JSON object`);
    }
    const rec = obj as Record<string, unknown>;
    if (!sawHeaderCandidate && records.length === 0 && "vocab" in rec && !("text" in rec)) {
      sawHeaderCandidate = true;
      if (!Array.isArray(rec.vocab) || !rec.vocab.every((v) => typeof v === "string")) {
        throw new Error(`${path}:${i + 1}: vocab header must list class-name strings`);
      }
      vocab = rec.vocab as string[];
      continue;
    }
    const { text, label, split } = rec;
    if (typeof text !== "string" || text.length === 0) {
      throw new Error(`${path}:${i + 1}: text must be a non-empty string`);
    }
    if (typeof label !== "string") {
      throw new Error(`${path}:${i + 1}: label must be a class-name string`);
    }
    if (typeof split !== "string" || !SPLITS.has(split)) {
      throw new Error(`${path}:${i + 1}: bad split ${JSON.stringify(split)}`);
    }
    records.push({
      id: records.length,
      text,
      label,
      split: split as DatasetRecord["split"],
    });
  }
  return { vocab, records };
}
