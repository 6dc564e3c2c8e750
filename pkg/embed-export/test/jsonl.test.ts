import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { readDataset } from "../src/jsonl.js";

function write(content: string): string {
  const dir = mkdtempSync(join(tmpdir(), "emb-"));
  const path = join(dir, "data.jsonl");
  writeFileSync(path, content, "utf-8");
  return path;
}

describe("canonical jsonl reader", () => {
  it("reads a headered file and assigns ids by data-line order", () => {
    const path = write(
      '{"vocab": ["alarm", "time"]}\n' +
        '{"text": "wake me up", "label": "alarm", "split": "train"}\n' +
        '{"text": "what time is it", "label": "time", "split": "test"}\n',
    );
    const ds = readDataset(path);
    expect(ds.vocab).toEqual(["alarm", "time"]);
    expect(ds.records.map((r) => r.id)).toEqual([0, 1]);
    expect(ds.records[1].split).toBe("test");
  });

  it("reads a headerless file", () => {
    const path = write('{"text": "hello there", "label": "greet", "split": "train"}\n');
    const ds = readDataset(path);
    expect(ds.vocab).toBeNull();
    expect(ds.records).toHaveLength(1);
  });

  it("reports the line number of malformed lines", () => {
    const path = write('{"text": "ok", "label": "a", "split": "train"}\nnot json\n');
    expect(() => readDataset(path)).toThrow(/:2:/);
  });

  it("rejects bad splits and empty text", () => {
    expect(() =>
      readDataset(write('{"text": "x", "label": "a", "split": "dev"}\n')),
    ).toThrow(/bad split/);
    expect(() =>
      readDataset(write('{"text": "", "label": "a", "split": "train"}\n')),
    ).toThrow(/non-empty/);
  });
});
