/**
 * EMB1 embedding table format, little-endian throughout:
 * magic "EMB1" | u32 version = 1 | u32 count | u32 dim | count*dim float32
 * row-major, row i = utterance id i of the source dataset.
 */

export const EMB1_MAGIC = "EMB1";
export const EMB1_VERSION = 1;

export function encodeEmb1(rows: Float32Array[], dim: number): Buffer {
  const count = rows.length;
  const buf = Buffer.alloc(16 + 4 * count * dim);
  buf.write(EMB1_MAGIC, 0, "ascii");
  buf.writeUInt32LE(EMB1_VERSION, 4);
  buf.writeUInt32LE(count, 8);
  buf.writeUInt32LE(dim, 12);
  const view = new DataView(buf.buffer, buf.byteOffset + 16);
  for (let r = 0; r < count; r++) {
    const row = rows[r];
    if (row.length !== dim) {
      throw new Error(`row ${r} has ${row.length} values, expected ${dim}`);
    }
    for (let c = 0; c < dim; c++) {
      const v = row[c];
      if (!Number.isFinite(v)) {
        throw new Error(`non-finite value at row ${r} column ${c}`);
      }
      view.setFloat32(4 * (r * dim + c), v, true);
    }
  }
  return buf;
}

export interface Emb1Table {
  count: number;
  dim: number;
  rows: Float32Array[];
}

export function decodeEmb1(buf: Buffer): Emb1Table {
  if (buf.length < 16) {
    throw new Error(`truncated header: ${buf.length} < 16 bytes`);
  }
  if (buf.toString("ascii", 0, 4) !== EMB1_MAGIC) {
    throw new Error("bad magic at byte offset 0");
  }
  const version = buf.readUInt32LE(4);
  if (version !== EMB1_VERSION) {
    throw new Error(`unsupported version ${version} at byte offset 4`);
  }
  const count = buf.readUInt32LE(8);
  const dim = buf.readUInt32LE(12);
  const expected = 16 + 4 * count * dim;
  if (buf.length !== expected) {
    throw new Error(`payload ends at byte offset ${buf.length}, expected ${expected}`);
  }
  const view = new DataView(buf.buffer, buf.byteOffset + 16);
  const rows: Float32Array[] = [];
  for (let r = 0; r < count; r++) {
    const row = new Float32Array(dim);
    for (let c = 0; c < dim; c++) {
      const v = view.getFloat32(4 * (r * dim + c), true);
      if (!Number.isFinite(v)) {
        throw new Error(`non-finite value at byte offset ${16 + 4 * (r * dim + c)}`);
      }
      row[c] = v;
    }
    rows.push(row);
  }
  return { count, dim, rows };
}
