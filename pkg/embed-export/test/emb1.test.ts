import { describe, expect, it } from "vitest";

import { decodeEmb1, encodeEmb1 } from "../src/emb1.js";

describe("emb1 encoding", () => {
  it("round trips a small table bit-exactly", () => {
    const rows = [new Float32Array([1.5, -2.25, 0]), new Float32Array([3, -0, 7.5])];
    const buf = encodeEmb1(rows, 3);
    const back = decodeEmb1(buf);
    expect(back.count).toBe(2);
    expect(back.dim).toBe(3);
    expect(Buffer.from(back.rows[0].buffer)).toEqual(Buffer.from(rows[0].buffer));
    expect(Buffer.from(back.rows[1].buffer)).toEqual(Buffer.from(rows[1].buffer));
  });

  it("writes the documented header layout", () => {
    const buf = encodeEmb1([new Float32Array([1, -2])], 2);
    expect(buf.toString("ascii", 0, 4)).toBe("EMB1");
    expect(buf.readUInt32LE(4)).toBe(1);
    expect(buf.readUInt32LE(8)).toBe(1);
    expect(buf.readUInt32LE(12)).toBe(2);
    expect(buf.readFloatLE(16)).toBe(1);
    expect(buf.readFloatLE(20)).toBe(-2);
    expect(buf.length).toBe(24);
  });

  it("accepts an empty table", () => {
    const buf = encodeEmb1([], 16);
    const back = decodeEmb1(buf);
    expect(back.count).toBe(0);
    expect(back.dim).toBe(16);
  });

  it("rejects non-finite values on encode", () => {
    expect(() => encodeEmb1([new Float32Array([1, Number.NaN])], 2)).toThrow(/non-finite/);
  });

  it("rejects bad magic, version, and truncation with offsets", () => {
    const good = encodeEmb1([new Float32Array([1, 2])], 2);
    const badMagic = Buffer.from(good);
    badMagic.write("NOPE", 0, "ascii");
    expect(() => decodeEmb1(badMagic)).toThrow(/byte offset 0/);

    const badVersion = Buffer.from(good);
    badVersion.writeUInt32LE(9, 4);
    expect(() => decodeEmb1(badVersion)).toThrow(/byte offset 4/);

    expect(() => decodeEmb1(good.subarray(0, good.length - 4))).toThrow(/expected 24/);
  });
});
