import { expect, test } from "vitest";

import { readNpy, toMatrix, toNested, writeNpy } from "../src/npy.js";

test("npy round trip preserves shape and values", () => {
  const m = toMatrix([
    [0.1, -2.5, 3e-17],
    [4.0, 5.5, Number.MIN_VALUE],
  ]);
  const back = readNpy(writeNpy(m));
  expect(back.rows).toBe(2);
  expect(back.cols).toBe(3);
  expect(Array.from(back.data)).toEqual(Array.from(m.data));
});

test("npy header is 64-byte aligned v1.0", () => {
  const buf = writeNpy(toMatrix([[1]]));
  expect(buf.subarray(0, 6).toString("latin1")).toBe("\x93NUMPY");
  expect(buf[6]).toBe(1);
  const headerLen = buf.readUInt16LE(8);
  expect((10 + headerLen) % 64).toBe(0);
});

test("toMatrix validates input", () => {
  expect(() => toMatrix([])).toThrow(/zero pixels/);
  expect(() => toMatrix([[]])).toThrow(/zero pixels/);
  expect(() => toMatrix([[1, 2], [3]])).toThrow(/ragged/);
  expect(() => toMatrix([[1, Number.NaN]])).toThrow(/NaN or infinite/);
  expect(() => toMatrix([[1, Number.POSITIVE_INFINITY]])).toThrow(/NaN or infinite/);
});

test("readNpy rejects foreign payloads", () => {
  expect(() => readNpy(Buffer.from("not numpy data"))).toThrow(/not an npy/);
});

test("toNested restores row-major layout", () => {
  const rows = [
    [1, 2, 3],
    [4, 5, 6],
  ];
  expect(toNested(toMatrix(rows))).toEqual(rows);
});
