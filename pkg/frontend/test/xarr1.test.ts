/**
 * Local codec tests plus cross-checks against the core's own
 * serialization of the same payloads.
 */

import { describe, expect, it } from "vitest";

import {
  CoreClient,
  DecodedArray,
  FORMATS,
  FormatName,
  Xarr1Error,
  decode,
  encode,
  fromBase64,
  toBase64,
} from "../src/index";

const client = new CoreClient();

function make(format: FormatName, shape: number[], values: number[], bits: number[]): DecodedArray {
  return {
    format: FORMATS[format],
    shape,
    values: Float64Array.from(values),
    bits: Uint8Array.from(bits),
  };
}

describe("round trips", () => {
  const names = Object.keys(FORMATS) as FormatName[];

  it.each(names)("%s preserves representable values and bits", (name) => {
    const values = [1.0, -2.5, 0.0, 96.0, -0.375];
    const bits = values.map((_, i) => Math.min(i + 3, FORMATS[name].mantissaBits));
    const arr = make(name, [5], values, bits);
    const back = decode(encode(arr));
    expect(back.format.name).toBe(name);
    expect(back.shape).toEqual([5]);
    expect(Array.from(back.values)).toEqual(values);
    expect(Array.from(back.bits)).toEqual(bits);
  });

  it.each(names)("%s preserves NaN, infinities, and signed zero", (name) => {
    const values = [NaN, Infinity, -Infinity, 0.0, -0.0];
    const arr = make(name, [5], values, [0, 0, 0, 5, 5]);
    const back = decode(encode(arr));
    expect(Number.isNaN(back.values[0])).toBe(true);
    expect(back.values[1]).toBe(Infinity);
    expect(back.values[2]).toBe(-Infinity);
    expect(Object.is(back.values[3], 0.0)).toBe(true);
    expect(Object.is(back.values[4], -0.0)).toBe(true);
  });

  it("narrow formats round values on encode", () => {
    const arr = make("binary16", [1], [1 / 3], [10]);
    const back = decode(encode(arr));
    expect(back.values[0]).toBeCloseTo(1 / 3, 3);
    expect(back.values[0]).not.toBe(1 / 3);
    // a second pass is a fixed point once the value fits the format
    expect(decode(encode(back)).values[0]).toBe(back.values[0]);
  });

  it("handles rank 0 and higher ranks", () => {
    const scalarish = decode(encode(make("binary64", [], [7.25], [40])));
    expect(scalarish.shape).toEqual([]);
    expect(scalarish.values[0]).toBe(7.25);
    const cube = make("binary32", [2, 1, 3], [1, 2, 3, 4, 5, 6], [4, 5, 6, 7, 8, 9]);
    expect(decode(encode(cube)).shape).toEqual([2, 1, 3]);
  });
});

describe("validation", () => {
  it("rejects a bad magic", () => {
    const good = encode(make("binary64", [1], [1.0], [10]));
    good[0] = 0x58 + 1;
    expect(() => decode(good)).toThrow(Xarr1Error);
    expect(() => decode(good)).toThrow(/magic/);
  });

  it("rejects unknown format codes and oversized rank", () => {
    const good = encode(make("binary64", [1], [1.0], [10]));
    const badFormat = good.slice();
    badFormat[5] = 9;
    expect(() => decode(badFormat)).toThrow(/format code/);
    const badRank = good.slice();
    badRank[6] = 12;
    expect(() => decode(badRank)).toThrow(/rank/);
  });

  it("rejects truncated streams", () => {
    const good = encode(make("binary64", [3], [1, 2, 3], [10, 11, 12]));
    expect(() => decode(good.slice(0, 4))).toThrow(/truncated/);
    expect(() => decode(good.slice(0, good.length - 2))).toThrow(/truncated/);
  });

  it("rejects bit counts above the format mantissa", () => {
    const raw = encode(make("binary32", [1], [1.0], [24]));
    raw[raw.length - 1] = 30;
    expect(() => decode(raw)).toThrow(/out of range/);
  });

  it("rejects mismatched buffer lengths on encode", () => {
    const bad = make("binary64", [2], [1.0], [10]);
    expect(() => encode(bad)).toThrow(/lengths/);
  });
});

describe("cross-check against the core", () => {
  it.each(Object.keys(FORMATS) as FormatName[])(
    "%s payloads survive a pass through the core unchanged",
    (name) => {
      // zeros must carry full exact bits; the core pins them there
      const values = [1.5, -3.25, 0.0, 12.0];
      const bits = values.map((v, i) =>
        v === 0.0 ? FORMATS[name].mantissaBits : Math.min(2 * i + 1, FORMATS[name].mantissaBits),
      );
      const wire = toBase64(encode(make(name, [2, 2], values, bits)));
      // transposing twice is the identity, so the core re-serializes
      // exactly what this codec produced
      const once = client.call({ kind: "array", op: "transpose", arg: { xarr1: wire } });
      const twice = client.call({
        kind: "array",
        op: "transpose",
        arg: { xarr1: once.xarr1 as string },
      });
      expect(twice.xarr1).toBe(wire);
    },
  );
});
