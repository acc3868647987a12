/**
 * XARR1 container codec.
 *
 * Layout: 5-byte magic "XARR1", one format-code byte, one rank byte,
 * rank little-endian u64 extents, the packed values, then one byte of
 * exact-bit count per element.  Values are stored in the format's own
 * width; this codec always exposes them as float64.
 */

export type FormatName = "binary64" | "binary32" | "binary16" | "bfloat16";

export interface FormatInfo {
  name: FormatName;
  code: number;
  mantissaBits: number;
  byteWidth: number;
}

export const FORMATS: Record<FormatName, FormatInfo> = {
  binary64: { name: "binary64", code: 0, mantissaBits: 53, byteWidth: 8 },
  binary32: { name: "binary32", code: 1, mantissaBits: 24, byteWidth: 4 },
  binary16: { name: "binary16", code: 2, mantissaBits: 11, byteWidth: 2 },
  bfloat16: { name: "bfloat16", code: 3, mantissaBits: 8, byteWidth: 2 },
};

const FORMATS_BY_CODE = new Map(
  Object.values(FORMATS).map((f) => [f.code, f]),
);

const MAGIC = "XARR1";
const MAX_RANK = 8;

export interface DecodedArray {
  format: FormatInfo;
  shape: number[];
  values: Float64Array;
  bits: Uint8Array;
}

export class Xarr1Error extends Error {}

const scratch = new DataView(new ArrayBuffer(4));

function halfToDouble(h: number): number {
  const sign = h & 0x8000 ? -1 : 1;
  const exp = (h >> 10) & 0x1f;
  const frac = h & 0x3ff;
  if (exp === 0x1f) {
    return frac ? NaN : sign * Infinity;
  }
  if (exp === 0) {
    return sign * frac * 2 ** -24;
  }
  return sign * (1 + frac / 1024) * 2 ** (exp - 15);
}

function doubleToHalf(v: number): number {
  // round through float32 first, matching a store-narrow pipeline
  scratch.setFloat32(0, Math.fround(v));
  const u = scratch.getUint32(0);
  const sign = (u >>> 16) & 0x8000;
  if (Number.isNaN(v)) return sign | 0x7e00;
  const absU = u & 0x7fffffff;
  if (absU >= 0x47800000) {
    // overflows half range (includes infinity)
    return sign | 0x7c00;
  }
  if (absU < 0x38800000) {
    // subnormal half: shift the significand with round-to-nearest-even
    const f32exp = absU >>> 23;
    const mant = (absU & 0x7fffff) | 0x800000;
    const shift = 126 - f32exp + 11;
    if (shift > 24) return sign;
    const rounded = roundShiftEven(mant, shift);
    return sign | rounded;
  }
  const half = ((absU >>> 13) - 0x1c000) & 0x7fff;
  const roundBits = absU & 0x1fff;
  if (roundBits > 0x1000 || (roundBits === 0x1000 && (half & 1) !== 0)) {
    return sign | (half + 1);
  }
  return sign | half;
}

function roundShiftEven(mant: number, shift: number): number {
  const floor = Math.floor(mant / 2 ** shift);
  const rem = mant - floor * 2 ** shift;
  const halfway = 2 ** (shift - 1);
  if (rem > halfway || (rem === halfway && (floor & 1) !== 0)) {
    return floor + 1;
  }
  return floor;
}

function bfloatToDouble(u16: number): number {
  scratch.setUint32(0, u16 << 16);
  return scratch.getFloat32(0);
}

function doubleToBfloat(v: number): number {
  scratch.setFloat32(0, Math.fround(v));
  const u = scratch.getUint32(0);
  if (Number.isNaN(v)) return u >>> 16;
  const rounded = (u + 0x7fff + ((u >>> 16) & 1)) >>> 0;
  return (rounded & 0xffff0000) >>> 16;
}

export function encode(arr: DecodedArray): Uint8Array {
  const { format, shape, values, bits } = arr;
  if (shape.length > MAX_RANK) {
    throw new Xarr1Error(`rank ${shape.length} exceeds limit ${MAX_RANK}`);
  }
  const count = shape.reduce((a, b) => a * b, 1);
  if (values.length !== count || bits.length !== count) {
    throw new Xarr1Error("buffer lengths do not match the shape");
  }
  const total = 7 + 8 * shape.length + format.byteWidth * count + count;
  const out = new Uint8Array(total);
  const view = new DataView(out.buffer);
  for (let i = 0; i < 5; i++) out[i] = MAGIC.charCodeAt(i);
  out[5] = format.code;
  out[6] = shape.length;
  let off = 7;
  for (const ext of shape) {
    view.setBigUint64(off, BigInt(ext), true);
    off += 8;
  }
  for (let i = 0; i < count; i++) {
    const v = values[i];
    if (format.name === "binary64") view.setFloat64(off, v, true);
    else if (format.name === "binary32") view.setFloat32(off, Math.fround(v), true);
    else if (format.name === "binary16") view.setUint16(off, doubleToHalf(v), true);
    else view.setUint16(off, doubleToBfloat(v), true);
    off += format.byteWidth;
  }
  out.set(bits, off);
  return out;
}

export function decode(data: Uint8Array): DecodedArray {
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const need = (n: number, what: string) => {
    if (data.length < n) throw new Xarr1Error(`truncated stream while reading ${what}`);
  };
  need(7, "header");
  for (let i = 0; i < 5; i++) {
    if (data[i] !== MAGIC.charCodeAt(i)) {
      throw new Xarr1Error("bad magic; not an XARR1 stream");
    }
  }
  const format = FORMATS_BY_CODE.get(data[5]);
  if (!format) throw new Xarr1Error(`unknown format code ${data[5]}`);
  const rank = data[6];
  if (rank > MAX_RANK) throw new Xarr1Error(`rank ${rank} exceeds limit ${MAX_RANK}`);
  let off = 7;
  need(off + 8 * rank, "extents");
  const shape: number[] = [];
  for (let i = 0; i < rank; i++) {
    const ext = view.getBigUint64(off, true);
    if (ext > BigInt(Number.MAX_SAFE_INTEGER)) {
      throw new Xarr1Error(`extent ${ext} is too large`);
    }
    shape.push(Number(ext));
    off += 8;
  }
  const count = shape.reduce((a, b) => a * b, 1);
  need(off + count * format.byteWidth + count, "payload");
  const values = new Float64Array(count);
  for (let i = 0; i < count; i++) {
    if (format.name === "binary64") values[i] = view.getFloat64(off, true);
    else if (format.name === "binary32") values[i] = view.getFloat32(off, true);
    else if (format.name === "binary16") values[i] = halfToDouble(view.getUint16(off, true));
    else values[i] = bfloatToDouble(view.getUint16(off, true));
    off += format.byteWidth;
  }
  const bits = data.slice(off, off + count);
  for (const b of bits) {
    if (b > format.mantissaBits) {
      throw new Xarr1Error(`bits value ${b} out of range for ${format.name}`);
    }
  }
  return { format, shape, values, bits };
}

export function toBase64(data: Uint8Array): string {
  return Buffer.from(data).toString("base64");
}

export function fromBase64(text: string): Uint8Array {
  return new Uint8Array(Buffer.from(text, "base64"));
}
