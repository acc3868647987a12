/**
 * Tracked n-dimensional arrays delegating every operation to the core.
 *
 * Buffers hold float64 values and one exact-bit count per element; the
 * wire form is a base64 XARR1 container.
 */

import { CoreClient, OpRequest, OpResponse } from "./client";
import { BoundScalar } from "./scalar";
import {
  DecodedArray,
  FORMATS,
  FormatName,
  decode,
  encode,
  fromBase64,
  toBase64,
} from "./xarr1";

export type Estimator = "v1" | "v2" | "holder";

export type Reduction = "sum" | "prod" | "min_reduce" | "max_reduce" | "mean";

const ELEMENTWISE = ["add", "sub", "mul", "div", "min", "max"] as const;
export type ElementwiseOp = (typeof ELEMENTWISE)[number];

export class BoundArray {
  private constructor(
    private readonly data: DecodedArray,
    private readonly client: CoreClient,
  ) {}

  static fromValues(
    values: ArrayLike<number>,
    shape: number[],
    bits: number | ArrayLike<number>,
    client: CoreClient,
    format: FormatName = "binary64",
  ): BoundArray {
    const info = FORMATS[format];
    const count = shape.reduce((a, b) => a * b, 1);
    if (values.length !== count) {
      throw new Error(`expected ${count} values for shape [${shape}], got ${values.length}`);
    }
    const bitsArr = new Uint8Array(count);
    if (typeof bits === "number") {
      bitsArr.fill(bits);
    } else {
      bitsArr.set(bits as never);
    }
    const raw: DecodedArray = {
      format: info,
      shape: [...shape],
      values: Float64Array.from(values as never),
      bits: bitsArr,
    };
    // round-trip through the codec so stored values and bit counts obey
    // the same normalization the core applies
    return BoundArray.fromWire(toBase64(encode(raw)), client).normalized();
  }

  static fromWire(xarr1: string, client: CoreClient): BoundArray {
    return new BoundArray(decode(fromBase64(xarr1)), client);
  }

  static fromResponse(res: OpResponse, client: CoreClient): BoundArray {
    return BoundArray.fromWire(res.xarr1 as string, client);
  }

  /** Let the core normalize special elements (zeros, NaN, Inf). */
  private normalized(): BoundArray {
    return this.map("transpose").map("transpose");
  }

  get shape(): number[] {
    return [...this.data.shape];
  }

  get format(): FormatName {
    return this.data.format.name;
  }

  get values(): Float64Array {
    return this.data.values;
  }

  get bits(): Uint8Array {
    return this.data.bits;
  }

  toWire(): string {
    return toBase64(encode(this.data));
  }

  private toJson(): { xarr1: string } {
    return { xarr1: this.toWire() };
  }

  private map(op: string, extra: Record<string, unknown> = {}): BoundArray {
    const req = { kind: "array", op, arg: this.toJson(), ...extra } as OpRequest;
    return BoundArray.fromResponse(this.client.call(req), this.client);
  }

  elementwise(op: ElementwiseOp, other: BoundArray): BoundArray {
    const req = {
      kind: "array",
      op,
      args: [this.toJson(), other.toJson()],
    } as OpRequest;
    return BoundArray.fromResponse(this.client.call(req), this.client);
  }

  add(other: BoundArray): BoundArray {
    return this.elementwise("add", other);
  }

  sub(other: BoundArray): BoundArray {
    return this.elementwise("sub", other);
  }

  mul(other: BoundArray): BoundArray {
    return this.elementwise("mul", other);
  }

  div(other: BoundArray): BoundArray {
    return this.elementwise("div", other);
  }

  matmul(other: BoundArray, estimator: Estimator = "v2"): BoundArray {
    const req = {
      kind: "array",
      op: "matmul",
      estimator,
      args: [this.toJson(), other.toJson()],
    } as OpRequest;
    return BoundArray.fromResponse(this.client.call(req), this.client);
  }

  applyUnary(fn: string, param?: number): BoundArray {
    const extra: Record<string, unknown> = { fn };
    if (param !== undefined) extra.param = param;
    return this.map("unary", extra);
  }

  reduce(op: Reduction, axis?: number): BoundArray {
    const extra: Record<string, unknown> = {};
    if (axis !== undefined) extra.axis = axis;
    return this.map(op, extra);
  }

  sum(axis?: number): BoundArray {
    return this.reduce("sum", axis);
  }

  mean(axis?: number): BoundArray {
    return this.reduce("mean", axis);
  }

  transpose(): BoundArray {
    return this.map("transpose");
  }

  item(...index: number[]): BoundScalar {
    const res = this.client.call({
      kind: "array",
      op: "item",
      arg: this.toJson(),
      index,
    } as OpRequest);
    return BoundScalar.fromResponse(res, this.client);
  }

  dot(other: BoundArray): BoundScalar {
    const res = this.client.call({
      kind: "array",
      op: "dot",
      args: [this.toJson(), other.toJson()],
    } as OpRequest);
    return BoundScalar.fromResponse(res, this.client);
  }
}
