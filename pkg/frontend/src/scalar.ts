/**
 * Tracked scalar values delegating every operation to the core.
 */

import { CoreClient, OpResponse, ScalarJson, numberToWire, wireToNumber } from "./client";

export type Comparison = "equal" | "unequal" | "indistinguishable";

export type RoundMode = "floor" | "ceil" | "trunc" | "nearest";

const BINARY_OPS = ["add", "sub", "mul", "div", "min", "max"] as const;
export type BinaryOp = (typeof BINARY_OPS)[number];

export class BoundScalar {
  constructor(
    readonly value: number,
    readonly bits: number,
    readonly exact: boolean,
    private readonly client: CoreClient,
  ) {}

  static fromResponse(res: OpResponse, client: CoreClient): BoundScalar {
    return new BoundScalar(
      wireToNumber(res.value as number | string),
      res.bits as number,
      res.exact as boolean,
      client,
    );
  }

  static fromDecimal(text: string, client: CoreClient): BoundScalar {
    return BoundScalar.fromResponse(
      client.call({ kind: "scalar", op: "from_decimal", text }),
      client,
    );
  }

  static exact(value: number, client: CoreClient): BoundScalar {
    return BoundScalar.fromResponse(
      client.call({ kind: "scalar", op: "from_exact", value: numberToWire(value) }),
      client,
    );
  }

  toJson(): ScalarJson {
    return { value: numberToWire(this.value), bits: this.bits, exact: this.exact };
  }

  private binary(op: BinaryOp, other: BoundScalar): BoundScalar {
    const res = this.client.call({
      kind: "scalar",
      op,
      args: [this.toJson(), other.toJson()],
    });
    return BoundScalar.fromResponse(res, this.client);
  }

  add(other: BoundScalar): BoundScalar {
    return this.binary("add", other);
  }

  sub(other: BoundScalar): BoundScalar {
    return this.binary("sub", other);
  }

  mul(other: BoundScalar): BoundScalar {
    return this.binary("mul", other);
  }

  div(other: BoundScalar): BoundScalar {
    return this.binary("div", other);
  }

  min(other: BoundScalar): BoundScalar {
    return this.binary("min", other);
  }

  max(other: BoundScalar): BoundScalar {
    return this.binary("max", other);
  }

  neg(): BoundScalar {
    const res = this.client.call({ kind: "scalar", op: "neg", arg: this.toJson() });
    return BoundScalar.fromResponse(res, this.client);
  }

  applyUnary(fn: string, param?: number): BoundScalar {
    const req: Record<string, unknown> = { kind: "scalar", op: "unary", fn, arg: this.toJson() };
    if (param !== undefined) req.param = param;
    return BoundScalar.fromResponse(this.client.call(req as never), this.client);
  }

  round(mode: RoundMode): BoundScalar {
    const res = this.client.call({ kind: "scalar", op: "round", mode, arg: this.toJson() });
    return BoundScalar.fromResponse(res, this.client);
  }

  approxEq(other: BoundScalar): Comparison {
    const res = this.client.call({
      kind: "scalar",
      op: "approx_eq",
      args: [this.toJson(), other.toJson()],
    });
    return res.comparison as Comparison;
  }

  /** The core's '?'-masked scientific rendering at 16 digits. */
  toString(): string {
    const res = this.client.call({ kind: "scalar", op: "str", arg: this.toJson() });
    return res.text as string;
  }
}
