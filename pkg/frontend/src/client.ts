/**
 * Transport to the numeric core.
 *
 * Every operation becomes a JSON request executed by the core's `op`
 * subcommand, so all propagation rules live in exactly one place.
 * Requests can be batched; one process invocation serves the batch.
 */

import { spawnSync } from "node:child_process";

export interface OpRequest {
  kind: "scalar" | "array";
  op: string;
  [key: string]: unknown;
}

export type OpResponse = { [key: string]: unknown };

export class CoreError extends Error {}

/** Scalar wire form; nonfinite values travel as strings. */
export interface ScalarJson {
  value: number | string;
  bits: number;
  exact: boolean;
}

export function wireToNumber(v: number | string): number {
  if (typeof v === "number") return v;
  if (v === "inf") return Infinity;
  if (v === "-inf") return -Infinity;
  if (v === "nan") return NaN;
  throw new CoreError(`unexpected scalar wire value ${JSON.stringify(v)}`);
}

export function numberToWire(v: number): number | string {
  if (Number.isFinite(v)) return v;
  if (Number.isNaN(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

export class CoreClient {
  constructor(private readonly command: string = "preciseum") {}

  batch(requests: OpRequest[]): OpResponse[] {
    const res = spawnSync(this.command, ["op"], {
      input: JSON.stringify(requests),
      encoding: "utf8",
      maxBuffer: 1 << 26,
    });
    if (res.error) {
      throw new CoreError(`failed to run ${this.command}: ${res.error.message}`);
    }
    if (res.status !== 0) {
      const detail = (res.stdout || res.stderr || "").trim();
      throw new CoreError(`core exited with status ${res.status}: ${detail}`);
    }
    return JSON.parse(res.stdout) as OpResponse[];
  }

  call(request: OpRequest): OpResponse {
    return this.batch([request])[0];
  }
}
