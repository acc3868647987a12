export { CoreClient, CoreError, numberToWire, wireToNumber } from "./client";
export type { OpRequest, OpResponse, ScalarJson } from "./client";
export { BoundScalar } from "./scalar";
export type { BinaryOp, Comparison, RoundMode } from "./scalar";
export { BoundArray } from "./array";
export type { ElementwiseOp, Estimator, Reduction } from "./array";
export { FORMATS, Xarr1Error, decode, encode, fromBase64, toBase64 } from "./xarr1";
export type { DecodedArray, FormatInfo, FormatName } from "./xarr1";
