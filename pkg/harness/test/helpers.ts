import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { Batch, BatchTensors, buildTensors } from "../src/batches.js";
import { Tensor } from "../src/tensor.js";

export const FIXTURES = path.join(
  path.dirname(fileURLToPath(import.meta.url)), "..", "fixtures",
);

/** Hand-built batch: a 3-node path rooted at node 0, plus one dummy. */
export function pathBatch(numClasses = 3, rootLabel = 1): BatchTensors {
  const batch: Batch = {
    guard: 4,
    labels: Int32Array.from([rootLabel, -1, -1, -1]),
    roots: [0],
    edges: [
      [0, 1, 0],
      [1, 2, 0],
    ],
    dummyCount: 1,
  };
  const bt = buildTensors(batch);
  return bt;
}

/**
 * Central-difference gradient of `lossOf` with respect to `param`,
 * evaluated entry by entry.
 */
export function numericGradient(
  param: Tensor,
  lossOf: () => number,
  h = 1e-5,
): Float64Array {
  const grad = new Float64Array(param.data.length);
  for (let i = 0; i < param.data.length; i++) {
    const keep = param.data[i];
    param.data[i] = keep + h;
    const up = lossOf();
    param.data[i] = keep - h;
    const down = lossOf();
    param.data[i] = keep;
    grad[i] = (up - down) / (2 * h);
  }
  return grad;
}

export function maxRelativeError(a: Float64Array, b: Float64Array): number {
  let worst = 0;
  for (let i = 0; i < a.length; i++) {
    const denom = Math.max(Math.abs(a[i]), Math.abs(b[i]), 1e-6);
    worst = Math.max(worst, Math.abs(a[i] - b[i]) / denom);
  }
  return worst;
}
