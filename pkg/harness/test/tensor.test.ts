import { describe, expect, it } from "vitest";

import { Rng } from "../src/rng.js";
import {
  Tape,
  Tensor,
  addBias,
  concatCols,
  constMatmul,
  dropout,
  gelu,
  matmul,
  ncontrast,
  nllMasked,
  relu,
} from "../src/tensor.js";
import { maxRelativeError, numericGradient } from "./helpers.js";

function randomTensor(rng: Rng, rows: number, cols: number): Tensor {
  const t = new Tensor(rows, cols);
  for (let i = 0; i < t.data.length; i++) t.data[i] = rng.uniform(-1, 1);
  return t;
}

describe("autodiff gradients against central differences", () => {
  it("matmul + bias + relu + nll chain", () => {
    const rng = new Rng(7);
    const x = randomTensor(rng, 4, 3);
    const w = randomTensor(rng, 3, 5);
    const b = randomTensor(rng, 1, 5);
    const labels = Int32Array.from([2, 0, -1, 4]);
    const rows = [0, 1, 3];

    const lossOf = () => {
      const tape = new Tape();
      const out = nllMasked(tape, relu(tape, addBias(tape, matmul(tape, x, w), b)), labels, rows);
      return { tape, out };
    };
    for (const p of [x, w, b]) p.zeroGrad();
    const { tape, out } = lossOf();
    tape.backward(out);

    for (const p of [x, w, b]) {
      const numeric = numericGradient(p, () => lossOf().out.data[0]);
      expect(maxRelativeError(p.grad, numeric)).toBeLessThan(1e-6);
    }
  });

  it("gelu", () => {
    const rng = new Rng(9);
    const x = randomTensor(rng, 3, 4);
    const labels = Int32Array.from([1, 2, 0]);
    const rows = [0, 1, 2];
    const lossOf = () => {
      const tape = new Tape();
      const out = nllMasked(tape, gelu(tape, x), labels, rows);
      return { tape, out };
    };
    x.zeroGrad();
    const { tape, out } = lossOf();
    tape.backward(out);
    const numeric = numericGradient(x, () => lossOf().out.data[0]);
    expect(maxRelativeError(x.grad, numeric)).toBeLessThan(1e-5);
  });

  it("constMatmul and concatCols", () => {
    const rng = new Rng(11);
    const m = randomTensor(rng, 4, 4);
    const a = randomTensor(rng, 4, 3);
    const b = randomTensor(rng, 4, 2);
    const labels = Int32Array.from([0, 4, 1, 3]);
    const rows = [0, 1, 2, 3];
    const lossOf = () => {
      const tape = new Tape();
      const mixed = constMatmul(tape, m, concatCols(tape, a, b));
      const out = nllMasked(tape, mixed, labels, rows);
      return { tape, out };
    };
    for (const p of [a, b]) p.zeroGrad();
    const { tape, out } = lossOf();
    tape.backward(out);
    for (const p of [a, b]) {
      const numeric = numericGradient(p, () => lossOf().out.data[0]);
      expect(maxRelativeError(p.grad, numeric)).toBeLessThan(1e-6);
    }
    expect(m.grad.every((g) => g === 0)).toBe(true); // constants get no gradient
  });

  it("ncontrast", () => {
    const rng = new Rng(13);
    const z = randomTensor(rng, 5, 3);
    const gamma = new Tensor(5, 5);
    // ring of positives, diagonal empty; one node (4) has no positives
    for (const [i, j] of [[0, 1], [1, 0], [1, 2], [2, 1], [3, 0]]) {
      gamma.data[i * 5 + j] = 0.5;
    }
    const lossOf = () => {
      const tape = new Tape();
      const out = ncontrast(tape, z, gamma, 0.7);
      return { tape, out };
    };
    z.zeroGrad();
    const { tape, out } = lossOf();
    tape.backward(out);
    const numeric = numericGradient(z, () => lossOf().out.data[0], 1e-6);
    expect(maxRelativeError(z.grad, numeric)).toBeLessThan(1e-4);
  });
});

describe("masking and determinism", () => {
  it("nll leaves non-supervised rows with exactly zero gradient", () => {
    const rng = new Rng(3);
    const logits = randomTensor(rng, 6, 4);
    const labels = Int32Array.from([2, -1, -1, 1, -1, -1]);
    const tape = new Tape();
    // feed logits through relu so `logits` itself is a leaf with grad
    const out = nllMasked(tape, logits, labels, [0, 3]);
    tape.backward(out);
    for (const row of [1, 2, 4, 5]) {
      for (let j = 0; j < 4; j++) expect(logits.grad[row * 4 + j]).toBe(0);
    }
  });

  it("nll matches a direct log-softmax computation", () => {
    const logits = Tensor.from(2, 3, [1, 2, 3, 0.5, 0.5, 0.5]);
    const labels = Int32Array.from([2, 0]);
    const tape = new Tape();
    const out = nllMasked(tape, logits, labels, [0, 1]);
    const z0 = Math.log(Math.exp(1) + Math.exp(2) + Math.exp(3));
    const z1 = Math.log(3 * Math.exp(0.5));
    const expected = ((z0 - 3) + (z1 - 0.5)) / 2;
    expect(Math.abs(out.data[0] - expected)).toBeLessThan(1e-12);
  });

  it("dropout at rate zero is a no-op and consumes no randomness", () => {
    const rng = new Rng(1);
    const before = rng.next();
    const rng2 = new Rng(1);
    const x = new Tensor(2, 2, Float64Array.from([1, 2, 3, 4]));
    const tape = new Tape();
    const out = dropout(tape, x, 0, rng2);
    expect(out).toBe(x);
    expect(rng2.next()).toBe(before); // same stream position as fresh rng
  });

  it("dropout scales kept entries by 1/(1-rate)", () => {
    const rng = new Rng(5);
    const x = new Tensor(1, 1000);
    x.data.fill(1);
    const tape = new Tape();
    const out = dropout(tape, x, 0.5, rng);
    const kept = out.data.filter((v) => v !== 0);
    expect(kept.every((v) => v === 2)).toBe(true);
    expect(Math.abs(kept.length / 1000 - 0.5)).toBeLessThan(0.08);
  });
});
