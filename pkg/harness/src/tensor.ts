/**
 * Minimal reverse-mode autodiff over dense float64 matrices.
 *
 * Everything here is double precision and fully deterministic, which the
 * verification suite leans on: analytic gradients are checked against
 * central differences at tight tolerances, and two runs with one seed must
 * produce bit-equal loss trajectories.
 */

import { Rng } from "./rng.js";

export class Tensor {
  data: Float64Array;
  grad: Float64Array;
  readonly rows: number;
  readonly cols: number;

  constructor(rows: number, cols: number, data?: Float64Array) {
    this.rows = rows;
    this.cols = cols;
    this.data = data ?? new Float64Array(rows * cols);
    this.grad = new Float64Array(rows * cols);
  }

  static from(rows: number, cols: number, values: number[]): Tensor {
    if (values.length !== rows * cols) throw new Error("shape mismatch");
    return new Tensor(rows, cols, Float64Array.from(values));
  }

  get(i: number, j: number): number {
    return this.data[i * this.cols + j];
  }

  set(i: number, j: number, v: number): void {
    this.data[i * this.cols + j] = v;
  }

  zeroGrad(): void {
    this.grad.fill(0);
  }

  clone(): Tensor {
    return new Tensor(this.rows, this.cols, this.data.slice());
  }
}

/** Records backward closures; replayed in reverse on backward(). */
export class Tape {
  private steps: Array<() => void> = [];

  record(step: () => void): void {
    this.steps.push(step);
  }

  /** Seed d(loss)/d(loss) = 1 and propagate. `loss` must be 1x1. */
  backward(loss: Tensor): void {
    if (loss.rows !== 1 || loss.cols !== 1) throw new Error("loss must be scalar");
    loss.grad[0] = 1;
    for (let i = this.steps.length - 1; i >= 0; i--) this.steps[i]();
  }
}

// -- dense kernels ----------------------------------------------------------

function mmInto(
  out: Float64Array, a: Float64Array, b: Float64Array,
  n: number, k: number, m: number, accumulate: boolean,
): void {
  if (!accumulate) out.fill(0, 0, n * m);
  for (let i = 0; i < n; i++) {
    for (let p = 0; p < k; p++) {
      const av = a[i * k + p];
      if (av === 0) continue;
      const bo = p * m;
      const oo = i * m;
      for (let j = 0; j < m; j++) out[oo + j] += av * b[bo + j];
    }
  }
}

function mmTransAInto(
  out: Float64Array, a: Float64Array, b: Float64Array,
  n: number, k: number, m: number,
): void {
  // out(k x m) += a(n x k)^T . b(n x m)
  for (let i = 0; i < n; i++) {
    const ao = i * k;
    const bo = i * m;
    for (let p = 0; p < k; p++) {
      const av = a[ao + p];
      if (av === 0) continue;
      const oo = p * m;
      for (let j = 0; j < m; j++) out[oo + j] += av * b[bo + j];
    }
  }
}

function mmTransBInto(
  out: Float64Array, a: Float64Array, b: Float64Array,
  n: number, k: number, m: number,
): void {
  // out(n x k) += a(n x m) . b(k x m)^T
  for (let i = 0; i < n; i++) {
    const ao = i * m;
    const oo = i * k;
    for (let p = 0; p < k; p++) {
      const bo = p * m;
      let acc = 0;
      for (let j = 0; j < m; j++) acc += a[ao + j] * b[bo + j];
      out[oo + p] += acc;
    }
  }
}

// -- differentiable ops --------------------------------------------------------

export function matmul(tape: Tape, a: Tensor, b: Tensor): Tensor {
  if (a.cols !== b.rows) throw new Error(`matmul shape ${a.cols} vs ${b.rows}`);
  const out = new Tensor(a.rows, b.cols);
  mmInto(out.data, a.data, b.data, a.rows, a.cols, b.cols, false);
  tape.record(() => {
    mmTransBInto(a.grad, out.grad, b.data, a.rows, a.cols, b.cols);
    mmTransAInto(b.grad, a.data, out.grad, a.rows, a.cols, b.cols);
  });
  return out;
}

/** M . X where M is a constant (no gradient flows into M). */
export function constMatmul(tape: Tape, m: Tensor, x: Tensor): Tensor {
  if (m.cols !== x.rows) throw new Error(`constMatmul shape ${m.cols} vs ${x.rows}`);
  const out = new Tensor(m.rows, x.cols);
  mmInto(out.data, m.data, x.data, m.rows, m.cols, x.cols, false);
  tape.record(() => {
    mmTransAInto(x.grad, m.data, out.grad, m.rows, m.cols, x.cols);
  });
  return out;
}

export function addBias(tape: Tape, x: Tensor, b: Tensor): Tensor {
  if (b.rows !== 1 || b.cols !== x.cols) throw new Error("bias shape");
  const out = new Tensor(x.rows, x.cols);
  for (let i = 0; i < x.rows; i++)
    for (let j = 0; j < x.cols; j++)
      out.data[i * x.cols + j] = x.data[i * x.cols + j] + b.data[j];
  tape.record(() => {
    for (let i = 0; i < x.rows; i++)
      for (let j = 0; j < x.cols; j++) {
        const g = out.grad[i * x.cols + j];
        x.grad[i * x.cols + j] += g;
        b.grad[j] += g;
      }
  });
  return out;
}

export function add(tape: Tape, a: Tensor, b: Tensor): Tensor {
  if (a.rows !== b.rows || a.cols !== b.cols) throw new Error("add shape");
  const out = new Tensor(a.rows, a.cols);
  for (let i = 0; i < out.data.length; i++) out.data[i] = a.data[i] + b.data[i];
  tape.record(() => {
    for (let i = 0; i < out.data.length; i++) {
      a.grad[i] += out.grad[i];
      b.grad[i] += out.grad[i];
    }
  });
  return out;
}

export function scale(tape: Tape, x: Tensor, s: number): Tensor {
  const out = new Tensor(x.rows, x.cols);
  for (let i = 0; i < out.data.length; i++) out.data[i] = x.data[i] * s;
  tape.record(() => {
    for (let i = 0; i < out.data.length; i++) x.grad[i] += out.grad[i] * s;
  });
  return out;
}

export function relu(tape: Tape, x: Tensor): Tensor {
  const out = new Tensor(x.rows, x.cols);
  for (let i = 0; i < out.data.length; i++) out.data[i] = x.data[i] > 0 ? x.data[i] : 0;
  tape.record(() => {
    for (let i = 0; i < out.data.length; i++)
      if (x.data[i] > 0) x.grad[i] += out.grad[i];
  });
  return out;
}

// tanh-form GELU; forward and backward differentiate the same formula, so
// gradient checks close to machine precision.
const GELU_C = Math.sqrt(2 / Math.PI);
const GELU_K = 0.044715;

export function gelu(tape: Tape, x: Tensor): Tensor {
  const out = new Tensor(x.rows, x.cols);
  for (let i = 0; i < out.data.length; i++) {
    const v = x.data[i];
    out.data[i] = 0.5 * v * (1 + Math.tanh(GELU_C * (v + GELU_K * v ** 3)));
  }
  tape.record(() => {
    for (let i = 0; i < out.data.length; i++) {
      const v = x.data[i];
      const t = Math.tanh(GELU_C * (v + GELU_K * v ** 3));
      const sech2 = 1 - t * t;
      const inner = GELU_C * (1 + 3 * GELU_K * v * v);
      x.grad[i] += out.grad[i] * (0.5 * (1 + t) + 0.5 * v * sech2 * inner);
    }
  });
  return out;
}

/** Inverted dropout; rate 0 is a true no-op (no rng consumption). */
export function dropout(tape: Tape, x: Tensor, rate: number, rng: Rng): Tensor {
  if (rate <= 0) return x;
  const keep = 1 - rate;
  const mask = new Float64Array(x.data.length);
  for (let i = 0; i < mask.length; i++) mask[i] = rng.next() < keep ? 1 / keep : 0;
  const out = new Tensor(x.rows, x.cols);
  for (let i = 0; i < out.data.length; i++) out.data[i] = x.data[i] * mask[i];
  tape.record(() => {
    for (let i = 0; i < out.data.length; i++) x.grad[i] += out.grad[i] * mask[i];
  });
  return out;
}

export function concatCols(tape: Tape, a: Tensor, b: Tensor): Tensor {
  if (a.rows !== b.rows) throw new Error("concat rows");
  const out = new Tensor(a.rows, a.cols + b.cols);
  for (let i = 0; i < a.rows; i++) {
    out.data.set(a.data.subarray(i * a.cols, (i + 1) * a.cols), i * out.cols);
    out.data.set(b.data.subarray(i * b.cols, (i + 1) * b.cols), i * out.cols + a.cols);
  }
  tape.record(() => {
    for (let i = 0; i < a.rows; i++) {
      for (let j = 0; j < a.cols; j++) a.grad[i * a.cols + j] += out.grad[i * out.cols + j];
      for (let j = 0; j < b.cols; j++)
        b.grad[i * b.cols + j] += out.grad[i * out.cols + a.cols + j];
    }
  });
  return out;
}

/**
 * Mean negative log likelihood of the true class over the given rows only
 * (root vertices); every other row contributes nothing, so its gradient is
 * exactly zero.
 */
export function nllMasked(
  tape: Tape, logits: Tensor, labels: Int32Array, rows: number[],
): Tensor {
  if (rows.length === 0) throw new Error("no supervised rows in batch");
  const c = logits.cols;
  const out = new Tensor(1, 1);
  let total = 0;
  for (const r of rows) {
    const off = r * c;
    let max = -Infinity;
    for (let j = 0; j < c; j++) max = Math.max(max, logits.data[off + j]);
    let sum = 0;
    for (let j = 0; j < c; j++) sum += Math.exp(logits.data[off + j] - max);
    const logZ = max + Math.log(sum);
    total += logZ - logits.data[off + labels[r]];
  }
  out.data[0] = total / rows.length;
  tape.record(() => {
    const g = out.grad[0] / rows.length;
    for (const r of rows) {
      const off = r * c;
      let max = -Infinity;
      for (let j = 0; j < c; j++) max = Math.max(max, logits.data[off + j]);
      let sum = 0;
      for (let j = 0; j < c; j++) sum += Math.exp(logits.data[off + j] - max);
      for (let j = 0; j < c; j++) {
        const softmax = Math.exp(logits.data[off + j] - max) / sum;
        logits.grad[off + j] += g * (softmax - (j === labels[r] ? 1 : 0));
      }
    }
  });
  return out;
}

/** Fraction of supervised rows whose argmax equals the label. */
export function accuracyMasked(logits: Tensor, labels: Int32Array, rows: number[]): number {
  if (rows.length === 0) return 0;
  let correct = 0;
  for (const r of rows) {
    const off = r * logits.cols;
    let best = 0;
    for (let j = 1; j < logits.cols; j++)
      if (logits.data[off + j] > logits.data[off + best]) best = j;
    if (best === labels[r]) correct++;
  }
  return correct / rows.length;
}

/**
 * Neighborhood-contrastive loss over row embeddings.
 *
 * sim is cosine similarity; for each row with at least one positive weight
 * gamma[i][j] > 0 (j inside the r-hop neighborhood), the loss is
 * -log( sum_j gamma_ij exp(sim_ij / tau) / sum_{k != i} exp(sim_ik / tau) ),
 * averaged over such rows. Rows without positives (dummy nodes) are
 * excluded rather than clamped.
 */
export function ncontrast(tape: Tape, z: Tensor, gamma: Tensor, tau: number): Tensor {
  const n = z.rows;
  const d = z.cols;
  if (gamma.rows !== n || gamma.cols !== n) throw new Error("gamma shape");

  const norms = new Float64Array(n);
  const unit = new Float64Array(n * d);
  for (let i = 0; i < n; i++) {
    let sq = 0;
    for (let j = 0; j < d; j++) sq += z.data[i * d + j] ** 2;
    const r = Math.max(Math.sqrt(sq), 1e-12);
    norms[i] = r;
    for (let j = 0; j < d; j++) unit[i * d + j] = z.data[i * d + j] / r;
  }
  const sim = new Float64Array(n * n);
  mmTransBInto(sim, unit, unit, n, n, d);

  const expSim = new Float64Array(n * n);
  const den = new Float64Array(n);
  const num = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      if (i === j) continue;
      const e = Math.exp(sim[i * n + j] / tau);
      expSim[i * n + j] = e;
      den[i] += e;
      num[i] += gamma.data[i * n + j] * e;
    }
  }
  const active: number[] = [];
  for (let i = 0; i < n; i++) if (num[i] > 0) active.push(i);

  const out = new Tensor(1, 1);
  if (active.length === 0) return out; // no positive pairs anywhere
  let total = 0;
  for (const i of active) total += Math.log(den[i]) - Math.log(num[i]);
  out.data[0] = total / active.length;

  tape.record(() => {
    const seed = out.grad[0] / active.length;
    // dL/dsim, only rows in `active` contribute
    const gSim = new Float64Array(n * n);
    for (const i of active) {
      for (let j = 0; j < n; j++) {
        if (i === j) continue;
        const e = expSim[i * n + j];
        gSim[i * n + j] =
          seed * (e / den[i] - (gamma.data[i * n + j] * e) / num[i]) / tau;
      }
    }
    // sim = unit . unit^T  =>  dUnit = (gSim + gSim^T) . unit
    const gUnit = new Float64Array(n * d);
    mmInto(gUnit, gSim, unit, n, n, d, true);
    const gSimT = new Float64Array(n * n);
    for (let i = 0; i < n; i++)
      for (let j = 0; j < n; j++) gSimT[j * n + i] = gSim[i * n + j];
    mmInto(gUnit, gSimT, unit, n, n, d, true);
    // unit_i = z_i / ||z_i||  =>  dz_i = (dUnit_i - (dUnit_i . unit_i) unit_i) / r_i
    for (let i = 0; i < n; i++) {
      let dot = 0;
      for (let j = 0; j < d; j++) dot += gUnit[i * d + j] * unit[i * d + j];
      for (let j = 0; j < d; j++)
        z.grad[i * d + j] += (gUnit[i * d + j] - dot * unit[i * d + j]) / norms[i];
    }
  });
  return out;
}
