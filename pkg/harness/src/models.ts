/**
 * Neural families for root-vertex classification on fixed-size batches.
 *
 * All message passing runs on the symmetric normalized adjacency with self
 * loops; edges are undirected here even though the files preserve
 * direction, and edge types are ignored (none of these families is
 * relational). Supervision reads root rows only.
 */

import { BatchTensors, contrastWeights } from "./batches.js";
import { Rng } from "./rng.js";
import {
  Tape,
  Tensor,
  add,
  addBias,
  concatCols,
  constMatmul,
  dropout,
  gelu,
  matmul,
  ncontrast,
  nllMasked,
  relu,
  scale,
} from "./tensor.js";

export type ModelFamily = "mlp" | "gcn" | "sage" | "saint" | "graphmlp";
export type Activation = "relu" | "gelu" | "identity";

export interface ModelSpec {
  family: ModelFamily;
  inputDim: number;
  numClasses: number;
  hidden: number;
  dropout: number;
  lr: number;
  seed: number;
  /** MLP only: activation of each hidden layer */
  activations?: [Activation, Activation];
  /** Graph-MLP extras */
  alpha?: number;
  tau?: number;
  rhop?: number;
}

export function defaultSpec(
  family: ModelFamily, inputDim: number, numClasses: number, seed = 1,
): ModelSpec {
  const base: ModelSpec = {
    family, inputDim, numClasses, hidden: 64, dropout: 0.0, lr: 0.1, seed,
  };
  if (family === "graphmlp") {
    return { ...base, hidden: 256, lr: 0.01, dropout: 0.6, alpha: 1.0, tau: 1.0, rhop: 2 };
  }
  return base;
}

function glorot(rng: Rng, rows: number, cols: number): Tensor {
  const limit = Math.sqrt(6 / (rows + cols));
  const t = new Tensor(rows, cols);
  for (let i = 0; i < t.data.length; i++) t.data[i] = rng.uniform(-limit, limit);
  return t;
}

function activate(tape: Tape, x: Tensor, kind: Activation): Tensor {
  if (kind === "relu") return relu(tape, x);
  if (kind === "gelu") return gelu(tape, x);
  return x;
}

/** Plain constant product, for pre-mixing two constant matrices. */
function plainMatmul(a: Tensor, b: Tensor): Tensor {
  const out = new Tensor(a.rows, b.cols);
  for (let i = 0; i < a.rows; i++)
    for (let k = 0; k < a.cols; k++) {
      const v = a.data[i * a.cols + k];
      if (v === 0) continue;
      for (let j = 0; j < b.cols; j++)
        out.data[i * b.cols + j] += v * b.data[k * b.cols + j];
    }
  return out;
}

/**
 * (M X) W where M is a constant mixer and X the node features. The
 * exported features are the identity, in which case X W is just W; an
 * explicit X (tests permute it) is folded into M without gradients.
 */
function mixedInput(tape: Tape, m: Tensor | null, x: Tensor | null, w: Tensor): Tensor {
  if (m === null) {
    return x === null ? w : constMatmul(tape, x, w);
  }
  const mixer = x === null ? m : plainMatmul(m, x);
  return constMatmul(tape, mixer, w);
}

export interface ForwardResult {
  logits: Tensor;
  /** Graph-MLP embedding the contrastive loss reads; null elsewhere */
  z: Tensor | null;
}

export interface Model {
  readonly spec: ModelSpec;
  params(): Tensor[];
  forward(tape: Tape, bt: BatchTensors, training: boolean, rng: Rng): ForwardResult;
  /** total training objective: NLL on roots (+ alpha * NContrast for Graph-MLP) */
  loss(tape: Tape, bt: BatchTensors, training: boolean, rng: Rng): Tensor;
}

abstract class BaseModel implements Model {
  constructor(readonly spec: ModelSpec) {}
  abstract params(): Tensor[];
  abstract forward(tape: Tape, bt: BatchTensors, training: boolean, rng: Rng): ForwardResult;

  loss(tape: Tape, bt: BatchTensors, training: boolean, rng: Rng): Tensor {
    const { logits } = this.forward(tape, bt, training, rng);
    return nllMasked(tape, logits, bt.labels, bt.roots);
  }
}

/** Two hidden layers and a linear classifier head. */
export class Mlp extends BaseModel {
  w0: Tensor; b0: Tensor; w1: Tensor; b1: Tensor; w2: Tensor; b2: Tensor;
  acts: [Activation, Activation];

  constructor(spec: ModelSpec) {
    super(spec);
    const rng = new Rng(spec.seed);
    this.w0 = glorot(rng, spec.inputDim, spec.hidden);
    this.b0 = new Tensor(1, spec.hidden);
    this.w1 = glorot(rng, spec.hidden, spec.hidden);
    this.b1 = new Tensor(1, spec.hidden);
    this.w2 = glorot(rng, spec.hidden, spec.numClasses);
    this.b2 = new Tensor(1, spec.numClasses);
    this.acts = spec.activations ?? ["relu", "relu"];
  }

  params(): Tensor[] {
    return [this.w0, this.b0, this.w1, this.b1, this.w2, this.b2];
  }

  forward(tape: Tape, bt: BatchTensors, training: boolean, rng: Rng): ForwardResult {
    const rate = training ? this.spec.dropout : 0;
    let h = activate(tape, addBias(tape, mixedInput(tape, null, bt.x, this.w0), this.b0), this.acts[0]);
    h = dropout(tape, h, rate, rng);
    let h2 = activate(tape, addBias(tape, matmul(tape, h, this.w1), this.b1), this.acts[1]);
    h2 = dropout(tape, h2, rate, rng);
    const logits = addBias(tape, matmul(tape, h2, this.w2), this.b2);
    return { logits, z: null };
  }
}

/** Two-layer graph convolution: softmax(Ahat ReLU(Ahat X W0) W1). */
export class Gcn extends BaseModel {
  w0: Tensor; w1: Tensor;

  constructor(spec: ModelSpec) {
    super(spec);
    const rng = new Rng(spec.seed);
    this.w0 = glorot(rng, spec.inputDim, spec.hidden);
    this.w1 = glorot(rng, spec.hidden, spec.numClasses);
  }

  params(): Tensor[] {
    return [this.w0, this.w1];
  }

  forward(tape: Tape, bt: BatchTensors, training: boolean, rng: Rng): ForwardResult {
    const rate = training ? this.spec.dropout : 0;
    let h = relu(tape, mixedInput(tape, bt.ahat, bt.x, this.w0));
    h = dropout(tape, h, rate, rng);
    const logits = constMatmul(tape, bt.ahat, matmul(tape, h, this.w1));
    return { logits, z: null };
  }
}

/** Mean aggregator over {v} union N(v), two layers. */
export class Sage extends BaseModel {
  w0: Tensor; w1: Tensor;

  constructor(spec: ModelSpec) {
    super(spec);
    const rng = new Rng(spec.seed);
    this.w0 = glorot(rng, spec.inputDim, spec.hidden);
    this.w1 = glorot(rng, spec.hidden, spec.numClasses);
  }

  params(): Tensor[] {
    return [this.w0, this.w1];
  }

  forward(tape: Tape, bt: BatchTensors, training: boolean, rng: Rng): ForwardResult {
    const rate = training ? this.spec.dropout : 0;
    let h = relu(tape, mixedInput(tape, bt.meanAgg, bt.x, this.w0));
    h = dropout(tape, h, rate, rng);
    const logits = constMatmul(tape, bt.meanAgg, matmul(tape, h, this.w1));
    return { logits, z: null };
  }
}

/**
 * Batch-sized GCN with two conv layers and jumping knowledge: both layer
 * outputs are concatenated before the linear classifier.
 */
export class Saint extends BaseModel {
  w0: Tensor; w1: Tensor; w2: Tensor;

  constructor(spec: ModelSpec) {
    super(spec);
    const rng = new Rng(spec.seed);
    this.w0 = glorot(rng, spec.inputDim, spec.hidden);
    this.w1 = glorot(rng, spec.hidden, spec.hidden);
    this.w2 = glorot(rng, 2 * spec.hidden, spec.numClasses);
  }

  params(): Tensor[] {
    return [this.w0, this.w1, this.w2];
  }

  forward(tape: Tape, bt: BatchTensors, training: boolean, rng: Rng): ForwardResult {
    const rate = training ? this.spec.dropout : 0;
    let h1 = relu(tape, mixedInput(tape, bt.ahat, bt.x, this.w0));
    h1 = dropout(tape, h1, rate, rng);
    let h2 = relu(tape, constMatmul(tape, bt.ahat, matmul(tape, h1, this.w1)));
    h2 = dropout(tape, h2, rate, rng);
    const logits = matmul(tape, concatCols(tape, h1, h2), this.w2);
    return { logits, z: null };
  }
}

/**
 * Graph-MLP without the normalization layer: GELU trunk, linear embedding
 * Z, linear classifier; contrastive loss on Z against the r-hop
 * neighborhood, weighted by alpha. With alpha = 0 the objective reduces to
 * the plain MLP of the same shape.
 */
export class GraphMlp extends BaseModel {
  w0: Tensor; b0: Tensor; w1: Tensor; b1: Tensor; w2: Tensor; b2: Tensor;

  constructor(spec: ModelSpec) {
    super(spec);
    const rng = new Rng(spec.seed);
    this.w0 = glorot(rng, spec.inputDim, spec.hidden);
    this.b0 = new Tensor(1, spec.hidden);
    this.w1 = glorot(rng, spec.hidden, spec.hidden);
    this.b1 = new Tensor(1, spec.hidden);
    this.w2 = glorot(rng, spec.hidden, spec.numClasses);
    this.b2 = new Tensor(1, spec.numClasses);
  }

  params(): Tensor[] {
    return [this.w0, this.b0, this.w1, this.b1, this.w2, this.b2];
  }

  forward(tape: Tape, bt: BatchTensors, training: boolean, rng: Rng): ForwardResult {
    const rate = training ? this.spec.dropout : 0;
    let h = gelu(tape, addBias(tape, mixedInput(tape, null, bt.x, this.w0), this.b0));
    h = dropout(tape, h, rate, rng);
    const z = addBias(tape, matmul(tape, h, this.w1), this.b1);
    const logits = addBias(tape, matmul(tape, z, this.w2), this.b2);
    return { logits, z };
  }

  override loss(tape: Tape, bt: BatchTensors, training: boolean, rng: Rng): Tensor {
    const { logits, z } = this.forward(tape, bt, training, rng);
    const ce = nllMasked(tape, logits, bt.labels, bt.roots);
    const alpha = this.spec.alpha ?? 0;
    if (alpha === 0 || !training) return ce;
    const gamma = contrastWeights(bt.ahat, this.spec.rhop ?? 1);
    const nc = ncontrast(tape, z!, gamma, this.spec.tau ?? 1.0);
    return add(tape, ce, scale(tape, nc, alpha));
  }
}

export function buildModel(spec: ModelSpec): Model {
  switch (spec.family) {
    case "mlp":
      return new Mlp(spec);
    case "gcn":
      return new Gcn(spec);
    case "sage":
      return new Sage(spec);
    case "saint":
      return new Saint(spec);
    case "graphmlp":
      return new GraphMlp(spec);
    default:
      throw new Error(`unknown model family ${spec.family as string}`);
  }
}
