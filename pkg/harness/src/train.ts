/**
 * Adam training loop and 10-fold cross-validation over exported rotations.
 *
 * A fold trains on the train-role batches for a fixed number of epochs
 * (batch order reshuffled per epoch from the run seed), monitors mean
 * validation accuracy, then reports mean accuracy over the test batches.
 * Everything is deterministic given the seed.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { BatchTensors, buildTensors, loadBatches, Manifest } from "./batches.js";
import { buildModel, Model, ModelSpec } from "./models.js";
import { Rng } from "./rng.js";
import { accuracyMasked, Tape, Tensor } from "./tensor.js";

export class Diverged extends Error {
  constructor(readonly epoch: number, readonly batch: number) {
    super(`loss became non-finite at epoch ${epoch}, batch ${batch}`);
  }
}

export interface EpochReport {
  epoch: number;
  trainLoss: number;
  valAccuracy: number;
}

export interface FoldResult {
  rotation: number;
  testAccuracy: number;
  diverged: boolean;
  epochs: EpochReport[];
}

export interface CVResult {
  spec: ModelSpec;
  folds: FoldResult[];
  mean: number;
  stderr: number;
}

class Adam {
  private m: Float64Array[];
  private v: Float64Array[];
  private t = 0;

  constructor(
    private params: Tensor[],
    private lr: number,
    private beta1 = 0.9,
    private beta2 = 0.999,
    private eps = 1e-8,
  ) {
    this.m = params.map((p) => new Float64Array(p.data.length));
    this.v = params.map((p) => new Float64Array(p.data.length));
  }

  step(): void {
    this.t += 1;
    const c1 = 1 - Math.pow(this.beta1, this.t);
    const c2 = 1 - Math.pow(this.beta2, this.t);
    for (let k = 0; k < this.params.length; k++) {
      const p = this.params[k];
      const m = this.m[k];
      const v = this.v[k];
      for (let i = 0; i < p.data.length; i++) {
        const g = p.grad[i];
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * g;
        v[i] = this.beta2 * v[i] + (1 - this.beta2) * g * g;
        p.data[i] -= (this.lr * (m[i] / c1)) / (Math.sqrt(v[i] / c2) + this.eps);
      }
    }
  }
}

/** Mean root accuracy over batches; batches without roots are skipped. */
export function evaluateAccuracy(model: Model, batches: BatchTensors[]): number {
  const rng = new Rng(0); // eval path draws no randomness
  let total = 0;
  let counted = 0;
  for (const bt of batches) {
    if (bt.roots.length === 0) continue;
    const tape = new Tape();
    const { logits } = model.forward(tape, bt, false, rng);
    total += accuracyMasked(logits, bt.labels, bt.roots);
    counted++;
  }
  return counted ? total / counted : 0;
}

export interface TrainedFold {
  model: Model;
  epochs: EpochReport[];
}

export function trainModel(
  spec: ModelSpec,
  train: BatchTensors[],
  val: BatchTensors[],
  epochs: number,
): TrainedFold {
  const model = buildModel(spec);
  const optimizer = new Adam(model.params(), spec.lr);
  const trainRng = new Rng((spec.seed ^ 0x7e571f1e) >>> 0);
  return trainLoop(model, optimizer, trainRng, train, val, epochs);
}

function trainLoop(
  model: Model,
  optimizer: Adam,
  trainRng: Rng,
  train: BatchTensors[],
  val: BatchTensors[],
  epochs: number,
): TrainedFold {
  const reports: EpochReport[] = [];
  const order = train.map((_, i) => i);
  for (let epoch = 1; epoch <= epochs; epoch++) {
    trainRng.shuffle(order);
    let lossSum = 0;
    let steps = 0;
    for (const idx of order) {
      const bt = train[idx];
      if (bt.roots.length === 0) continue;
      for (const p of model.params()) p.zeroGrad();
      const tape = new Tape();
      const loss = model.loss(tape, bt, true, trainRng);
      const value = loss.data[0];
      if (!Number.isFinite(value)) throw new Diverged(epoch, idx);
      tape.backward(loss);
      optimizer.step();
      lossSum += value;
      steps++;
    }
    reports.push({
      epoch,
      trainLoss: steps ? lossSum / steps : 0,
      valAccuracy: evaluateAccuracy(model, val),
    });
  }
  return { model, epochs: reports };
}

// -- cross-validation over an export-cv directory -----------------------------------


export interface RotationData {
  rotation: number;
  manifest: Manifest;
  train: BatchTensors[];
  val: BatchTensors[];
  test: BatchTensors[];
}

export function loadRotation(dataDir: string, rotation: number): RotationData {
  const base = path.join(dataDir, `rotation-${String(rotation).padStart(2, "0")}`);
  const roles: Record<string, BatchTensors[]> = {};
  let manifest: Manifest | null = null;
  for (const role of ["train", "val", "test"]) {
    const { manifest: m, batches } = loadBatches(path.join(base, role));
    roles[role] = batches.map(buildTensors);
    manifest = manifest ?? m;
  }
  return {
    rotation,
    manifest: manifest!,
    train: roles.train,
    val: roles.val,
    test: roles.test,
  };
}

export function listRotations(dataDir: string): number[] {
  return fs
    .readdirSync(dataDir)
    .filter((name) => /^rotation-\d+$/.test(name))
    .map((name) => parseInt(name.split("-")[1], 10))
    .sort((a, b) => a - b);
}

export function crossValidate(
  specBase: Omit<ModelSpec, "inputDim" | "numClasses">,
  dataDir: string,
  epochs: number,
): CVResult {
  const rotations = listRotations(dataDir);
  if (rotations.length === 0) throw new Error(`no rotation-* directories in ${dataDir}`);
  const folds: FoldResult[] = [];
  let spec: ModelSpec | null = null;
  for (const rotation of rotations) {
    const data = loadRotation(dataDir, rotation);
    spec = {
      ...specBase,
      inputDim: data.manifest.guard,
      numClasses: data.manifest.num_classes,
      seed: (specBase.seed + rotation * 1000003) >>> 0,
    };
    try {
      const { model, epochs: reports } = trainModel(spec, data.train, data.val, epochs);
      folds.push({
        rotation,
        testAccuracy: evaluateAccuracy(model, data.test),
        diverged: false,
        epochs: reports,
      });
    } catch (err) {
      if (err instanceof Diverged) {
        folds.push({ rotation, testAccuracy: NaN, diverged: true, epochs: [] });
      } else {
        throw err;
      }
    }
  }
  const accs = folds.filter((f) => !f.diverged).map((f) => f.testAccuracy);
  const mean = accs.reduce((a, b) => a + b, 0) / Math.max(accs.length, 1);
  const variance =
    accs.length > 1
      ? accs.reduce((a, b) => a + (b - mean) ** 2, 0) / (accs.length - 1)
      : 0;
  return {
    spec: spec!,
    folds,
    mean,
    stderr: Math.sqrt(variance) / Math.sqrt(Math.max(accs.length, 1)),
  };
}
