import { describe, expect, it } from "vitest";

import { Batch, buildTensors } from "../src/batches.js";
import { buildModel, defaultSpec, Gcn, ModelSpec } from "../src/models.js";
import { Rng } from "../src/rng.js";
import { Tape, Tensor, ncontrast, nllMasked } from "../src/tensor.js";
import { pathBatch } from "./helpers.js";

function spec(family: ModelSpec["family"], overrides: Partial<ModelSpec> = {}): ModelSpec {
  return { ...defaultSpec(family, 4, 3, 42), dropout: 0, ...overrides };
}

describe("forward passes", () => {
  it("single-node batch through the MLP has per-node class scores", () => {
    const batch: Batch = {
      guard: 1,
      labels: Int32Array.from([0]),
      roots: [0],
      edges: [],
      dummyCount: 0,
    };
    const bt = buildTensors(batch);
    const model = buildModel({ ...spec("mlp"), inputDim: 1 });
    const { logits } = model.forward(new Tape(), bt, false, new Rng(0));
    expect([logits.rows, logits.cols]).toEqual([1, 3]);
  });

  it("every family produces finite scores for dummy-padded batches", () => {
    const bt = pathBatch();
    for (const family of ["mlp", "gcn", "sage", "saint", "graphmlp"] as const) {
      const model = buildModel(spec(family));
      const { logits } = model.forward(new Tape(), bt, false, new Rng(0));
      expect([logits.rows, logits.cols]).toEqual([4, 3]);
      expect(Array.from(logits.data).every(Number.isFinite)).toBe(true);
    }
  });

  it("dummy and non-root rows contribute exactly zero loss gradient", () => {
    const bt = pathBatch();
    for (const family of ["mlp", "gcn", "sage", "saint", "graphmlp"] as const) {
      const model = buildModel(spec(family, { alpha: 0 }));
      for (const p of model.params()) p.zeroGrad();
      const tape = new Tape();
      const { logits } = model.forward(tape, bt, true, new Rng(0));
      const loss = nllMasked(tape, logits, bt.labels, bt.roots);
      tape.backward(loss);
      for (let row = 1; row < 4; row++) {
        for (let c = 0; c < 3; c++) expect(logits.grad[row * 3 + c]).toBe(0);
      }
    }
  });

  it("labels at non-root positions never influence the loss", () => {
    const bt = pathBatch();
    const model = buildModel(spec("gcn"));
    const tape1 = new Tape();
    const base = model.loss(tape1, bt, false, new Rng(0)).data[0];

    const garbled = {
      ...bt,
      labels: Int32Array.from(bt.labels, (v, i) => (bt.roots.includes(i) ? v : 2)),
    };
    const tape2 = new Tape();
    const same = model.loss(tape2, garbled, false, new Rng(0)).data[0];
    expect(same).toBe(base);
  });
});

describe("GCN against a dense-matrix oracle", () => {
  it("matches an explicit evaluation of softmax(A ReLU(A X W0) W1)", () => {
    const bt = pathBatch();
    const model = buildModel(spec("gcn", { hidden: 5 })) as Gcn;
    const { logits } = model.forward(new Tape(), bt, false, new Rng(0));

    // independent dense computation
    const n = 4;
    const ahat = bt.ahat;
    const h = new Float64Array(n * 5);
    // X = I so X W0 = W0; H = ReLU(Ahat W0)
    for (let i = 0; i < n; i++)
      for (let j = 0; j < 5; j++) {
        let acc = 0;
        for (let k = 0; k < n; k++) acc += ahat.data[i * n + k] * model.w0.data[k * 5 + j];
        h[i * 5 + j] = Math.max(acc, 0);
      }
    const hw = new Float64Array(n * 3);
    for (let i = 0; i < n; i++)
      for (let j = 0; j < 3; j++) {
        let acc = 0;
        for (let k = 0; k < 5; k++) acc += h[i * 5 + k] * model.w1.data[k * 3 + j];
        hw[i * 3 + j] = acc;
      }
    const expected = new Float64Array(n * 3);
    for (let i = 0; i < n; i++)
      for (let j = 0; j < 3; j++) {
        let acc = 0;
        for (let k = 0; k < n; k++) acc += ahat.data[i * n + k] * hw[k * 3 + j];
        expected[i * 3 + j] = acc;
      }
    for (let i = 0; i < expected.length; i++) {
      expect(logits.data[i]).toBeCloseTo(expected[i], 10);
    }
  });
});

describe("permutation equivariance", () => {
  it("relabeling batch nodes (features travel along) leaves root scores unchanged", () => {
    const base: Batch = {
      guard: 5,
      labels: Int32Array.from([1, -1, -1, 2, -1]),
      roots: [0, 3],
      edges: [
        [0, 1, 0],
        [0, 2, 1],
        [3, 4, 0],
      ],
      dummyCount: 0,
    };
    const perm = [2, 0, 4, 1, 3]; // old index -> new index
    const permutedLabels = new Int32Array(5);
    for (let old = 0; old < 5; old++) permutedLabels[perm[old]] = base.labels[old];
    const permuted: Batch = {
      guard: 5,
      labels: permutedLabels,
      roots: base.roots.map((r) => perm[r]),
      edges: base.edges.map(([s, d, t]) => [perm[s], perm[d], t]),
      dummyCount: 0,
    };

    const btBase = buildTensors(base);
    const btPerm = buildTensors(permuted);
    // features travel with the nodes: node perm[i] carries basis vector i
    const x = new Tensor(5, 5);
    for (let old = 0; old < 5; old++) x.data[perm[old] * 5 + old] = 1;
    btPerm.x = x;

    for (const family of ["gcn", "sage", "saint"] as const) {
      const model = buildModel({ ...defaultSpec(family, 5, 3, 7), dropout: 0 });
      const a = model.forward(new Tape(), btBase, false, new Rng(0)).logits;
      const b = model.forward(new Tape(), btPerm, false, new Rng(0)).logits;
      for (const root of base.roots) {
        for (let c = 0; c < 3; c++) {
          expect(b.get(perm[root], c)).toBeCloseTo(a.get(root, c), 9);
        }
      }
    }
  });
});

describe("ncontrast closed-form cases", () => {
  it("two rows, one positive pair, matches the hand-computed expression", () => {
    // z0 = (1, 0), z1 = (0, 1): cosine similarity 0; add a third row to
    // give the denominator a second term.
    const z = Tensor.from(3, 2, [1, 0, 0, 1, 1, 1]);
    const gamma = new Tensor(3, 3);
    gamma.data[0 * 3 + 1] = 1; // row 0's only positive is row 1
    const tau = 2.0;
    const tape = new Tape();
    const loss = ncontrast(tape, z, gamma, tau);

    const s01 = 0;
    const s02 = 1 / Math.SQRT2;
    const expected = -Math.log(
      Math.exp(s01 / tau) / (Math.exp(s01 / tau) + Math.exp(s02 / tau)),
    );
    expect(loss.data[0]).toBeCloseTo(expected, 12);
  });

  it("temperature rescales but keeps the per-row ordering of pair terms", () => {
    const sims = [0.9, 0.1, -0.4];
    for (const tau of [0.5, 1.0, 2.0]) {
      const terms = sims.map((s) => Math.exp(s / tau));
      const order = [...terms.keys()].sort((a, b) => terms[b] - terms[a]);
      expect(order).toEqual([0, 1, 2]);
    }
  });

  it("rows without positives are excluded, not clamped", () => {
    const z = Tensor.from(2, 2, [1, 0, 0, 1]);
    const gamma = new Tensor(2, 2); // no positives at all
    const tape = new Tape();
    const loss = ncontrast(tape, z, gamma, 1.0);
    expect(loss.data[0]).toBe(0);
  });
});

describe("determinism", () => {
  it("same seed, same forward scores", () => {
    const bt = pathBatch();
    for (const family of ["mlp", "gcn", "sage", "saint", "graphmlp"] as const) {
      const a = buildModel(spec(family)).forward(new Tape(), bt, false, new Rng(0)).logits;
      const b = buildModel(spec(family)).forward(new Tape(), bt, false, new Rng(0)).logits;
      expect(Array.from(a.data)).toEqual(Array.from(b.data));
    }
  });
});
