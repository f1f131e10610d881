/**
 * Reader for exported mini-batch files and their manifest.
 *
 * File format: a "SUMGRAPH-BATCH v1" header line, then one JSON object
 * {guard, graphs:[{root, n_nodes, labels, edges:[[src,dst,ptype],...]}],
 * dummy_count}. Node indices are local per graph; batch node order is the
 * concatenation of the graphs followed by dummy nodes. Unknown JSON keys
 * are ignored. Node features are the implicit one-hot encoding: node i of
 * the batch is basis vector i of dimension guard.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { Tensor } from "./tensor.js";

export const BATCH_HEADER = "SUMGRAPH-BATCH v1";

export interface GraphRecord {
  root: number;
  n_nodes: number;
  labels: number[];
  edges: Array<[number, number, number]>;
}

export interface Manifest {
  format: string;
  model: string;
  guard: number;
  count: number;
  num_classes: number;
  label_map: Record<string, number>;
  edge_types: string[];
  [key: string]: unknown;
}

export interface Batch {
  guard: number;
  /** class index per node, -1 on non-roots and dummies */
  labels: Int32Array;
  /** batch-level node indices of the subgraph roots */
  roots: number[];
  /** directed edges in batch-level indices, as exported */
  edges: Array<[number, number, number]>;
  dummyCount: number;
}

export function readManifest(dir: string): Manifest {
  const manifest = JSON.parse(
    fs.readFileSync(path.join(dir, "manifest.json"), "utf-8"),
  ) as Manifest;
  if (manifest.format !== BATCH_HEADER) {
    throw new Error(`unsupported batch format: ${manifest.format}`);
  }
  return manifest;
}

export function readBatchFile(file: string, manifest?: Manifest): Batch {
  const text = fs.readFileSync(file, "utf-8");
  const newline = text.indexOf("\n");
  const header = text.slice(0, newline);
  if (header !== BATCH_HEADER) {
    throw new Error(`${file}: bad header ${JSON.stringify(header)}`);
  }
  const obj = JSON.parse(text.slice(newline + 1)) as {
    guard: number;
    graphs: GraphRecord[];
    dummy_count: number;
  };
  const guard = obj.guard;
  const labels = new Int32Array(guard).fill(-1);
  const roots: number[] = [];
  const edges: Array<[number, number, number]> = [];
  let offset = 0;
  for (const g of obj.graphs) {
    for (let i = 0; i < g.n_nodes; i++) labels[offset + i] = g.labels[i];
    roots.push(offset + g.root);
    for (const [src, dst, ptype] of g.edges) {
      edges.push([offset + src, offset + dst, ptype]);
    }
    offset += g.n_nodes;
  }
  if (offset + obj.dummy_count !== guard) {
    throw new Error(`${file}: nodes ${offset} + dummies ${obj.dummy_count} != guard ${guard}`);
  }
  if (manifest) {
    if (guard !== manifest.guard) throw new Error(`${file}: guard mismatch`);
    for (const r of roots) {
      if (labels[r] < 0 || labels[r] >= manifest.num_classes) {
        throw new Error(`${file}: root label ${labels[r]} outside label map`);
      }
    }
  }
  return { guard, labels, roots, edges, dummyCount: obj.dummy_count };
}

export function loadBatches(dir: string): { manifest: Manifest; batches: Batch[] } {
  const manifest = readManifest(dir);
  const files = fs
    .readdirSync(dir)
    .filter((f) => f.startsWith("batch-") && f.endsWith(".sgb"))
    .sort();
  if (files.length === 0 && manifest.count !== 0) {
    throw new Error(`${dir}: manifest promises ${manifest.count} batches, found none`);
  }
  const batches = files.map((f) => readBatchFile(path.join(dir, f), manifest));
  return { manifest, batches };
}

// -- tensors derived per batch ----------------------------------------------------

export interface BatchTensors {
  guard: number;
  labels: Int32Array;
  roots: number[];
  /** symmetric degree-normalized adjacency with self loops (constant) */
  ahat: Tensor;
  /** row-mean over {v} union N(v) (constant), for the mean aggregator */
  meanAgg: Tensor;
  /** explicit node features; null means the implicit identity */
  x: Tensor | null;
}

/**
 * Â = D̃^{-1/2} (A + I) D̃^{-1/2} with A binary and undirected. Message
 * passing treats edge direction as undirected; no other normalization is
 * applied anywhere (vertex degree is a structural feature the models must
 * see).
 */
export function buildTensors(batch: Batch): BatchTensors {
  const n = batch.guard;
  const adj = new Float64Array(n * n);
  for (const [src, dst] of batch.edges) {
    if (src !== dst) {
      adj[src * n + dst] = 1;
      adj[dst * n + src] = 1;
    }
  }
  for (let i = 0; i < n; i++) adj[i * n + i] = 1; // self loops

  const degree = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    let d = 0;
    for (let j = 0; j < n; j++) d += adj[i * n + j];
    degree[i] = d;
  }

  const ahat = new Tensor(n, n);
  const meanAgg = new Tensor(n, n);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      if (adj[i * n + j] === 0) continue;
      ahat.data[i * n + j] = adj[i * n + j] / Math.sqrt(degree[i] * degree[j]);
      meanAgg.data[i * n + j] = 1 / degree[i];
    }
  }
  return {
    guard: n,
    labels: batch.labels,
    roots: batch.roots,
    ahat,
    meanAgg,
    x: null,
  };
}

/** Â^r as a dense constant; r = 1 returns Â itself. */
export function ahatPower(ahat: Tensor, r: number): Tensor {
  if (r < 1) throw new Error("power must be >= 1");
  let result = ahat;
  for (let step = 1; step < r; step++) {
    const n = ahat.rows;
    const next = new Tensor(n, n);
    for (let i = 0; i < n; i++)
      for (let k = 0; k < n; k++) {
        const v = result.data[i * n + k];
        if (v === 0) continue;
        for (let j = 0; j < n; j++) next.data[i * n + j] += v * ahat.data[k * n + j];
      }
    result = next;
  }
  return result;
}

/** Positive-pair weights for the contrastive loss: Â^r with zero diagonal. */
export function contrastWeights(ahat: Tensor, r: number): Tensor {
  const powered = ahatPower(ahat, r);
  const gamma = powered === ahat ? ahat.clone() : powered;
  for (let i = 0; i < gamma.rows; i++) gamma.data[i * gamma.rows + i] = 0;
  return gamma;
}
