/**
 * CLI: cross-validate one model over an exported rotation tree, or run a
 * hyperparameter grid on rotation 00 ranked by final validation accuracy.
 *
 *   node dist/main.js cv   --data DIR --model gcn [--epochs 30] [--hidden 64]
 *                          [--lr 0.1] [--dropout 0] [--alpha 1 --tau 1 --rhop 2]
 *                          [--seed 1] [--out cv.json] [--tsv cv.tsv]
 *   node dist/main.js grid --data DIR --model gcn --config grid.json
 *                          [--epochs 30] [--seed 1] [--out best.json]
 */

import * as fs from "node:fs";

import { ModelFamily, ModelSpec } from "./models.js";
import { crossValidate, loadRotation, trainModel, evaluateAccuracy } from "./train.js";

type Flags = Record<string, string>;

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed flag: ${key}`);
    }
    flags[key.slice(2)] = argv[i + 1];
  }
  return flags;
}

function num(flags: Flags, key: string, fallback: number): number {
  return key in flags ? Number(flags[key]) : fallback;
}

const FAMILIES: ModelFamily[] = ["mlp", "gcn", "sage", "saint", "graphmlp"];

function specFromFlags(flags: Flags): Omit<ModelSpec, "inputDim" | "numClasses"> {
  const family = flags.model as ModelFamily;
  if (!FAMILIES.includes(family)) {
    throw new Error(`--model must be one of ${FAMILIES.join(", ")}`);
  }
  const graphmlp = family === "graphmlp";
  return {
    family,
    hidden: num(flags, "hidden", graphmlp ? 256 : 64),
    dropout: num(flags, "dropout", graphmlp ? 0.6 : 0.0),
    lr: num(flags, "lr", graphmlp ? 0.01 : 0.1),
    seed: num(flags, "seed", 1),
    alpha: num(flags, "alpha", 1.0),
    tau: num(flags, "tau", 1.0),
    rhop: num(flags, "rhop", 2),
  };
}

function cmdCv(flags: Flags): number {
  const result = crossValidate(specFromFlags(flags), flags.data, num(flags, "epochs", 30));
  const line = `${flags.model}\tmean=${result.mean.toFixed(4)}\tstderr=${result.stderr.toFixed(4)}\tfolds=${result.folds.length}`;
  console.log(line);
  if (flags.out) fs.writeFileSync(flags.out, JSON.stringify(result, null, 2) + "\n");
  if (flags.tsv) {
    const rows = ["model\tmean_accuracy\tstandard_error\tfolds"];
    rows.push(
      `${flags.model}\t${result.mean.toFixed(6)}\t${result.stderr.toFixed(6)}\t${result.folds.length}`,
    );
    fs.writeFileSync(flags.tsv, rows.join("\n") + "\n");
  }
  return 0;
}

interface Grid {
  lr?: number[];
  dropout?: number[];
  hidden?: number[];
  alpha?: number[];
  tau?: number[];
}

const DEFAULT_GRID: Required<Grid> = {
  lr: [0.1, 0.01, 0.001],
  dropout: [0.0, 0.2, 0.5],
  hidden: [32, 64],
  alpha: [1, 10, 100],
  tau: [0.5, 1.0, 2.0],
};

function cmdGrid(flags: Flags): number {
  const base = specFromFlags(flags);
  const fileGrid: Grid = flags.config
    ? (JSON.parse(fs.readFileSync(flags.config, "utf-8")) as Grid)
    : {};
  const graphmlp = base.family === "graphmlp";
  const grid = {
    lr: fileGrid.lr ?? (graphmlp ? [0.1, 0.01] : DEFAULT_GRID.lr),
    dropout: fileGrid.dropout ?? (graphmlp ? [base.dropout] : DEFAULT_GRID.dropout),
    hidden: fileGrid.hidden ?? (graphmlp ? [64, 256] : DEFAULT_GRID.hidden),
    alpha: fileGrid.alpha ?? (graphmlp ? DEFAULT_GRID.alpha : [0]),
    tau: fileGrid.tau ?? (graphmlp ? DEFAULT_GRID.tau : [1]),
  };
  const data = loadRotation(flags.data, 0);
  const epochs = num(flags, "epochs", 30);
  const trials: Array<{ spec: ModelSpec; valAccuracy: number }> = [];
  for (const lr of grid.lr)
    for (const dropoutRate of grid.dropout)
      for (const hidden of grid.hidden)
        for (const alpha of grid.alpha)
          for (const tau of grid.tau) {
            const spec: ModelSpec = {
              ...base,
              lr,
              dropout: dropoutRate,
              hidden,
              alpha,
              tau,
              inputDim: data.manifest.guard,
              numClasses: data.manifest.num_classes,
            };
            const { model } = trainModel(spec, data.train, data.val, epochs);
            const valAccuracy = evaluateAccuracy(model, data.val);
            trials.push({ spec, valAccuracy });
            console.log(
              `lr=${lr} dropout=${dropoutRate} hidden=${hidden}` +
                (graphmlp ? ` alpha=${alpha} tau=${tau}` : "") +
                ` -> val=${valAccuracy.toFixed(4)}`,
            );
          }
  trials.sort((a, b) => b.valAccuracy - a.valAccuracy);
  const best = trials[0];
  console.log(`best: val=${best.valAccuracy.toFixed(4)}`);
  if (flags.out) fs.writeFileSync(flags.out, JSON.stringify(best, null, 2) + "\n");
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const flags = parseFlags(rest);
    if (command === "cv") return cmdCv(flags);
    if (command === "grid") return cmdGrid(flags);
    throw new Error(`unknown command ${command ?? "(none)"}; use cv or grid`);
  } catch (err) {
    console.error(`HARNESS-ERROR\t${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
