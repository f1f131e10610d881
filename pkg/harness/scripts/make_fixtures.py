#!/usr/bin/env python3
"""Build the harness test fixtures by driving the sumgraph CLI.

Two corpora are exported as 10-rotation cross-validation trees:

  smoke: two classes separated by a single marker property, 97/3 skew,
         tiny subgraphs; exercises end-to-end learnability.
  zipf:  >= 600 property-set classes under a Zipf-like occurrence
         distribution; the regime where lossless baselines dominate.
         Includes the Bloom evaluation report at (15, 1e-3).

Idempotent: skips work when fixtures/.complete exists.
"""

import pathlib
import subprocess
import sys

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent
FIXTURES = HERE.parent / "fixtures"
MARKER = FIXTURES / ".complete"


def cli(*args) -> None:
    cmd = [sys.executable, "-m", "sumgraph.cli", *map(str, args)]
    subprocess.run(cmd, check=True, stdout=subprocess.DEVNULL)


def write_smoke_corpus(path: pathlib.Path) -> None:
    rng = np.random.default_rng(90210)
    lines = []
    for i in range(800):
        s = f"<http://smoke/s{i}>"
        if rng.random() < 0.97:
            lines.append(f"{s} <http://smoke/pA> <http://smoke/a{i}> .\n")
        else:
            for j in range(4):
                lines.append(f"{s} <http://smoke/pB> <http://smoke/b{i}-{j}> .\n")
    path.write_text("".join(lines), encoding="utf-8")


def write_zipf_corpus(path: pathlib.Path) -> None:
    # class k <-> the property subset encoded by the bits of k+1 (10 bits)
    rng = np.random.default_rng(1879)
    n_classes = 1000
    ranks = np.arange(1, n_classes + 1, dtype=float)
    probs = 1.0 / ranks**1.1
    probs /= probs.sum()

    classes = list(range(600))  # one forced subject per class: >= 600 classes
    classes += [int(c) for c in rng.choice(n_classes, size=900, p=probs)]

    lines = []
    for i, k in enumerate(classes):
        s = f"<http://zipf/s{i}>"
        bits = k + 1
        for b in range(10):
            if bits >> b & 1:
                lines.append(f"{s} <http://zipf/q{b}> <http://zipf/o{i}-{b}> .\n")
    path.write_text("".join(lines), encoding="utf-8")


def export_tree(name: str, corpus_writer, guard: int, counts, weights: str, seed: int,
                bloom: bool = False) -> None:
    root = FIXTURES / name
    root.mkdir(parents=True, exist_ok=True)
    corpus = root / "corpus.nt"
    corpus_writer(corpus)
    store = root / "store"
    labels = root / "labels.tsv"
    folds = root / "folds.tsv"
    cli("ingest", corpus, "--out", store)
    cli("summarize", "--store", store, "--model", "ac", "--out", labels)
    cli("split", "--store", store, "--seed", seed, "--out", folds)
    train_count, val_count, test_count = counts
    cli(
        "export-cv", "--store", store, "--labels", labels, "--folds-file", folds,
        "--model", "ac", "--rotations", 10,
        "--train-count", train_count, "--val-count", val_count,
        "--test-count", test_count,
        "--guard", guard, "--weights", weights, "--seed", seed,
        "--out", root / "cv",
    )
    if bloom:
        cli(
            "bloom-eval", "--store", store, "--labels", labels, "--model", "ac",
            "--n", 15, "--p", 1e-3, "--out", root / "bloom-report.tsv",
        )


def main() -> int:
    if MARKER.exists():
        print("fixtures already built")
        return 0
    FIXTURES.mkdir(exist_ok=True)
    export_tree("smoke", write_smoke_corpus, guard=24, counts=(40, 15, 75),
                weights="uniform", seed=9)
    export_tree("zipf", write_zipf_corpus, guard=32, counts=(12, 5, 25),
                weights="inverse", seed=11, bloom=True)
    MARKER.write_text("ok\n")
    print("fixtures built")
    return 0


if __name__ == "__main__":
    sys.exit(main())
