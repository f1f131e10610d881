"""Command-line pipeline: ingest -> summarize -> split/filter -> sample / bloom-eval / stats.

Subcommands communicate through persisted artifacts (dictionary TSV,
subject-map binary, label/fold TSVs, batch directories) so large runs are
restartable stage by stage. Artifact files embed a hash of the flag values
that produced them; paths are excluded from the hash so a byte-identical
run can be reproduced from a relocated or reordered copy of the input.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys

import numpy as np

from . import batching, bloom, metrics
from .hashing import fnv1a_64
from .ingest import IngestStats, ingest_file
from .store import SubjectMap
from .summaries import SummaryModel, class_hex, summarize
from .terms import TermDictionary

DICT_FILE = "dict.tsv"
SUBJECTS_FILE = "subjects.bin"


def config_hash(**flags) -> str:
    canonical = json.dumps(flags, sort_keys=True, separators=(",", ":"))
    return f"{fnv1a_64(canonical.encode('utf-8')):016x}"


def _escape(text: str) -> str:
    return TermDictionary._escape(text)


def _unescape(text: str) -> str:
    return TermDictionary._unescape(text)


def _write_tsv(path: str, rows: list[str], config: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# config={config}\n")
        for row in rows:
            fh.write(row + "\n")


def _read_tsv(path: str) -> list[list[str]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            rows.append(line.split("\t"))
    return rows


def load_store(store_dir: str) -> SubjectMap:
    dct = TermDictionary.load_tsv(os.path.join(store_dir, DICT_FILE))
    return SubjectMap.load_bin(os.path.join(store_dir, SUBJECTS_FILE), dct)


def load_labels(path: str) -> dict[str, int]:
    return {_unescape(n3): int(hex_label, 16) for n3, hex_label in _read_tsv(path)}


def load_folds(path: str) -> dict[str, int]:
    return {_unescape(n3): int(fold) for n3, fold in _read_tsv(path)}


def load_keep(path: str) -> set[str]:
    return {_unescape(row[0]) for row in _read_tsv(path)}


def _subjects_by_n3(smap: SubjectMap) -> dict[str, int]:
    return {smap.dct.n3(sid): sid for sid in smap.subjects}


def attach_labels(smap: SubjectMap, labels: dict[str, int]) -> None:
    by_n3 = _subjects_by_n3(smap)
    for n3, label in labels.items():
        sid = by_n3.get(n3)
        if sid is None:
            raise KeyError(f"label for unknown subject {n3}")
        smap.set_label(sid, label)


def attach_folds(smap: SubjectMap, folds: dict[str, int]) -> None:
    by_n3 = _subjects_by_n3(smap)
    for n3, fold in folds.items():
        sid = by_n3.get(n3)
        if sid is None:
            raise KeyError(f"fold for unknown subject {n3}")
        smap.set_fold(sid, fold)


def _sorted_subjects(smap: SubjectMap, sids) -> list[int]:
    return sorted(sids, key=smap.sort_key)


# -- subcommands -------------------------------------------------------------


def cmd_ingest(args) -> int:
    cfg = config_hash(cmd="ingest", strict=args.strict)
    os.makedirs(args.out, exist_ok=True)
    dct = TermDictionary()
    stats = IngestStats()

    def triples():
        for path in args.inputs:
            yield from ingest_file(path, dct, stats=stats, strict=args.strict)

    smap = SubjectMap.build(triples(), dct)
    dct.save_tsv(os.path.join(args.out, DICT_FILE))
    smap.save_bin(os.path.join(args.out, SUBJECTS_FILE))
    doc = {
        "triples": stats.triples,
        "skipped": stats.skipped,
        "distinct_terms": stats.distinct_terms,
        "subjects": len(smap),
        "config": cfg,
    }
    with open(os.path.join(args.out, "ingest-stats.json"), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(
        f"ingested triples={stats.triples} skipped={stats.skipped} "
        f"terms={stats.distinct_terms} subjects={len(smap)}"
    )
    return 0


def cmd_summarize(args) -> int:
    cfg = config_hash(cmd="summarize", model=args.model, sx_multiset=args.sx_multiset)
    smap = load_store(args.store)
    result = summarize(SummaryModel(args.model), smap, sx_multiset=args.sx_multiset)

    rows = [
        f"{_escape(smap.dct.n3(sid))}\t{class_hex(smap.subjects[sid].label)}"
        for sid in _sorted_subjects(smap, smap.subjects)
    ]
    _write_tsv(args.out, rows, cfg)

    if args.histogram:
        hist_rows = [
            f"{class_hex(label)}\t{count}"
            for label, count in sorted(
                result.class_counts.items(), key=lambda kv: (-kv[1], kv[0])
            )
        ]
        _write_tsv(args.histogram, hist_rows, cfg)
    print(f"summarized model={args.model} subjects={result.n_subjects} classes={result.num_classes}")
    return 0


def cmd_stats(args) -> int:
    cfg = config_hash(cmd="stats", format=args.format)
    labels = load_labels(args.labels)
    stats = metrics.class_stats(labels)
    if args.format == "json":
        doc = json.loads(stats.to_json())
        doc["config"] = cfg
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        rows = [
            f"n\t{stats.n}",
            f"num_classes\t{stats.num_classes}",
            f"singleton_count\t{stats.singleton_count}",
            f"singleton_fraction\t{stats.singleton_fraction:.12g}",
        ]
        _write_tsv(args.out, rows, cfg)
    if args.histogram:
        rows = [
            f"{rank}\t{prob:.12g}" for rank, prob in stats.rank_probabilities()
        ]
        _write_tsv(args.histogram, rows, cfg)
    print(
        f"stats classes={stats.num_classes} "
        f"singleton_fraction={stats.singleton_fraction:.4f}"
    )
    return 0


def cmd_split(args) -> int:
    cfg = config_hash(cmd="split", folds=args.folds, seed=args.seed)
    smap = load_store(args.store)
    assignment = batching.split_folds(smap, args.seed, args.folds)
    rows = [
        f"{_escape(smap.dct.n3(sid))}\t{assignment[sid]}"
        for sid in _sorted_subjects(smap, assignment)
    ]
    _write_tsv(args.out, rows, cfg)
    print(f"split subjects={len(assignment)} folds={args.folds} seed={args.seed}")
    return 0


def cmd_filter(args) -> int:
    cfg = config_hash(
        cmd="filter",
        min_support=args.min_support,
        max_nodes=args.max_nodes,
        model=args.model,
        fraction=args.fraction,
        seed=args.seed,
    )
    smap = load_store(args.store)
    attach_labels(smap, load_labels(args.labels))
    candidates = _sorted_subjects(smap, smap.subjects)
    if args.keep:
        keep = load_keep(args.keep)
        candidates = [sid for sid in candidates if smap.dct.n3(sid) in keep]
    report: dict = {"config": cfg, "initial_subjects": len(candidates)}

    if args.min_support is not None:
        candidates, support_report = batching.filter_min_support(
            smap, args.min_support, candidates
        )
        report["min_support"] = vars(support_report)
    if args.max_nodes is not None:
        if not args.model:
            raise ValueError("--max-nodes needs --model to size subgraphs")
        before = len(candidates)
        candidates = batching.filter_subgraph_size(
            smap, SummaryModel(args.model), args.max_nodes, candidates
        )
        report["max_nodes"] = {
            "threshold": args.max_nodes,
            "subjects_before": before,
            "subjects_after": len(candidates),
        }
    if args.fraction is not None:
        before = len(candidates)
        candidates = batching.subsample_fraction(
            smap, args.fraction, args.seed, candidates
        )
        report["fraction"] = {
            "fraction": args.fraction,
            "subjects_before": before,
            "subjects_after": len(candidates),
        }

    _write_tsv(args.out, [_escape(smap.dct.n3(sid)) for sid in candidates], cfg)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"filter kept={len(candidates)}")
    return 0


def _role_folds(role: str, folds: int, test_fold: int, val_fold: int) -> set[int]:
    if role == "test":
        return {test_fold}
    if role == "val":
        return {val_fold}
    return set(range(folds)) - {test_fold, val_fold}


def _prepare_sampling(args, smap: SubjectMap):
    attach_labels(smap, load_labels(args.labels))
    attach_folds(smap, load_folds(args.folds_file))
    candidates = _sorted_subjects(smap, smap.subjects)
    if args.keep:
        keep = load_keep(args.keep)
        candidates = [sid for sid in candidates if smap.dct.n3(sid) in keep]
    candidates = [sid for sid in candidates if smap.subjects[sid].label is not None]
    label_map = batching.build_label_map(smap, candidates)
    return candidates, label_map


def _role_sampler_weights(weights_mode, smap, candidates, role_folds, train_folds):
    role_candidates = [
        sid for sid in candidates if smap.subjects[sid].fold in role_folds
    ]
    if weights_mode == "inverse" and role_folds == train_folds:
        train_candidates = [
            sid for sid in candidates if smap.subjects[sid].fold in train_folds
        ]
        weights = batching.inverse_class_weights(smap, train_candidates)
    else:
        # evaluation folds are always drawn uniformly
        weights = None
    return role_candidates, weights


def cmd_sample(args) -> int:
    cfg = config_hash(
        cmd="sample",
        model=args.model,
        fold_role=args.fold_role,
        test_fold=args.test_fold,
        val_fold=args.val_fold,
        count=args.count,
        guard=args.guard,
        weights=args.weights,
        seed=args.seed,
    )
    smap = load_store(args.store)
    candidates, label_map = _prepare_sampling(args, smap)
    n_folds = max(max((si.fold or 0) for si in smap.subjects.values()) + 1, 2)
    role_folds = _role_folds(args.fold_role, n_folds, args.test_fold, args.val_fold)
    train_folds = _role_folds("train", n_folds, args.test_fold, args.val_fold)
    role_candidates, weights = _role_sampler_weights(
        args.weights, smap, candidates, role_folds, train_folds
    )
    sampler = batching.BatchSampler(
        role_candidates,
        SummaryModel(args.model),
        smap,
        label_map,
        args.guard,
        np.random.default_rng(args.seed),
        weights,
    )
    batching.export_batches(
        args.out,
        sampler,
        args.count,
        manifest_extra={
            "seed": args.seed,
            "fold_role": args.fold_role,
            "fold_roles": {
                "train": sorted(train_folds),
                "val": [args.val_fold],
                "test": [args.test_fold],
            },
            "weights": args.weights,
        },
        config_hash=cfg,
    )
    print(
        f"sampled role={args.fold_role} batches={args.count} guard={args.guard} "
        f"subjects={len(role_candidates)} classes={len(label_map)}"
    )
    return 0


def cmd_export_cv(args) -> int:
    smap = load_store(args.store)
    candidates, label_map = _prepare_sampling(args, smap)
    n_folds = max(max((si.fold or 0) for si in smap.subjects.values()) + 1, 2)
    if args.rotations > n_folds:
        raise ValueError(f"{args.rotations} rotations but only {n_folds} folds")
    counts = {"train": args.train_count, "val": args.val_count, "test": args.test_count}
    for rotation in range(args.rotations):
        test_fold = rotation
        val_fold = (rotation + 1) % n_folds
        for role_idx, role in enumerate(("train", "val", "test")):
            cfg = config_hash(
                cmd="export-cv",
                model=args.model,
                rotation=rotation,
                role=role,
                count=counts[role],
                guard=args.guard,
                weights=args.weights,
                seed=args.seed,
            )
            role_folds = _role_folds(role, n_folds, test_fold, val_fold)
            train_folds = _role_folds("train", n_folds, test_fold, val_fold)
            role_candidates, weights = _role_sampler_weights(
                args.weights, smap, candidates, role_folds, train_folds
            )
            sampler = batching.BatchSampler(
                role_candidates,
                SummaryModel(args.model),
                smap,
                label_map,
                args.guard,
                np.random.default_rng((args.seed, rotation, role_idx)),
                weights,
            )
            out_dir = os.path.join(args.out, f"rotation-{rotation:02d}", role)
            batching.export_batches(
                out_dir,
                sampler,
                counts[role],
                manifest_extra={
                    "seed": args.seed,
                    "fold_role": role,
                    "rotation": rotation,
                    "fold_roles": {
                        "train": sorted(train_folds),
                        "val": [val_fold],
                        "test": [test_fold],
                    },
                    "weights": args.weights,
                },
                config_hash=cfg,
            )
    print(f"exported {args.rotations} rotations to {args.out}")
    return 0


def cmd_bloom_eval(args) -> int:
    smap = load_store(args.store)
    labels = load_labels(args.labels)
    attach_labels(smap, labels)
    truth = {
        smap.dct.n3(sid): smap.subjects[sid].label for sid in smap.subjects
    }
    model = SummaryModel(args.model)
    ns = args.n or list(bloom.PRESET_N)
    ps = args.p or list(bloom.PRESET_P)
    cfg = config_hash(
        cmd="bloom-eval", model=args.model, n=ns, p=ps, sx_flat=args.sx_flat
    )
    rows = ["n\tp\tk\tm\taccuracy\tgini_impurity"]
    summary_lines = []
    for n, p in sorted(itertools.product(ns, ps)):
        params = bloom.params_from(n, p)
        assignment = bloom.bloom_summarize(model, smap, params, sx_flat=args.sx_flat)
        pred = {smap.dct.n3(sid): label for sid, label in assignment.items()}
        report = metrics.evaluate(pred, truth)
        rows.append(
            f"{n}\t{p:g}\t{params.k}\t{params.m}\t{report.accuracy:.12g}\t{report.gini:.12g}"
        )
        summary_lines.append(
            f"bloom n={n} p={p:g} k={params.k} m={params.m} "
            f"accuracy={report.accuracy:.4f} gini={report.gini:.4f}"
        )
    _write_tsv(args.out, rows, cfg)
    for line in summary_lines:
        print(line)
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sumgraph",
        description="equivalence-class graph summaries, Bloom summarizer, batch exporter",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and dictionary-encode input files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True, help="store directory")
    p.add_argument("--strict", action="store_true", help="abort on malformed lines")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("summarize", help="compute equivalence classes per subject")
    p.add_argument("--store", required=True)
    p.add_argument("--model", required=True, choices=[m.value for m in SummaryModel])
    p.add_argument("--sx-multiset", action="store_true",
                   help="keep duplicate neighbor signatures in the SX feature list")
    p.add_argument("--out", required=True, help="labels TSV")
    p.add_argument("--histogram", help="class histogram TSV")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("stats", help="class distribution statistics of a labeling")
    p.add_argument("--labels", required=True)
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--out", required=True)
    p.add_argument("--histogram", help="(rank, probability) series TSV")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="assign subjects to folds")
    p.add_argument("--store", required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="folds TSV")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("filter", help="min-support / subgraph-size / fraction filters")
    p.add_argument("--store", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--keep", help="restrict to subjects listed in this file")
    p.add_argument("--min-support", type=int)
    p.add_argument("--max-nodes", type=int)
    p.add_argument("--model", choices=[m.value for m in SummaryModel])
    p.add_argument("--fraction", type=float)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="kept-subject list")
    p.add_argument("--report", help="filter report JSON")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("sample", help="export mini-batches for one fold role")
    p.add_argument("--store", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--folds-file", required=True)
    p.add_argument("--keep")
    p.add_argument("--model", required=True, choices=[m.value for m in SummaryModel])
    p.add_argument("--fold-role", required=True, choices=["train", "val", "test"])
    p.add_argument("--test-fold", type=int, default=9)
    p.add_argument("--val-fold", type=int, default=8)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--guard", type=int, default=500)
    p.add_argument("--weights", choices=["inverse", "uniform"], default="inverse")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="batch directory")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("export-cv", help="export train/val/test batches for every rotation")
    p.add_argument("--store", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--folds-file", required=True)
    p.add_argument("--keep")
    p.add_argument("--model", required=True, choices=[m.value for m in SummaryModel])
    p.add_argument("--rotations", type=int, default=10)
    p.add_argument("--train-count", type=int, default=100)
    p.add_argument("--val-count", type=int, default=15)
    p.add_argument("--test-count", type=int, default=75)
    p.add_argument("--guard", type=int, default=500)
    p.add_argument("--weights", choices=["inverse", "uniform"], default="inverse")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_cv)

    p = sub.add_parser("bloom-eval", help="accuracy/impurity of the Bloom summarizer")
    p.add_argument("--store", required=True)
    p.add_argument("--labels", required=True, help="ground-truth labels TSV")
    p.add_argument("--model", required=True, choices=[m.value for m in SummaryModel])
    p.add_argument("--n", type=int, action="append",
                   help="expected insertions; repeatable (default presets 4, 15, 60)")
    p.add_argument("--p", type=float, action="append",
                   help="false positive rate; repeatable (default presets 1e-1, 1e-3, 1e-7)")
    p.add_argument("--sx-flat", action="store_true",
                   help="insert raw neighbor type IRIs instead of neighbor signatures")
    p.add_argument("--out", required=True, help="report TSV")
    p.set_defaults(func=cmd_bloom_eval)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single reporting point for the CLI
        print(f"SUMGRAPH-ERROR\t{type(exc).__name__}\t{exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
