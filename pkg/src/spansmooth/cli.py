"""Command-line surface.

Subcommands: ``smooth`` (dump start/end target distributions as CSV),
``schedule`` (dump an epoch/epsilon table), ``train`` (multi-seed training
runs over synthetic or file data), ``eval`` (score a predictions file), and
``bench`` (time the fast F1-score path against the brute-force oracle).

Exit codes: 0 success, 2 usage or validation error, 3 runtime failure.
Every output file embeds the resolved configuration: JSON outputs under a
top-level "config" key, CSV outputs as a leading ``# config: ...`` comment.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from .core import Span
from .data import (
    SyntheticConfig,
    generate_synthetic,
    parse_hotpot_json,
    read_examples_jsonl,
)
from .losses import LossWeights
from .metrics import aggregate_metrics
from .pipeline import LOG_FIELDS, TrainConfig, TrainingDiverged, train
from .schedule import ScheduleConfig, schedule_table
from .smoothing import (
    SmoothingMethod,
    f1_end_scores,
    f1_end_scores_brute,
    f1_start_scores,
    f1_start_scores_brute,
    smoothing_table,
    write_distribution_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3

ORACLE_TOL = 1e-9


def _fail(message: str, code: int = EXIT_USAGE) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


# ---------------------------------------------------------------------------
# smooth
# ---------------------------------------------------------------------------


def cmd_smooth(args) -> int:
    if not (0 <= args.gold_start <= args.gold_end < args.length):
        return _fail(
            f"gold span ({args.gold_start}, {args.gold_end}) invalid for length {args.length}"
        )
    try:
        method = SmoothingMethod(kind=args.method, epsilon=args.epsilon)
        gold = Span(args.gold_start, args.gold_end)
        table = smoothing_table(method, args.length, gold)
    except ValueError as exc:
        return _fail(str(exc))
    config = {
        "command": "smooth",
        "length": args.length,
        "gold_start": args.gold_start,
        "gold_end": args.gold_end,
        "method": args.method,
        "epsilon": args.epsilon,
        "out": str(args.out),
    }
    write_distribution_csv(args.out, table, config)
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# schedule
# ---------------------------------------------------------------------------


def _schedule_config(kind: str, epsilon0: float, tau: float, stage1: int, epochs: int) -> ScheduleConfig:
    # only the kind-relevant knobs participate; the others keep their
    # neutral defaults so e.g. --stage1 does not constrain a linear run
    return ScheduleConfig(
        kind=kind,
        epsilon0=epsilon0,
        tau=tau if kind == "linear_decay" else 0.0,
        stage1_epochs=stage1 if kind == "two_stage" else 0,
        n_epochs=epochs,
    )


def cmd_schedule(args) -> int:
    try:
        config = _schedule_config(args.kind, args.epsilon0, args.tau, args.stage1, args.epochs)
        rows = schedule_table(config)
    except ValueError as exc:
        return _fail(str(exc))
    resolved = {
        "command": "schedule",
        "kind": args.kind,
        "epsilon0": args.epsilon0,
        "tau": args.tau,
        "stage1": args.stage1,
        "epochs": args.epochs,
        "out": str(args.out),
    }
    with open(args.out, "w") as fh:
        fh.write(f"# config: {json.dumps(resolved, sort_keys=True)}\n")
        fh.write("epoch,epsilon\n")
        for epoch, eps in rows:
            fh.write(f"{epoch},{eps!r}\n")
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------


def _load_examples(path: Path):
    text = path.read_text()
    if text.lstrip().startswith("["):
        return list(parse_hotpot_json(text).examples)
    return list(read_examples_jsonl(path))


def _resolve_train_data(args):
    if args.data == "synthetic":
        config = SyntheticConfig(
            n_examples=args.n_train,
            n_dev=args.n_dev,
            vocab_size=args.vocab_size,
            docs_per_example=args.docs,
            sentences_per_doc=args.sentences_per_doc,
            tokens_per_sentence=args.tokens_per_sentence,
            quantifier_noise_p=args.quantifier_noise_p,
            alt_path_p=args.alt_path_p,
            yes_no_p=args.yes_no_p,
            seed=args.data_seed,
        )
        return generate_synthetic(config)
    train_examples = _load_examples(Path(args.data))
    if not args.dev_data:
        raise ValueError("--dev-data is required when --data is a file")
    dev_examples = _load_examples(Path(args.dev_data))
    return train_examples, dev_examples


def _train_config(args, seed: int) -> TrainConfig:
    schedule = _schedule_config(args.schedule, args.epsilon0, args.tau, args.stage1, args.epochs)
    return TrainConfig(
        seed=seed,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        weight_decay=args.weight_decay,
        k_docs=args.k,
        embedding_dim=args.embedding_dim,
        max_answer_len=args.max_answer_len,
        smoothing=SmoothingMethod(kind=args.method, epsilon=args.epsilon0),
        schedule=schedule,
        loss_weights=LossWeights(args.lambda1, args.lambda2, args.lambda3, args.lambda4, args.lambda5),
        smooth_binary=args.smooth_binary,
    )


def _write_log(path: Path, records) -> None:
    with open(path, "w") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True))
            fh.write("\n")


def cmd_train(args) -> int:
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        if not seeds:
            return _fail("--seeds must list at least one seed")
        train_examples, dev_examples = _resolve_train_data(args)
        configs = {seed: _train_config(args, seed) for seed in seeds}
    except (ValueError, OSError) as exc:
        return _fail(str(exc))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    resolved = {
        "command": "train",
        "seeds": seeds,
        "data": args.data,
        "dev_data": args.dev_data,
        "n_train": len(train_examples),
        "n_dev": len(dev_examples),
        "quantifier_noise_p": args.quantifier_noise_p,
        "alt_path_p": args.alt_path_p,
        "yes_no_p": args.yes_no_p,
        "data_seed": args.data_seed,
        "method": args.method,
        "epsilon0": args.epsilon0,
        "schedule": args.schedule,
        "tau": args.tau,
        "stage1": args.stage1,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "lr": args.lr,
        "weight_decay": args.weight_decay,
        "k": args.k,
        "embedding_dim": args.embedding_dim,
        "max_answer_len": args.max_answer_len,
        "smooth_binary": args.smooth_binary,
        "loss_weights": [args.lambda1, args.lambda2, args.lambda3, args.lambda4, args.lambda5],
        "out": str(out_dir),
    }

    per_seed = {}
    dev_fields = LOG_FIELDS[7:]
    for seed in seeds:
        log_path = out_dir / f"log_seed{seed}.jsonl"
        try:
            result = train(train_examples, configs[seed], dev=dev_examples)
        except TrainingDiverged as exc:
            _write_log(log_path, getattr(exc, "partial_log", []))
            return _fail(f"seed {seed}: {exc} (partial log in {log_path})", EXIT_RUNTIME)
        _write_log(log_path, result.log)
        final = result.log[-1]
        per_seed[str(seed)] = {
            "final": {k: final[k] for k in dev_fields},
            "refine_skipped": result.refine_skipped,
            "log": log_path.name,
        }
        print(f"seed {seed}: dev_answer_f1={final['dev_answer_f1']:.4f}")

    summary = {
        "config": resolved,
        "per_seed": per_seed,
        "mean": {
            k: sum(per_seed[str(s)]["final"][k] for s in seeds) / len(seeds) for k in dev_fields
        },
    }
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    print(f"wrote {summary_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    try:
        predictions = json.loads(Path(args.predictions).read_text())
        gold_examples = _load_examples(Path(args.gold))
    except (ValueError, OSError) as exc:
        return _fail(str(exc))

    gold_ids = [ex.id for ex in gold_examples]
    missing = [i for i in gold_ids if i not in predictions]
    extra = [i for i in predictions if i not in set(gold_ids)]
    if missing or extra:
        return _fail(
            f"prediction/gold id mismatch (missing {len(missing)}, unexpected {len(extra)}): "
            f"{(missing + extra)[:5]}"
        )

    records = []
    for ex in gold_examples:
        pred = predictions[ex.id]
        records.append(
            (
                pred.get("answer", ""),
                ex.answer_text,
                set(pred.get("docs", [])),
                ex.gold_doc_titles(),
                {(title, int(idx)) for title, idx in pred.get("sup", [])},
                ex.supporting_ids(),
            )
        )
    report = aggregate_metrics(records)
    payload = {
        "config": {
            "command": "eval",
            "predictions": str(args.predictions),
            "gold": str(args.gold),
            "out": str(args.out),
        },
        **json.loads(report.to_json()),
    }
    Path(args.out).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _bench_gold(length: int) -> Span:
    start = length // 3
    return Span(start, min(length - 1, start + 4))


def _median_ns(fn, reps: int) -> int:
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - t0)
    return int(statistics.median(samples))


def cmd_bench(args) -> int:
    try:
        lengths = [int(x) for x in args.lengths.split(",") if x.strip()]
    except ValueError as exc:
        return _fail(str(exc))
    if not lengths or any(x < 1 for x in lengths):
        return _fail("--lengths must list positive integers")
    if args.reps < 1:
        return _fail("--reps must be >= 1")

    rows = []
    for length in lengths:
        gold = _bench_gold(length)
        for fast, brute in (
            (f1_start_scores, f1_start_scores_brute),
            (f1_end_scores, f1_end_scores_brute),
        ):
            gap = np.max(np.abs(fast(length, gold) - brute(length, gold)))
            if gap > ORACLE_TOL:
                return _fail(
                    f"fast/brute mismatch at L={length}: max abs diff {gap!r}", EXIT_RUNTIME
                )
        brute_ns = _median_ns(
            lambda: (f1_start_scores_brute(length, gold), f1_end_scores_brute(length, gold)),
            args.reps,
        )
        fast_ns = _median_ns(
            lambda: (f1_start_scores(length, gold), f1_end_scores(length, gold)), args.reps
        )
        rows.append((length, brute_ns, fast_ns, brute_ns / fast_ns))

    resolved = {
        "command": "bench",
        "lengths": lengths,
        "reps": args.reps,
        "out": str(args.out),
    }
    with open(args.out, "w") as fh:
        fh.write(f"# config: {json.dumps(resolved, sort_keys=True)}\n")
        fh.write("L,brute_ns,fast_ns,speedup\n")
        for length, brute_ns, fast_ns, speedup in rows:
            fh.write(f"{length},{brute_ns},{fast_ns},{speedup:.3f}\n")
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spansmooth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("smooth", help="dump start/end smoothing distributions as CSV")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--gold-start", type=int, required=True)
    p.add_argument("--gold-end", type=int, required=True)
    p.add_argument("--method", choices=("uniform", "word_overlap", "f1"), required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("schedule", help="dump an epoch,epsilon schedule table as CSV")
    p.add_argument("--kind", choices=("constant", "two_stage", "linear_decay"), required=True)
    p.add_argument("--epsilon0", type=float, default=0.1)
    p.add_argument("--tau", type=float, default=0.01)
    p.add_argument("--stage1", type=int, default=4)
    p.add_argument("--epochs", type=int, default=16)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("train", help="run multi-seed training experiments")
    p.add_argument("--data", default="synthetic", help="'synthetic' or a dataset file path")
    p.add_argument("--dev-data", default=None, help="dev dataset path (file data only)")
    p.add_argument("--n-train", type=int, default=512)
    p.add_argument("--n-dev", type=int, default=128)
    p.add_argument("--vocab-size", type=int, default=64)
    p.add_argument("--docs", type=int, default=10)
    p.add_argument("--sentences-per-doc", type=int, default=3)
    p.add_argument("--tokens-per-sentence", type=int, default=8)
    p.add_argument("--quantifier-noise-p", type=float, default=0.0)
    p.add_argument("--alt-path-p", type=float, default=0.0)
    p.add_argument("--yes-no-p", type=float, default=0.0)
    p.add_argument("--data-seed", type=int, default=7)
    p.add_argument("--method", choices=("one_hot", "uniform", "word_overlap", "f1"), default="f1")
    p.add_argument("--epsilon0", type=float, default=0.1)
    p.add_argument("--schedule", choices=("constant", "two_stage", "linear_decay"), default="linear_decay")
    p.add_argument("--tau", type=float, default=0.01)
    p.add_argument("--stage1", type=int, default=4)
    p.add_argument("--epochs", type=int, default=16)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--embedding-dim", type=int, default=32)
    p.add_argument("--max-answer-len", type=int, default=4)
    p.add_argument("--smooth-binary", action="store_true")
    p.add_argument("--lambda1", type=float, default=1.0)
    p.add_argument("--lambda2", type=float, default=1.0)
    p.add_argument("--lambda3", type=float, default=1.0)
    p.add_argument("--lambda4", type=float, default=1.0)
    p.add_argument("--lambda5", type=float, default=1.0)
    p.add_argument("--seeds", default="41,42,43,44")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a predictions file against gold data")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time fast vs brute-force smoothing scores")
    p.add_argument("--lengths", default="64,128,256,512")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
