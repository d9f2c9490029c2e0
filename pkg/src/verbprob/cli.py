"""Command-line entry points.

Exit codes: 0 success, 2 input/format error, 3 numerical failure during
training, 4 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import stats
from .annotations import (
    aggregate,
    load_aggregated,
    load_records,
    majority_vote,
    to_one_hot,
    write_aggregated,
    write_records,
)
from .errors import ConfigError, InputFormatError, TrainingDivergedError
from .metrics import accuracy_classification, alpha_sweep, per_verb_error
from .model import (
    TrainConfig,
    load_checkpoint,
    load_features,
    load_predictions,
    predict_matrix,
    save_checkpoint,
    train,
    write_features,
    write_predictions,
)
from .pipeline import (
    ExperimentConfig,
    ExperimentReport,
    emit_reports,
    run_experiment,
    sweep_rows,
)
from .synthetic import SynthConfig, generate, synthetic_vocabulary, write_truth
from .vocab import load_vocabulary, save_vocabulary

DEFAULT_ALPHA_SPEC = "0.1:0.9:0.1"


def parse_alphas(spec: str) -> tuple[float, ...]:
    """Either a comma list ("0.1,0.5") or an inclusive start:stop:step range."""
    try:
        if ":" in spec:
            start, stop, step = (float(v) for v in spec.split(":"))
            if step <= 0 or stop < start:
                raise ValueError("range must satisfy start <= stop with positive step")
            count = int(round((stop - start) / step)) + 1
            values = tuple(round(start + i * step, 10) for i in range(count))
        else:
            values = tuple(float(v) for v in spec.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --alpha {spec!r}: {exc}") from None
    if not values:
        raise ConfigError("empty --alpha list")
    for v in values:
        if not 0.0 < v < 1.0:
            raise ConfigError(f"alpha {v} outside (0, 1)")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("alphas must be strictly increasing")
    return values


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--loss", choices=["euclidean", "logistic-onehot"], default="euclidean")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--weight-decay", type=float, default=0.0005)
    p.add_argument("--arch", choices=["linear", "hidden"], default="linear")
    p.add_argument("--hidden-units", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="verbprob",
        description="Crowd multi-verb annotations: aggregation, training and set-retrieval evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("aggregate", help="records -> per-video probability table")
    p.add_argument("--vocab", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("stats", help="annotation statistics and co-occurrence tables")
    p.add_argument("--vocab", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top-pairs", type=int, default=40)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="generate a synthetic corpus with known truth")
    p.add_argument("--out", required=True)
    p.add_argument("--vocab", help="existing vocabulary file (default: generate one)")
    p.add_argument("--verbs", type=int, default=90, help="generated vocabulary size")
    p.add_argument("--classes", type=int, default=20)
    p.add_argument("--videos", type=int, default=600)
    p.add_argument("--workers-min", type=int, default=30)
    p.add_argument("--workers-max", type=int, default=50)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--sparsity", type=int, default=5)
    p.add_argument("--tag", default="synthetic")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="fit a model to aggregated labels")
    p.add_argument("--vocab", required=True)
    p.add_argument("--labels", required=True, help="aggregated probability table")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write clamped model outputs for a feature table")
    p.add_argument("--vocab", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="predictions csv path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="metrics for a prediction table against labels")
    p.add_argument("--vocab", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--labels", required=True, help="aggregated probability table")
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", default=DEFAULT_ALPHA_SPEC)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("crossval", help="full stratified cross-validated comparison")
    p.add_argument("--vocab", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--alpha", default=DEFAULT_ALPHA_SPEC)
    p.add_argument("--summary-alpha", type=float, default=0.5)
    p.add_argument("--cooc-alpha", type=float, default=0.5)
    p.add_argument("--top-pairs", type=int, default=40)
    p.add_argument("--baseline-lr", type=float, default=None,
                   help="override --lr for the one-hot baseline")
    _add_train_flags(p)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("report", help="re-emit human-readable views from report.json")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def _loss_name(flag: str) -> str:
    return flag.replace("-", "_")


def cmd_aggregate(args: argparse.Namespace) -> int:
    vocab = load_vocabulary(args.vocab)
    records, meta = load_records(args.records, vocab)
    annotations = aggregate(records, vocab, meta)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_aggregated(out / "aggregated.csv", annotations, vocab)
    print(f"aggregated {len(annotations)} videos from {len(records)} records")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    if args.top_pairs <= 0:
        raise ConfigError("--top-pairs must be positive")
    vocab = load_vocabulary(args.vocab)
    records, meta = load_records(args.records, vocab)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    tag_of = {v: m.dataset_tag for v, m in meta.items()}
    tags = sorted({tag_of.get(r.video_id, "") for r in records})
    by_tag = {tag: [r for r in records if tag_of.get(r.video_id, "") == tag] for tag in tags}
    matrices = [stats.cooccurrence_from_records(by_tag[tag], vocab, tag) for tag in tags]
    for matrix in matrices:
        name = f"cooccurrence_{matrix.dataset_tag or 'all'}.csv"
        stats.write_cooccurrence_csv(out / name, matrix, vocab)
    pairs = stats.top_symmetric_pairs(matrices, args.top_pairs)
    stats.write_top_pairs_csv(out / "top_pairs.csv", pairs, vocab, tags)

    by_class: dict[str, list] = {}
    class_tag: dict[str, str] = {}
    for rec in records:
        m = meta.get(rec.video_id)
        label = m.class_label if m else ""
        by_class.setdefault(label, []).append(rec)
        class_tag[label] = m.dataset_tag if m else ""
    stats.write_class_summary_csv(
        out / "class_summary.csv",
        stats.verbs_per_annotator(by_class),
        stats.unique_verbs_per_class(by_class),
        class_tag,
    )
    print(f"wrote statistics for {len(records)} records across {len(tags)} dataset tags")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.vocab:
        vocab = load_vocabulary(args.vocab)
    else:
        vocab = synthetic_vocabulary(args.verbs)
        save_vocabulary(out / "vocab.txt", vocab)
    config = SynthConfig(
        n_classes=args.classes,
        n_videos=args.videos,
        n_workers_min=args.workers_min,
        n_workers_max=args.workers_max,
        feature_dim=args.dim,
        feature_noise_sigma=args.noise,
        profile_sparsity=args.sparsity,
        seed=args.seed,
    )
    corpus = generate(config, vocab, dataset_tag=args.tag)
    write_records(out / "records.jsonl", corpus.records, vocab, corpus.video_meta)
    write_features(out / "features.csv", corpus.features)
    write_truth(out / "truth.json", corpus.truth, config)
    print(f"generated {len(corpus.features)} videos / {len(corpus.records)} records")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    vocab = load_vocabulary(args.vocab)
    annotations = load_aggregated(args.labels, vocab)
    features = load_features(args.features)
    missing = [a.video_id for a in annotations if a.video_id not in features]
    if missing:
        raise InputFormatError(f"no features for {len(missing)} videos (first: {missing[0]!r})")

    x = np.vstack([features[a.video_id] for a in annotations])
    loss = _loss_name(args.loss)
    if loss == "logistic_onehot":
        y = np.vstack([to_one_hot(majority_vote(a), vocab) for a in annotations])
    else:
        y = np.vstack([a.distribution for a in annotations])

    config = TrainConfig(
        loss=loss,
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        momentum=args.momentum,
        weight_decay=args.weight_decay,
        seed=args.seed,
    )
    config.validate()
    result = train(
        x, y, config,
        arch=args.arch,
        hidden_units=args.hidden_units if args.arch == "hidden" else 0,
    )
    save_checkpoint(args.out, result.params, vocab.content_hash, config)
    print(
        f"trained {args.arch} model on {x.shape[0]} videos; "
        f"loss {result.loss_trace[0]:.4f} -> {result.loss_trace[-1]:.4f}"
    )
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    vocab = load_vocabulary(args.vocab)
    params, meta = load_checkpoint(args.model)
    if meta.get("vocab_hash") and meta["vocab_hash"] != vocab.content_hash:
        raise InputFormatError(
            "checkpoint was trained against a different vocabulary "
            f"(hash {meta['vocab_hash'][:12]} != {vocab.content_hash[:12]})"
        )
    features = load_features(args.features)
    ids = list(features)
    matrix = predict_matrix(params, np.vstack([features[v] for v in ids]))
    write_predictions(args.out, ids, matrix, list(vocab))
    print(f"wrote predictions for {len(ids)} videos")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    alphas = parse_alphas(args.alpha)
    vocab = load_vocabulary(args.vocab)
    annotations = load_aggregated(args.labels, vocab)
    predictions = load_predictions(args.predictions, list(vocab))
    missing = [a.video_id for a in annotations if a.video_id not in predictions]
    if missing:
        raise InputFormatError(
            f"predictions missing for {len(missing)} labelled videos (first: {missing[0]!r})"
        )
    ids = [a.video_id for a in annotations]
    pred = np.vstack([predictions[v] for v in ids])
    dist = np.vstack([a.distribution for a in annotations])
    onehot = np.vstack([to_one_hot(majority_vote(a), vocab) for a in annotations])

    sweep = alpha_sweep(pred, dist, alphas, ids)
    payload = {
        "accuracy_classification": accuracy_classification(pred, onehot),
        "sweep": sweep_rows(sweep, include_scores=True),
        "per_verb_error": [
            {"verb": vocab[e.verb], "mean": e.mean, "median": e.median, "q1": e.q1, "q3": e.q3}
            for e in per_verb_error(pred, dist)
        ],
        "n_videos": len(ids),
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "evaluation.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(f"argmax accuracy {payload['accuracy_classification']:.3f} over {len(ids)} videos")
    return 0


def cmd_crossval(args: argparse.Namespace) -> int:
    alphas = parse_alphas(args.alpha)
    vocab = load_vocabulary(args.vocab)
    records, meta = load_records(args.records, vocab)
    features = load_features(args.features)
    config = ExperimentConfig(
        n_folds=args.folds,
        seed=args.seed,
        alphas=alphas,
        summary_alpha=args.summary_alpha,
        arch=args.arch,
        hidden_units=args.hidden_units if args.arch == "hidden" else 0,
        learning_rate=args.lr,
        baseline_learning_rate=args.baseline_lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        momentum=args.momentum,
        weight_decay=args.weight_decay,
        top_pairs=args.top_pairs,
        cooccurrence_alpha=args.cooc_alpha,
    )
    config.validate()
    report = run_experiment(records, meta, features, vocab, config)
    emit_reports(report, args.out)
    summary = report.overall["summary"]
    print(
        f"set retrieval @ {summary['alpha']:.1f}: "
        f"proposed {_score(summary['proposed_set_retrieval'])} vs "
        f"baseline {_score(summary['baseline_set_retrieval'])}"
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    try:
        text = Path(args.report).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFormatError(f"cannot read {args.report}: {exc}") from exc
    try:
        report = ExperimentReport.from_json(text)
    except (KeyError, json.JSONDecodeError) as exc:
        raise InputFormatError(f"{args.report}: not a valid report ({exc})") from None
    emit_reports(report, args.out)
    print(f"re-emitted report into {args.out}")
    return 0


def _score(value) -> str:
    return "-" if value is None else f"{value:.3f}"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingDivergedError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
