"""Experiment orchestration: stratified cross-validation folds, the
proposed-vs-baseline comparison, and report emission.

For each fold two models are trained on the remaining folds: the proposed
model regresses the aggregated annotation distributions under the
Euclidean loss, while the baseline trains on majority-vote one-hot labels
under the logistic loss.  Both are evaluated on the held-out fold with
the full metrics suite.  Besides per-fold rows, the report carries a
`mean` row (arithmetic mean of the fold rows) and an `overall` row where
per-video scores from all test folds are pooled before averaging.

Everything downstream of the input files is deterministic for a fixed
seed; structured outputs are byte-stable across re-runs.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import stats
from .annotations import (
    AnnotationRecord,
    VideoAnnotation,
    VideoMeta,
    aggregate,
    majority_vote,
    to_one_hot,
)
from .errors import ConfigError, InputFormatError
from .metrics import (
    DEFAULT_ALPHAS,
    AlphaSweep,
    accuracy_classification,
    accuracy_probabilistic,
    alpha_sweep,
    per_verb_error,
)
from .model import TrainConfig, predict_matrix, train
from .vocab import VerbVocabulary

REPORT_VERSION = 1


@dataclass
class FoldAssignment:
    """Maps every video to the single fold where it is held out for testing."""

    n_folds: int
    fold_of: dict[str, int]

    def test_ids(self, fold: int) -> list[str]:
        return sorted(v for v, f in self.fold_of.items() if f == fold)

    def train_ids(self, fold: int) -> list[str]:
        return sorted(v for v, f in self.fold_of.items() if f != fold)


@dataclass(frozen=True)
class ExperimentConfig:
    n_folds: int = 5
    seed: int = 0
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    summary_alpha: float = 0.5
    arch: str = "linear"
    hidden_units: int = 0
    learning_rate: float = 1e-3
    baseline_learning_rate: float | None = None  # defaults to learning_rate
    epochs: int = 10
    batch_size: int = 128
    momentum: float = 0.9
    weight_decay: float = 0.0005
    top_pairs: int = 40
    cooccurrence_alpha: float = 0.5

    def validate(self) -> None:
        if self.n_folds < 2:
            raise ConfigError("n_folds must be at least 2")
        if not 0.0 < self.summary_alpha < 1.0:
            raise ConfigError("summary_alpha must be in (0, 1)")
        if not 0.0 < self.cooccurrence_alpha < 1.0:
            raise ConfigError("cooccurrence_alpha must be in (0, 1)")
        if self.top_pairs <= 0:
            raise ConfigError("top_pairs must be positive")
        # the optimiser fields share TrainConfig's domain
        self.train_config("euclidean", 0).validate()

    def train_config(self, loss: str, fold: int) -> TrainConfig:
        lr = self.learning_rate
        if loss == "logistic_onehot" and self.baseline_learning_rate is not None:
            lr = self.baseline_learning_rate
        # fold-derived seed keeps folds decorrelated but reproducible
        return TrainConfig(
            loss=loss,
            learning_rate=lr,
            epochs=self.epochs,
            batch_size=self.batch_size,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
            seed=self.seed + fold,
        )


@dataclass
class ExperimentReport:
    config: dict
    vocab_hash: str
    n_videos: int
    fold_rows: list[dict]
    mean_row: dict
    overall: dict
    annotation_stats: dict

    def to_json_dict(self) -> dict:
        return {
            "format_version": REPORT_VERSION,
            "config": self.config,
            "vocab_hash": self.vocab_hash,
            "n_videos": self.n_videos,
            "folds": self.fold_rows,
            "mean": self.mean_row,
            "overall": self.overall,
            "annotation_stats": self.annotation_stats,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        payload = json.loads(text)
        if payload.get("format_version") != REPORT_VERSION:
            raise InputFormatError("unsupported report version")
        return cls(
            config=payload["config"],
            vocab_hash=payload["vocab_hash"],
            n_videos=payload["n_videos"],
            fold_rows=payload["folds"],
            mean_row=payload["mean"],
            overall=payload["overall"],
            annotation_stats=payload["annotation_stats"],
        )


def benchmark_experiment_config() -> ExperimentConfig:
    """Training/evaluation settings paired with the standard benchmark corpus.

    Ten epochs at batch size 128 with momentum 0.9 and weight decay 5e-4;
    the two losses get separate learning rates because the logistic
    gradient carries an extra 1/|vocabulary| factor and needs far larger
    steps than the Euclidean one.
    """
    return ExperimentConfig(
        n_folds=5,
        seed=0,
        learning_rate=0.03,
        baseline_learning_rate=5.0,
        epochs=10,
        batch_size=128,
        momentum=0.9,
        weight_decay=0.0005,
        arch="linear",
    )


def make_folds(class_of: Mapping[str, str], n_folds: int, seed: int) -> FoldAssignment:
    """Stratified assignment: per class, a seeded shuffle then round-robin,
    so per-class fold sizes differ by at most one."""
    if n_folds < 2:
        raise ConfigError("n_folds must be at least 2")
    ids = sorted(class_of)
    if not ids:
        raise InputFormatError("no videos to assign to folds")
    if n_folds > len(ids):
        raise ConfigError(f"n_folds={n_folds} exceeds the {len(ids)} available videos")

    by_class: dict[str, list[str]] = defaultdict(list)
    for video_id in ids:
        by_class[class_of[video_id]].append(video_id)

    rng = np.random.default_rng(seed)
    fold_of: dict[str, int] = {}
    for class_index, label in enumerate(sorted(by_class)):
        members = by_class[label]
        order = rng.permutation(len(members))
        offset = class_index % n_folds  # rotate start so fold totals stay balanced
        for position, member_index in enumerate(order):
            fold_of[members[member_index]] = (offset + position) % n_folds
    return FoldAssignment(n_folds=n_folds, fold_of=fold_of)


def sweep_rows(sweep: AlphaSweep, include_scores: bool = False) -> list[dict]:
    rows = []
    for alpha, result in zip(sweep.alphas, sweep.results):
        if result is None:
            row = {"alpha": alpha, "n_videos": None, "avg_verbs_per_video": None, "accuracy": None}
            if include_scores:
                row["per_video_scores"] = None
        else:
            row = {
                "alpha": alpha,
                "n_videos": result.n_videos_evaluated,
                "avg_verbs_per_video": result.avg_verbs_per_video,
                "accuracy": result.accuracy,
            }
            if include_scores:
                row["per_video_scores"] = dict(result.per_video_scores)
        rows.append(row)
    return rows


def evaluate_predictions(
    predictions: np.ndarray,
    distributions: np.ndarray,
    onehots: np.ndarray,
    video_ids: Sequence[str],
    alphas: Sequence[float],
) -> dict:
    """The shared per-model evaluation block: argmax accuracy plus the sweep."""
    return {
        "accuracy_classification": accuracy_classification(predictions, onehots),
        "sweep": sweep_rows(alpha_sweep(predictions, distributions, alphas, video_ids)),
    }


def _predicted_pairs(
    predictions: np.ndarray,
    video_ids: Sequence[str],
    tags_of: Mapping[str, str],
    vocab: VerbVocabulary,
    alpha: float,
    k: int,
) -> dict:
    """Top co-occurring verb pairs in thresholded predictions, per dataset tag."""
    tags = sorted({tags_of.get(v, "") for v in video_ids})
    matrices = []
    for tag in tags:
        rows = [i for i, v in enumerate(video_ids) if tags_of.get(v, "") == tag]
        sets = stats.binarize_predictions(predictions[rows], alpha)
        matrices.append(stats.cooccurrence_counts(sets, len(vocab), tag))
    pairs = stats.top_symmetric_pairs(matrices, k)
    return {
        "alpha": alpha,
        "dataset_tags": tags,
        "pairs": [
            {
                "verb_i": vocab[p.i],
                "verb_j": vocab[p.j],
                "per_dataset": list(p.per_dataset),
                "combined": p.combined,
            }
            for p in pairs
        ],
    }


def _per_verb_rows(errors: Sequence, vocab: VerbVocabulary) -> list[dict]:
    return [
        {
            "verb": vocab[e.verb],
            "mean": e.mean,
            "median": e.median,
            "q1": e.q1,
            "q3": e.q3,
        }
        for e in errors
    ]


def _annotation_statistics(
    records: Sequence[AnnotationRecord],
    video_meta: Mapping[str, VideoMeta],
    annotations: Sequence[VideoAnnotation],
    vocab: VerbVocabulary,
    k: int,
) -> dict:
    """The corpus statistics block: per-verb counts, per-class summaries and
    top annotated co-occurrences, grouped by dataset tag."""
    tag_of = {v: m.dataset_tag for v, m in video_meta.items()}
    tags = sorted({tag_of.get(rec.video_id, "") for rec in records})
    by_tag: dict[str, list[AnnotationRecord]] = {tag: [] for tag in tags}
    by_class: dict[str, list[AnnotationRecord]] = defaultdict(list)
    class_tag: dict[str, str] = {}
    for rec in records:
        by_tag[tag_of.get(rec.video_id, "")].append(rec)
        meta = video_meta.get(rec.video_id, VideoMeta())
        by_class[meta.class_label].append(rec)
        class_tag[meta.class_label] = meta.dataset_tag

    videos_per_class: dict[str, int] = defaultdict(int)
    for ann in annotations:
        videos_per_class[ann.class_label] += 1

    per_verb_counts = {
        tag: stats.verb_annotation_counts(recs, len(vocab)).tolist()
        for tag, recs in by_tag.items()
    }
    vpa = stats.verbs_per_annotator(by_class)
    unique = stats.unique_verbs_per_class(by_class)
    per_class = [
        {
            "class_label": label,
            "dataset_tag": class_tag.get(label, ""),
            "n_videos": videos_per_class.get(label, 0),
            "n_records": vpa[label].count,
            "unique_verbs": unique[label],
            "verbs_per_annotator": asdict(vpa[label]),
        }
        for label in sorted(by_class)
    ]
    matrices = [stats.cooccurrence_from_records(by_tag[tag], vocab, tag) for tag in tags]
    pairs = stats.top_symmetric_pairs(matrices, k)
    return {
        "per_verb_counts": per_verb_counts,
        "per_class": per_class,
        "top_pairs": {
            "dataset_tags": tags,
            "pairs": [
                {
                    "verb_i": vocab[p.i],
                    "verb_j": vocab[p.j],
                    "per_dataset": list(p.per_dataset),
                    "combined": p.combined,
                }
                for p in pairs
            ],
        },
    }


def _mean_or_none(values: list) -> float | None:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def _mean_sweep(sweeps: list[list[dict]]) -> list[dict]:
    out = []
    for rows in zip(*sweeps):
        out.append(
            {
                "alpha": rows[0]["alpha"],
                "n_videos": _mean_or_none([r["n_videos"] for r in rows]),
                "avg_verbs_per_video": _mean_or_none(
                    [r["avg_verbs_per_video"] for r in rows]
                ),
                "accuracy": _mean_or_none([r["accuracy"] for r in rows]),
            }
        )
    return out


def _mean_of_fold_rows(fold_rows: list[dict]) -> dict:
    """Arithmetic mean of the numeric per-fold results (co-occurrence lists
    are not averaged; see the overall block for pooled pairs)."""
    mean = {
        "n_train": _mean_or_none([r["n_train"] for r in fold_rows]),
        "n_test": _mean_or_none([r["n_test"] for r in fold_rows]),
    }
    for side in ("baseline", "proposed"):
        block = {
            "accuracy_classification": _mean_or_none(
                [r[side]["accuracy_classification"] for r in fold_rows]
            ),
            "final_loss": _mean_or_none([r[side]["final_loss"] for r in fold_rows]),
            "sweep": _mean_sweep([r[side]["sweep"] for r in fold_rows]),
        }
        if "per_verb_error_mean" in fold_rows[0][side]:
            stacked = np.array([r[side]["per_verb_error_mean"] for r in fold_rows])
            block["per_verb_error_mean"] = stacked.mean(axis=0).tolist()
        mean[side] = block
    return mean


def run_experiment(
    records: Sequence[AnnotationRecord],
    video_meta: Mapping[str, VideoMeta],
    features: Mapping[str, np.ndarray],
    vocab: VerbVocabulary,
    config: ExperimentConfig,
) -> ExperimentReport:
    """Aggregate, fold, train both models per fold, evaluate, and assemble
    the full report."""
    config.validate()
    annotations = aggregate(records, vocab, video_meta)
    video_ids = [a.video_id for a in annotations]
    missing = [v for v in video_ids if v not in features]
    if missing:
        raise InputFormatError(
            f"{len(missing)} videos have annotations but no features "
            f"(first: {missing[0]!r})"
        )

    x_all = np.vstack([np.asarray(features[v], dtype=np.float64) for v in video_ids])
    y_dist = np.vstack([a.distribution for a in annotations])
    y_hot = np.vstack([to_one_hot(majority_vote(a), vocab) for a in annotations])
    row_of = {v: i for i, v in enumerate(video_ids)}
    tags_of = {v: m.dataset_tag for v, m in video_meta.items()}

    class_of = {a.video_id: a.class_label for a in annotations}
    folds = make_folds(class_of, config.n_folds, config.seed)

    n = len(video_ids)
    dim = len(vocab)
    pooled_baseline = np.zeros((n, dim))
    pooled_proposed = np.zeros((n, dim))
    fold_rows = []
    for fold in range(config.n_folds):
        train_rows = [row_of[v] for v in folds.train_ids(fold)]
        test_ids = folds.test_ids(fold)
        test_rows = [row_of[v] for v in test_ids]
        if not train_rows or not test_rows:
            raise ConfigError(f"fold {fold} has an empty train or test split")

        proposed = train(
            x_all[train_rows],
            y_dist[train_rows],
            config.train_config("euclidean", fold),
            arch=config.arch,
            hidden_units=config.hidden_units,
        )
        baseline = train(
            x_all[train_rows],
            y_hot[train_rows],
            config.train_config("logistic_onehot", fold),
            arch=config.arch,
            hidden_units=config.hidden_units,
        )
        pred_proposed = predict_matrix(proposed.params, x_all[test_rows])
        pred_baseline = predict_matrix(baseline.params, x_all[test_rows])
        pooled_proposed[test_rows] = pred_proposed
        pooled_baseline[test_rows] = pred_baseline

        proposed_block = evaluate_predictions(
            pred_proposed, y_dist[test_rows], y_hot[test_rows], test_ids, config.alphas
        )
        proposed_block["final_loss"] = proposed.loss_trace[-1]
        proposed_block["per_verb_error_mean"] = [
            e.mean for e in per_verb_error(pred_proposed, y_dist[test_rows])
        ]
        proposed_block["predicted_cooccurrence"] = _predicted_pairs(
            pred_proposed, test_ids, tags_of, vocab,
            config.cooccurrence_alpha, config.top_pairs,
        )
        baseline_block = evaluate_predictions(
            pred_baseline, y_dist[test_rows], y_hot[test_rows], test_ids, config.alphas
        )
        baseline_block["final_loss"] = baseline.loss_trace[-1]
        fold_rows.append(
            {
                "fold": fold,
                "n_train": len(train_rows),
                "n_test": len(test_rows),
                "baseline": baseline_block,
                "proposed": proposed_block,
            }
        )

    overall_proposed = evaluate_predictions(
        pooled_proposed, y_dist, y_hot, video_ids, config.alphas
    )
    overall_proposed["per_verb_error"] = _per_verb_rows(
        per_verb_error(pooled_proposed, y_dist), vocab
    )
    overall_proposed["predicted_cooccurrence"] = _predicted_pairs(
        pooled_proposed, video_ids, tags_of, vocab,
        config.cooccurrence_alpha, config.top_pairs,
    )
    overall_baseline = evaluate_predictions(
        pooled_baseline, y_dist, y_hot, video_ids, config.alphas
    )

    def _at_alpha(block: dict, matrix: np.ndarray) -> dict:
        for row in block["sweep"]:
            if row["alpha"] == config.summary_alpha:
                return row
        # summary alpha not on the sweep grid: evaluate it directly
        sweep = alpha_sweep(matrix, y_dist, [config.summary_alpha], video_ids)
        return sweep_rows(sweep)[0]

    def _scores_at_summary_alpha(matrix: np.ndarray) -> dict[str, float] | None:
        if not np.any(y_dist > config.summary_alpha):
            return None
        result = accuracy_probabilistic(matrix, y_dist, config.summary_alpha, video_ids)
        return dict(result.per_video_scores)

    overall = {
        "baseline": overall_baseline,
        "proposed": overall_proposed,
        "summary": {
            "alpha": config.summary_alpha,
            "baseline_accuracy_classification": overall_baseline["accuracy_classification"],
            "proposed_accuracy_classification": overall_proposed["accuracy_classification"],
            "baseline_set_retrieval": _at_alpha(overall_baseline, pooled_baseline)["accuracy"],
            "proposed_set_retrieval": _at_alpha(overall_proposed, pooled_proposed)["accuracy"],
        },
        "per_video_scores": {
            "alpha": config.summary_alpha,
            "baseline": _scores_at_summary_alpha(pooled_baseline),
            "proposed": _scores_at_summary_alpha(pooled_proposed),
        },
    }

    return ExperimentReport(
        config={
            **asdict(config),
            "alphas": list(config.alphas),
        },
        vocab_hash=vocab.content_hash,
        n_videos=n,
        fold_rows=fold_rows,
        mean_row=_mean_of_fold_rows(fold_rows),
        overall=overall,
        annotation_stats=_annotation_statistics(
            records, video_meta, annotations, vocab, config.top_pairs
        ),
    )


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _render_sweep_table(overall: dict, alphas: list[float]) -> list[str]:
    """Threshold sweep rendered with alphas as columns."""
    base = {row["alpha"]: row for row in overall["baseline"]["sweep"]}
    prop = {row["alpha"]: row for row in overall["proposed"]["sweep"]}

    def line(label: str, values: list[str]) -> str:
        return f"{label:<26}" + "".join(f"{v:>9}" for v in values)

    def num(v, digits=3):
        if v is None:
            return "-"
        return f"{v:.{digits}f}" if isinstance(v, float) else str(v)

    lines = [
        line("alpha", [f"{a:.1f}" for a in alphas]),
        line("videos evaluated", [num(prop[a]["n_videos"]) for a in alphas]),
        line("avg verbs per video", [num(prop[a]["avg_verbs_per_video"], 2) for a in alphas]),
        line("baseline scores", [num(base[a]["accuracy"]) for a in alphas]),
        line("proposed", [num(prop[a]["accuracy"]) for a in alphas]),
    ]
    return lines


def emit_reports(report: ExperimentReport, out_dir: str | Path) -> list[Path]:
    """Write the structured report plus human-readable and CSV views.

    Every structured output is byte-stable for identical inputs; wall-clock
    information goes only to run_info.txt.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputFormatError(f"cannot create output directory {out}: {exc}") from exc

    written = []

    def _emit(name: str, text: str) -> None:
        path = out / name
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise InputFormatError(f"cannot write {path}: {exc}") from exc
        written.append(path)

    _emit("report.json", report.to_json())

    alphas = [row["alpha"] for row in report.overall["proposed"]["sweep"]]
    summary = report.overall["summary"]
    lines = [
        "experiment summary",
        "==================",
        f"videos: {report.n_videos}   folds: {report.config['n_folds']}   "
        f"seed: {report.config['seed']}   vocab: {report.vocab_hash[:12]}",
        "",
        f"argmax accuracy        baseline {summary['baseline_accuracy_classification']:.3f}"
        f"   proposed {summary['proposed_accuracy_classification']:.3f}",
        f"set retrieval @ {summary['alpha']:.1f}    "
        f"baseline {_fmt_score(summary['baseline_set_retrieval'])}"
        f"   proposed {_fmt_score(summary['proposed_set_retrieval'])}",
        "",
        "threshold sweep (pooled test folds)",
        "-----------------------------------",
        *_render_sweep_table(report.overall, alphas),
        "",
        "top predicted co-occurrences "
        f"(alpha={report.overall['proposed']['predicted_cooccurrence']['alpha']}):",
    ]
    for pair in report.overall["proposed"]["predicted_cooccurrence"]["pairs"][:10]:
        lines.append(
            f"  {pair['verb_i']} + {pair['verb_j']}: {pair['combined']:.3f}"
        )
    _emit("summary.txt", "\n".join(lines) + "\n")

    sweep_csv_rows = []
    base = {row["alpha"]: row for row in report.overall["baseline"]["sweep"]}
    for row in report.overall["proposed"]["sweep"]:
        sweep_csv_rows.append(
            [
                row["alpha"],
                row["n_videos"],
                row["avg_verbs_per_video"],
                base[row["alpha"]]["accuracy"],
                row["accuracy"],
            ]
        )
    _write_csv(
        out / "alpha_sweep.csv",
        ["alpha", "n_videos", "avg_verbs_per_video", "baseline_accuracy", "proposed_accuracy"],
        sweep_csv_rows,
    )
    written.append(out / "alpha_sweep.csv")

    _write_csv(
        out / "per_verb_error.csv",
        ["verb", "mean", "median", "q1", "q3"],
        [
            [e["verb"], e["mean"], e["median"], e["q1"], e["q3"]]
            for e in report.overall["proposed"]["per_verb_error"]
        ],
    )
    written.append(out / "per_verb_error.csv")

    cooc = report.overall["proposed"]["predicted_cooccurrence"]
    _write_csv(
        out / "predicted_cooccurrence.csv",
        ["rank", "verb_i", "verb_j"]
        + [f"symmetric_{tag or 'all'}" for tag in cooc["dataset_tags"]]
        + ["combined"],
        [
            [rank, p["verb_i"], p["verb_j"], *p["per_dataset"], p["combined"]]
            for rank, p in enumerate(cooc["pairs"], start=1)
        ],
    )
    written.append(out / "predicted_cooccurrence.csv")

    ann = report.annotation_stats
    tags = sorted(ann["per_verb_counts"])
    n_verbs = len(next(iter(ann["per_verb_counts"].values()))) if tags else 0
    _write_csv(
        out / "annotation_verb_counts.csv",
        ["verb_index"] + [f"count_{tag or 'all'}" for tag in tags] + ["total"],
        [
            [j] + [ann["per_verb_counts"][tag][j] for tag in tags]
            + [sum(ann["per_verb_counts"][tag][j] for tag in tags)]
            for j in range(n_verbs)
        ],
    )
    written.append(out / "annotation_verb_counts.csv")

    _write_csv(
        out / "annotation_class_summary.csv",
        [
            "class_label", "dataset_tag", "n_videos", "n_records", "unique_verbs",
            "vpa_mean", "vpa_min", "vpa_q1", "vpa_median", "vpa_q3", "vpa_max",
        ],
        [
            [
                c["class_label"], c["dataset_tag"], c["n_videos"], c["n_records"],
                c["unique_verbs"],
                c["verbs_per_annotator"]["mean"], c["verbs_per_annotator"]["minimum"],
                c["verbs_per_annotator"]["q1"], c["verbs_per_annotator"]["median"],
                c["verbs_per_annotator"]["q3"], c["verbs_per_annotator"]["maximum"],
            ]
            for c in ann["per_class"]
        ],
    )
    written.append(out / "annotation_class_summary.csv")

    top = ann["top_pairs"]
    _write_csv(
        out / "annotation_cooccurrence.csv",
        ["rank", "verb_i", "verb_j"]
        + [f"symmetric_{tag or 'all'}" for tag in top["dataset_tags"]]
        + ["combined"],
        [
            [rank, p["verb_i"], p["verb_j"], *p["per_dataset"], p["combined"]]
            for rank, p in enumerate(top["pairs"], start=1)
        ],
    )
    written.append(out / "annotation_cooccurrence.csv")

    # wall clock lives here and only here so the structured outputs above
    # stay byte-identical across re-runs
    (out / "run_info.txt").write_text(
        f"written_utc: {datetime.now(timezone.utc).isoformat()}\n", encoding="utf-8"
    )
    return written


def _fmt_score(value) -> str:
    return "-" if value is None else f"{value:.3f}"
