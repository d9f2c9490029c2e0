"""Corpus-level annotation statistics: per-verb frequencies, verbs chosen
per annotator, verb co-occurrence matrices and correlation checks.

Co-occurrence works from any stream of verb-index sets: a worker's
selections (annotation co-occurrence) or a video's thresholded labels
(predicted co-occurrence).  For each unordered pair {i, j} present in a
set, counts(i, j) and counts(j, i) gain 1.  Row-normalising the counts
and averaging the two directions gives a symmetric score in [0, 1];
values near 1 mean the two verbs are close to interchangeable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .annotations import AnnotationRecord
from .errors import ConfigError, InputFormatError
from .vocab import VerbVocabulary


@dataclass
class CooccurrenceMatrix:
    counts: np.ndarray          # square, int64, symmetric, zero diagonal
    row_normalized: np.ndarray  # counts(i,j) / row sum, 0 where the row is empty
    symmetric: np.ndarray       # (row_normalized + row_normalized.T) / 2
    dataset_tag: str = ""

    @property
    def size(self) -> int:
        return self.counts.shape[0]


@dataclass(frozen=True)
class CorrelationReport:
    x_name: str
    y_name: str
    r_squared: float
    n: int


@dataclass(frozen=True)
class PairCooccurrence:
    """One ranked verb pair with the per-dataset symmetric scores."""

    i: int
    j: int
    per_dataset: tuple[float, ...]
    combined: float


@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float


def summarize(values: Sequence[float]) -> SummaryStats:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise InputFormatError("cannot summarize an empty sample")
    q1, median, q3 = np.percentile(arr, [25, 50, 75])
    return SummaryStats(
        count=int(arr.size),
        mean=float(arr.mean()),
        minimum=float(arr.min()),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        maximum=float(arr.max()),
    )


def cooccurrence_counts(
    selections: Iterable[frozenset[int] | set[int]],
    size: int,
    dataset_tag: str = "",
) -> CooccurrenceMatrix:
    """Build the counts / row-normalized / symmetric matrices from verb sets.

    The diagonal is kept at zero and excluded from row sums: self-counts
    would deflate every normalized value.  Rows of verbs that never appear
    stay all-zero rather than dividing by zero.
    """
    counts = np.zeros((size, size), dtype=np.int64)
    empty = True
    for sel in selections:
        empty = False
        for i, j in combinations(sorted(sel), 2):
            if j >= size:
                raise InputFormatError(f"verb index {j} outside vocabulary of size {size}")
            counts[i, j] += 1
            counts[j, i] += 1
    if empty:
        raise InputFormatError("no selections to count co-occurrences from")

    row_sums = counts.sum(axis=1, dtype=np.float64)
    normalized = np.zeros((size, size), dtype=np.float64)
    nonzero = row_sums > 0
    normalized[nonzero] = counts[nonzero] / row_sums[nonzero, None]
    symmetric = (normalized + normalized.T) / 2.0
    return CooccurrenceMatrix(counts, normalized, symmetric, dataset_tag)


def cooccurrence_from_records(
    records: Iterable[AnnotationRecord], vocab: VerbVocabulary, dataset_tag: str = ""
) -> CooccurrenceMatrix:
    """Annotation co-occurrence: one contribution per (worker, video) record."""
    return cooccurrence_counts(
        (rec.verbs_selected for rec in records), len(vocab), dataset_tag
    )


def binarize_predictions(matrix: np.ndarray, alpha: float) -> list[set[int]]:
    """Per-video verb sets {j: value > alpha}; strict, matching the annotated-set rule."""
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    arr = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    return [set(np.flatnonzero(row > alpha).tolist()) for row in arr]


def top_symmetric_pairs(
    matrices: Sequence[CooccurrenceMatrix], k: int
) -> list[PairCooccurrence]:
    """Rank verb pairs by the sum of symmetric scores across datasets.

    Only pairs with a nonzero combined score are returned, so fewer than k
    entries may come back.  Ties break lexicographically on (i, j).
    """
    if k <= 0:
        raise InputFormatError(f"k must be positive, got {k}")
    if not matrices:
        raise InputFormatError("no co-occurrence matrices given")
    size = matrices[0].size
    if any(m.size != size for m in matrices):
        raise InputFormatError("co-occurrence matrices disagree on vocabulary size")

    combined = np.zeros((size, size), dtype=np.float64)
    for m in matrices:
        combined += m.symmetric
    pairs = []
    for i in range(size):
        for j in range(i + 1, size):
            if combined[i, j] > 0.0:
                pairs.append(
                    PairCooccurrence(
                        i=i,
                        j=j,
                        per_dataset=tuple(float(m.symmetric[i, j]) for m in matrices),
                        combined=float(combined[i, j]),
                    )
                )
    pairs.sort(key=lambda p: (-p.combined, p.i, p.j))
    return pairs[:k]


def verbs_per_annotator(
    records_by_class: Mapping[str, Sequence[AnnotationRecord]]
) -> dict[str, SummaryStats]:
    """Per class: summary of how many verbs each worker selected."""
    out = {}
    for class_label in sorted(records_by_class):
        recs = records_by_class[class_label]
        if not recs:
            raise InputFormatError(f"class {class_label!r} has no records")
        out[class_label] = summarize([len(r.verbs_selected) for r in recs])
    return out


def unique_verbs_per_class(
    records_by_class: Mapping[str, Sequence[AnnotationRecord]]
) -> dict[str, int]:
    """Number of distinct verbs any worker selected for each class."""
    out = {}
    for class_label in sorted(records_by_class):
        chosen: set[int] = set()
        for rec in records_by_class[class_label]:
            chosen |= rec.verbs_selected
        out[class_label] = len(chosen)
    return out


def verb_annotation_counts(records: Iterable[AnnotationRecord], size: int) -> np.ndarray:
    """Times each verb was selected, over all (worker, video) records."""
    counts = np.zeros(size, dtype=np.int64)
    for rec in records:
        counts[sorted(rec.verbs_selected)] += 1
    return counts


def r_squared(
    x: Sequence[float], y: Sequence[float], x_name: str = "x", y_name: str = "y"
) -> CorrelationReport:
    """Squared Pearson correlation of two paired samples."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise InputFormatError("x and y must be 1-D samples of equal length")
    if xa.size < 2:
        raise InputFormatError("need at least 2 samples")
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    var_x = float(xc @ xc)
    var_y = float(yc @ yc)
    if var_x == 0.0 or var_y == 0.0:
        raise InputFormatError("zero variance")
    r = float(xc @ yc) / np.sqrt(var_x * var_y)
    return CorrelationReport(x_name, y_name, float(r * r), int(xa.size))


# ---------------------------------------------------------------------------
# Tabular exports
# ---------------------------------------------------------------------------

def write_cooccurrence_csv(
    path: str | Path, matrix: CooccurrenceMatrix, vocab: VerbVocabulary
) -> None:
    """All nonzero pairs: verb_i, verb_j, counts, both normalized directions, symmetric."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["verb_i", "verb_j", "count", "n_ij", "n_ji", "symmetric", "dataset_tag"])
        for i in range(matrix.size):
            for j in range(i + 1, matrix.size):
                if matrix.counts[i, j] == 0:
                    continue
                writer.writerow(
                    [
                        vocab[i],
                        vocab[j],
                        int(matrix.counts[i, j]),
                        repr(float(matrix.row_normalized[i, j])),
                        repr(float(matrix.row_normalized[j, i])),
                        repr(float(matrix.symmetric[i, j])),
                        matrix.dataset_tag,
                    ]
                )


def write_top_pairs_csv(
    path: str | Path,
    pairs: Sequence[PairCooccurrence],
    vocab: VerbVocabulary,
    dataset_tags: Sequence[str],
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["rank", "verb_i", "verb_j"]
            + [f"symmetric_{tag or 'all'}" for tag in dataset_tags]
            + ["combined"]
        )
        for rank, pair in enumerate(pairs, start=1):
            writer.writerow(
                [rank, vocab[pair.i], vocab[pair.j]]
                + [repr(v) for v in pair.per_dataset]
                + [repr(pair.combined)]
            )


def write_class_summary_csv(
    path: str | Path,
    per_class_verbs: Mapping[str, SummaryStats],
    unique_counts: Mapping[str, int],
    class_tags: Mapping[str, str] | None = None,
) -> None:
    """One row per class: verbs-per-annotator summary plus unique-verb count."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "class_label",
                "dataset_tag",
                "annotators",
                "unique_verbs",
                "verbs_per_annotator_mean",
                "min",
                "q1",
                "median",
                "q3",
                "max",
            ]
        )
        for class_label in sorted(per_class_verbs):
            s = per_class_verbs[class_label]
            writer.writerow(
                [
                    class_label,
                    (class_tags or {}).get(class_label, ""),
                    s.count,
                    unique_counts.get(class_label, 0),
                    repr(s.mean),
                    repr(s.minimum),
                    repr(s.q1),
                    repr(s.median),
                    repr(s.q3),
                    repr(s.maximum),
                ]
            )
