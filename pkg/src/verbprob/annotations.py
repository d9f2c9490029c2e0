"""Ingest raw multi-verb annotation records and aggregate them into
per-video label-probability distributions and majority-vote labels.

A record is one worker's verb selections for one video.  Aggregation
normalises per-verb selection counts by the number of distinct workers,
so each entry is the fraction of annotators who chose that verb.  The
resulting vector is intentionally NOT normalised to sum to 1: several
verbs can all be correct labels for the same clip.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputFormatError
from .vocab import VerbVocabulary


@dataclass(frozen=True)
class AnnotationRecord:
    """One worker's verb selections (vocabulary indices) for one video."""

    video_id: str
    worker_id: str
    verbs_selected: frozenset[int]

    def __post_init__(self) -> None:
        if not self.verbs_selected:
            raise InputFormatError(
                f"record ({self.video_id!r}, {self.worker_id!r}) selects no verbs"
            )
        if any(j < 0 for j in self.verbs_selected):
            raise InputFormatError(
                f"record ({self.video_id!r}, {self.worker_id!r}) has a negative verb index"
            )


@dataclass(frozen=True)
class VideoMeta:
    """Per-video metadata carried by record files; not used as model input."""

    class_label: str = ""
    dataset_tag: str = ""


@dataclass
class VideoAnnotation:
    """Aggregated annotation state for one video."""

    video_id: str
    class_label: str
    dataset_tag: str
    annotator_count: int
    distribution: np.ndarray  # float64, one probability per vocabulary index


def aggregate(
    records: Iterable[AnnotationRecord],
    vocab: VerbVocabulary,
    video_meta: Mapping[str, VideoMeta] | None = None,
) -> list[VideoAnnotation]:
    """Aggregate records into per-video probability distributions.

    p(j) = (# workers selecting verb j) / (# distinct workers for the video).
    No rare-verb filtering is applied.  Output is sorted by video_id so the
    result is invariant to record ordering.
    """
    size = len(vocab)
    counts: dict[str, np.ndarray] = {}
    workers: dict[str, set[str]] = {}
    for rec in records:
        if any(j >= size for j in rec.verbs_selected):
            bad = max(rec.verbs_selected)
            raise InputFormatError(
                f"record ({rec.video_id!r}, {rec.worker_id!r}) references verb index "
                f"{bad} outside vocabulary of size {size}"
            )
        seen = workers.setdefault(rec.video_id, set())
        if rec.worker_id in seen:
            raise InputFormatError(
                f"duplicate annotation for video {rec.video_id!r} by worker {rec.worker_id!r}"
            )
        seen.add(rec.worker_id)
        tally = counts.setdefault(rec.video_id, np.zeros(size, dtype=np.float64))
        tally[sorted(rec.verbs_selected)] += 1.0
    if not counts:
        raise InputFormatError("no annotations")

    out = []
    for video_id in sorted(counts):
        n = len(workers[video_id])
        meta = (video_meta or {}).get(video_id, VideoMeta())
        out.append(
            VideoAnnotation(
                video_id=video_id,
                class_label=meta.class_label,
                dataset_tag=meta.dataset_tag,
                annotator_count=n,
                distribution=counts[video_id] / n,
            )
        )
    return out


def majority_vote(annotation: VideoAnnotation) -> int:
    """Index of the most-selected verb; ties resolve to the lowest index."""
    p = annotation.distribution
    if not np.any(p > 0):
        raise InputFormatError(f"no annotated verbs for video {annotation.video_id!r}")
    return int(np.argmax(p))


def to_one_hot(index: int, vocab: VerbVocabulary) -> np.ndarray:
    if not 0 <= index < len(vocab):
        raise InputFormatError(f"index {index} out of range for vocabulary of size {len(vocab)}")
    p = np.zeros(len(vocab), dtype=np.float64)
    p[index] = 1.0
    return p


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def load_records(
    path: str | Path, vocab: VerbVocabulary
) -> tuple[list[AnnotationRecord], dict[str, VideoMeta]]:
    """Read line-delimited JSON records and resolve verb strings to indices.

    Each line holds video_id, worker_id, verbs (list of verb strings) and
    optional class_label / dataset_tag.  An unknown verb is a hard error
    naming the verb and line number.  Per-video metadata must be consistent
    across lines.
    """
    records: list[AnnotationRecord] = []
    meta: dict[str, VideoMeta] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputFormatError(f"{path}:{lineno}: invalid JSON ({exc})") from None
            try:
                video_id = str(row["video_id"])
                worker_id = str(row["worker_id"])
                verbs = row["verbs"]
            except KeyError as exc:
                raise InputFormatError(f"{path}:{lineno}: missing field {exc}") from None
            if not isinstance(verbs, list) or not verbs:
                raise InputFormatError(f"{path}:{lineno}: 'verbs' must be a non-empty list")
            indices = set()
            for verb in verbs:
                if verb not in vocab:
                    raise InputFormatError(
                        f"{path}:{lineno}: unknown verb {verb!r} (not in vocabulary)"
                    )
                indices.add(vocab.index(verb))
            records.append(AnnotationRecord(video_id, worker_id, frozenset(indices)))

            new = VideoMeta(
                class_label=str(row.get("class_label", "") or ""),
                dataset_tag=str(row.get("dataset_tag", "") or ""),
            )
            old = meta.get(video_id)
            if old is None:
                meta[video_id] = new
            elif (old.class_label, old.dataset_tag) != (new.class_label, new.dataset_tag) and (
                new.class_label or new.dataset_tag
            ):
                if (new.class_label and new.class_label != old.class_label) or (
                    new.dataset_tag and new.dataset_tag != old.dataset_tag
                ):
                    raise InputFormatError(
                        f"{path}:{lineno}: conflicting metadata for video {video_id!r}"
                    )
    return records, meta


def write_records(
    path: str | Path,
    records: Sequence[AnnotationRecord],
    vocab: VerbVocabulary,
    video_meta: Mapping[str, VideoMeta] | None = None,
) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for rec in records:
            row: dict[str, object] = {
                "video_id": rec.video_id,
                "worker_id": rec.worker_id,
                "verbs": [vocab[j] for j in sorted(rec.verbs_selected)],
            }
            meta = (video_meta or {}).get(rec.video_id)
            if meta is not None:
                if meta.class_label:
                    row["class_label"] = meta.class_label
                if meta.dataset_tag:
                    row["dataset_tag"] = meta.dataset_tag
            handle.write(json.dumps(row, sort_keys=True) + "\n")


def write_aggregated(
    path: str | Path, annotations: Sequence[VideoAnnotation], vocab: VerbVocabulary
) -> None:
    """Tabular export: one row per video, probabilities rounded to 6 decimals
    (enough to reconstruct counts for up to 50 annotators)."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["video_id", "class_label", "dataset_tag", "annotator_count", *vocab])
        for ann in annotations:
            writer.writerow(
                [ann.video_id, ann.class_label, ann.dataset_tag, ann.annotator_count]
                + [f"{p:.6f}" for p in ann.distribution]
            )


def load_aggregated(path: str | Path, vocab: VerbVocabulary) -> list[VideoAnnotation]:
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        expected = ["video_id", "class_label", "dataset_tag", "annotator_count", *vocab]
        if header != expected:
            raise InputFormatError(f"{path}: header does not match the vocabulary")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise InputFormatError(f"{path}:{lineno}: expected {len(expected)} columns")
            try:
                count = int(row[3])
                p = np.array([float(v) for v in row[4:]], dtype=np.float64)
            except ValueError as exc:
                raise InputFormatError(f"{path}:{lineno}: {exc}") from None
            if count <= 0:
                raise InputFormatError(f"{path}:{lineno}: annotator_count must be positive")
            if np.any(p < 0) or np.any(p > 1):
                raise InputFormatError(f"{path}:{lineno}: probabilities outside [0, 1]")
            out.append(VideoAnnotation(row[0], row[1], row[2], count, p))
    if not out:
        raise InputFormatError(f"{path}: no rows")
    return out
