"""Evaluation suite: single-label accuracy, threshold-parameterised
set-retrieval accuracy, per-verb probability error, and threshold sweeps.

Set retrieval at threshold alpha compares the verbs annotated with
probability strictly above alpha against an equal-size top-k of the
prediction vector, scoring the overlap fraction per video.  Videos whose
annotated set is empty at a given alpha are excluded from that
threshold's evaluation entirely (the evaluated video count shrinks as
alpha rises) rather than being scored zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, InputFormatError

DEFAULT_ALPHAS: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass
class EvalResult:
    alpha: float
    n_videos_evaluated: int
    avg_verbs_per_video: float
    accuracy: float
    per_video_scores: dict[str, float]


@dataclass
class PerVerbError:
    verb: int
    per_video_abs_errors: np.ndarray
    mean: float
    median: float
    q1: float
    q3: float


@dataclass
class AlphaSweep:
    """One row per requested threshold; None marks thresholds where no video
    has a non-empty annotated set."""

    alphas: tuple[float, ...]
    results: list[EvalResult | None]


def _aligned(predictions: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.atleast_2d(np.asarray(predictions, dtype=np.float64))
    y = np.atleast_2d(np.asarray(labels, dtype=np.float64))
    if p.shape != y.shape:
        raise InputFormatError(f"prediction shape {p.shape} != label shape {y.shape}")
    if p.shape[0] == 0:
        raise InputFormatError("empty video set")
    return p, y


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")


def accuracy_classification(predictions: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of videos whose prediction argmax hits the label argmax.

    Ties resolve to the lowest index on both sides, so the result does not
    depend on evaluation order.
    """
    p, y = _aligned(predictions, labels)
    return float(np.mean(np.argmax(p, axis=1) == np.argmax(y, axis=1)))


def annotated_set(y: np.ndarray, alpha: float) -> set[int]:
    """Verbs annotated with probability strictly above alpha; may be empty."""
    _check_alpha(alpha)
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim != 1:
        raise InputFormatError("annotated_set works on a single video's vector")
    return set(np.flatnonzero(arr > alpha).tolist())


def predicted_set(yhat: np.ndarray, k: int) -> set[int]:
    """Indices of the k largest prediction entries.

    A stable sort on the negated values makes ties at the k-th value
    resolve to the lowest vocabulary index.
    """
    arr = np.asarray(yhat, dtype=np.float64)
    if arr.ndim != 1:
        raise InputFormatError("predicted_set works on a single video's vector")
    if k <= 0:
        raise ConfigError(f"k must be positive, got {k}")
    if k > arr.shape[0]:
        raise ConfigError(f"k={k} exceeds vocabulary size {arr.shape[0]}")
    order = np.argsort(-arr, kind="stable")
    return set(order[:k].tolist())


def accuracy_probabilistic(
    predictions: np.ndarray,
    labels: np.ndarray,
    alpha: float,
    video_ids: Sequence[str] | None = None,
) -> EvalResult:
    """Set-retrieval accuracy at one threshold.

    Per included video the score is |annotated ∩ top-k predicted| / k with
    k = |annotated set|.  Raises when no video survives the threshold.
    """
    p, y = _aligned(predictions, labels)
    _check_alpha(alpha)
    ids = [str(i) for i in range(p.shape[0])] if video_ids is None else list(video_ids)
    if len(ids) != p.shape[0]:
        raise InputFormatError("video_ids length does not match the matrices")

    scores: dict[str, float] = {}
    set_sizes = []
    for row_p, row_y, video_id in zip(p, y, ids):
        annotated = annotated_set(row_y, alpha)
        if not annotated:
            continue
        k = len(annotated)
        overlap = len(annotated & predicted_set(row_p, k))
        scores[video_id] = overlap / k
        set_sizes.append(k)
    if not scores:
        raise InputFormatError(f"alpha too high for corpus: no video has a verb above {alpha}")
    return EvalResult(
        alpha=alpha,
        n_videos_evaluated=len(scores),
        avg_verbs_per_video=float(np.mean(set_sizes)),
        accuracy=float(np.mean(list(scores.values()))),
        per_video_scores=scores,
    )


def _summarize_errors(errors: np.ndarray) -> list[PerVerbError]:
    out = []
    for j in range(errors.shape[1]):
        column = errors[:, j]
        q1, median, q3 = np.percentile(column, [25, 50, 75])
        out.append(
            PerVerbError(
                verb=j,
                per_video_abs_errors=column,
                mean=float(column.mean()),
                median=float(median),
                q1=float(q1),
                q3=float(q3),
            )
        )
    return out


def per_verb_error(predictions: np.ndarray, labels: np.ndarray) -> list[PerVerbError]:
    """Per-verb absolute probability error |y(j) - yhat(j)| across videos,
    with mean/median/quartile summaries."""
    p, y = _aligned(predictions, labels)
    return _summarize_errors(np.abs(y - p))


def per_verb_squared_error(predictions: np.ndarray, labels: np.ndarray) -> list[PerVerbError]:
    """Squared-error variant of `per_verb_error`; never the default metric."""
    p, y = _aligned(predictions, labels)
    return _summarize_errors((y - p) ** 2)


def alpha_sweep(
    predictions: np.ndarray,
    labels: np.ndarray,
    alphas: Sequence[float] | None = None,
    video_ids: Sequence[str] | None = None,
) -> AlphaSweep:
    """Evaluate set-retrieval accuracy across thresholds.

    Thresholds where no video survives produce a None row instead of
    failing the whole sweep.
    """
    if alphas is None:
        alphas = DEFAULT_ALPHAS
    alphas = tuple(float(a) for a in alphas)
    if not alphas:
        raise ConfigError("alpha list is empty")
    for a in alphas:
        _check_alpha(a)
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ConfigError("alphas must be strictly increasing")

    p, y = _aligned(predictions, labels)
    results: list[EvalResult | None] = []
    for alpha in alphas:
        if not np.any(y > alpha):  # no surviving video: marked-empty row
            results.append(None)
        else:
            results.append(accuracy_probabilistic(p, y, alpha, video_ids))
    return AlphaSweep(alphas=alphas, results=results)
