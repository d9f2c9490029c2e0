"""Small differentiable predictors from feature vectors to per-verb outputs.

Two training targets are supported: one-hot majority-vote labels under an
elementwise logistic (binary cross-entropy) loss, and full annotation
probability distributions under a Euclidean-distance loss.  The logistic
loss needs outputs squashed into (0, 1) by a sigmoid; the Euclidean loss
drives raw linear outputs, which are clamped to [0, 1] only at prediction
time.  Optimisation is plain momentum SGD with L2 weight decay, written
out explicitly so the gradients can be verified against finite
differences.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, InputFormatError, TrainingDivergedError

LOSSES = ("euclidean", "logistic_onehot")
ARCHITECTURES = ("linear", "hidden")
ACTIVATIONS = ("linear", "sigmoid")

# Below this residual norm a sample's Euclidean-loss gradient is taken as
# zero (subgradient choice at the non-differentiable point).
RESIDUAL_NORM_FLOOR = 1e-12

CHECKPOINT_VERSION = 1


@dataclass
class ModelParameters:
    """Weights for a linear map or a one-hidden-layer tanh network."""

    arch: str
    output_activation: str
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray | None = None
    b2: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.arch not in ARCHITECTURES:
            raise ConfigError(f"unknown architecture {self.arch!r}")
        if self.output_activation not in ACTIVATIONS:
            raise ConfigError(f"unknown output activation {self.output_activation!r}")
        if (self.arch == "hidden") != (self.w2 is not None):
            raise ConfigError("hidden architecture requires w2/b2; linear forbids them")

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def output_dim(self) -> int:
        return self.b2.shape[0] if self.arch == "hidden" else self.b1.shape[0]

    @property
    def hidden_units(self) -> int:
        return self.w1.shape[1] if self.arch == "hidden" else 0

    def arrays(self) -> list[tuple[str, np.ndarray]]:
        out = [("w1", self.w1), ("b1", self.b1)]
        if self.arch == "hidden":
            out += [("w2", self.w2), ("b2", self.b2)]
        return out

    def copy(self) -> "ModelParameters":
        return ModelParameters(
            self.arch,
            self.output_activation,
            self.w1.copy(),
            self.b1.copy(),
            None if self.w2 is None else self.w2.copy(),
            None if self.b2 is None else self.b2.copy(),
        )


@dataclass(frozen=True)
class TrainConfig:
    loss: str = "euclidean"
    learning_rate: float = 1e-3
    epochs: int = 10
    batch_size: int = 128
    momentum: float = 0.9
    weight_decay: float = 0.0005
    seed: int = 0
    # optional step schedule: lr multiplies by lr_step_factor at the start
    # of each listed (0-based) epoch
    lr_step_epochs: tuple[int, ...] = ()
    lr_step_factor: float = 0.1

    def validate(self) -> None:
        if self.loss not in LOSSES:
            raise ConfigError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.epochs <= 0:
            raise ConfigError("epochs must be positive")
        if self.batch_size <= 0:
            raise ConfigError("batch_size must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum must be in [0, 1)")
        if self.weight_decay < 0:
            raise ConfigError("weight_decay must be non-negative")
        if not 0.0 < self.lr_step_factor <= 1.0:
            raise ConfigError("lr_step_factor must be in (0, 1]")


@dataclass
class TrainResult:
    params: ModelParameters
    loss_trace: list[float] = field(default_factory=list)  # per-epoch mean data loss


def default_activation(loss: str) -> str:
    """Pairing: logistic loss needs (0,1) outputs, Euclidean drives linear ones."""
    return "sigmoid" if loss == "logistic_onehot" else "linear"


def init_parameters(
    arch: str,
    input_dim: int,
    output_dim: int,
    hidden_units: int = 0,
    output_activation: str = "linear",
    rng: np.random.Generator | None = None,
) -> ModelParameters:
    """Seeded uniform init scaled by 1/sqrt(fan_in); biases start at zero."""
    if input_dim <= 0 or output_dim <= 0:
        raise ConfigError("input_dim and output_dim must be positive")
    rng = rng or np.random.default_rng(0)

    def uniform(fan_in: int, shape: tuple[int, ...]) -> np.ndarray:
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    if arch == "linear":
        return ModelParameters(
            arch, output_activation, uniform(input_dim, (input_dim, output_dim)),
            np.zeros(output_dim),
        )
    if arch == "hidden":
        if hidden_units <= 0:
            raise ConfigError("hidden architecture needs hidden_units > 0")
        return ModelParameters(
            arch,
            output_activation,
            uniform(input_dim, (input_dim, hidden_units)),
            np.zeros(hidden_units),
            uniform(hidden_units, (hidden_units, output_dim)),
            np.zeros(output_dim),
        )
    raise ConfigError(f"unknown architecture {arch!r}")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward_cached(
    params: ModelParameters, x: np.ndarray
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray]:
    """Returns (output, hidden activations or None, pre-activation z)."""
    if x.ndim != 2 or x.shape[1] != params.input_dim:
        raise InputFormatError(
            f"feature dimension {x.shape[-1] if x.ndim else 0} does not match "
            f"model input dimension {params.input_dim}"
        )
    if params.arch == "hidden":
        hidden = np.tanh(x @ params.w1 + params.b1)
        z = hidden @ params.w2 + params.b2
    else:
        hidden = None
        z = x @ params.w1 + params.b1
    out = _sigmoid(z) if params.output_activation == "sigmoid" else z
    return out, hidden, z


def forward(params: ModelParameters, x: np.ndarray) -> np.ndarray:
    """Deterministic forward pass; accepts one vector or a stacked batch."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    out, _, _ = _forward_cached(params, np.atleast_2d(arr))
    return out[0] if single else out


def _as_batch(yhat: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.atleast_2d(np.asarray(yhat, dtype=np.float64))
    b = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if a.shape != b.shape:
        raise InputFormatError(f"shape mismatch: predictions {a.shape} vs targets {b.shape}")
    return a, b


def _check_one_hot(y: np.ndarray) -> None:
    if not (np.all((y == 0.0) | (y == 1.0)) and np.all(y.sum(axis=1) == 1.0)):
        raise InputFormatError("logistic loss expects one-hot target vectors")


def loss_logistic_onehot(yhat: np.ndarray, y: np.ndarray) -> float:
    """Elementwise binary cross-entropy, averaged over classes then samples.

    Every vocabulary entry is treated as its own binary decision, so the
    one-hot positive contributes -log(yhat_j) and each negative contributes
    -log(1 - yhat_j), divided by the number of classes.
    """
    yhat, y = _as_batch(yhat, y)
    _check_one_hot(y)
    if np.any(yhat <= 0.0) or np.any(yhat >= 1.0):
        raise ValueError(
            "activation contract violated: logistic loss needs predictions strictly in (0, 1)"
        )
    per_entry = y * np.log(yhat) + (1.0 - y) * np.log(1.0 - yhat)
    return float(-per_entry.sum(axis=1).mean() / y.shape[1])


def _loss_logistic_from_logits(z: np.ndarray, y: np.ndarray) -> float:
    """Same elementwise cross-entropy, but from pre-activation values.

    Where the sigmoid saturates to exactly 0 or 1 in float64 this stays
    finite and exact; training uses it so a large step cannot fake a
    non-finite loss through float rounding.
    """
    per_entry = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    return float(per_entry.sum(axis=1).mean() / y.shape[1])


def loss_euclidean(yhat: np.ndarray, y: np.ndarray) -> float:
    """Mean over the batch of the Euclidean distance between the two vectors.

    Penalises probability errors symmetrically, with no preference for high
    or low probabilities.
    """
    yhat, y = _as_batch(yhat, y)
    return float(np.linalg.norm(y - yhat, axis=1).mean())


def compute_loss(loss: str, yhat: np.ndarray, y: np.ndarray) -> float:
    if loss == "logistic_onehot":
        return loss_logistic_onehot(yhat, y)
    if loss == "euclidean":
        return loss_euclidean(yhat, y)
    raise ConfigError(f"unknown loss {loss!r}")


def regularized_loss(
    params: ModelParameters, x: np.ndarray, y: np.ndarray, config: TrainConfig
) -> float:
    """Training objective: data loss plus (wd/2)·sum of squared parameters.

    This is the scalar whose exact gradient `gradient` returns; finite
    differences of this function are the verification oracle.
    """
    out, _, _ = _forward_cached(params, np.atleast_2d(np.asarray(x, dtype=np.float64)))
    total = compute_loss(config.loss, out, y)
    if config.weight_decay > 0:
        total += 0.5 * config.weight_decay * sum(
            float(np.sum(a * a)) for _, a in params.arrays()
        )
    return total


def gradient(
    params: ModelParameters, x: np.ndarray, y: np.ndarray, config: TrainConfig
) -> dict[str, np.ndarray]:
    """Analytic gradient of the selected loss plus the weight-decay term.

    For the Euclidean loss a sample whose residual norm falls below
    RESIDUAL_NORM_FLOOR contributes a zero gradient (the norm is not
    differentiable at zero).
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if x.shape[0] == 0:
        raise InputFormatError("empty batch")
    if y.shape[0] != x.shape[0]:
        raise InputFormatError("feature/target batch sizes differ")
    out, hidden, _ = _forward_cached(params, x)
    if y.shape[1] != out.shape[1]:
        raise InputFormatError("target dimension does not match model output dimension")
    n_samples, n_classes = y.shape

    if config.loss == "logistic_onehot":
        if params.output_activation != "sigmoid":
            raise ConfigError("logistic loss requires the sigmoid output activation")
        _check_one_hot(y)
        # d(loss)/dz collapses to (out - y) scaled by the two means
        dz = (out - y) / (n_classes * n_samples)
    else:
        residual = out - y
        norms = np.linalg.norm(residual, axis=1, keepdims=True)
        scale = np.where(norms < RESIDUAL_NORM_FLOOR, 0.0, 1.0 / np.maximum(norms, RESIDUAL_NORM_FLOOR))
        dout = residual * scale / n_samples
        if params.output_activation == "sigmoid":
            dz = dout * out * (1.0 - out)
        else:
            dz = dout

    grads: dict[str, np.ndarray]
    if params.arch == "hidden":
        dhidden = dz @ params.w2.T
        dpre = dhidden * (1.0 - hidden * hidden)
        grads = {
            "w1": x.T @ dpre,
            "b1": dpre.sum(axis=0),
            "w2": hidden.T @ dz,
            "b2": dz.sum(axis=0),
        }
    else:
        grads = {"w1": x.T @ dz, "b1": dz.sum(axis=0)}

    if config.weight_decay > 0:
        for name, array in params.arrays():
            grads[name] = grads[name] + config.weight_decay * array
    return grads


def train(
    features: np.ndarray,
    targets: np.ndarray,
    config: TrainConfig,
    arch: str = "linear",
    hidden_units: int = 0,
    output_activation: str | None = None,
) -> TrainResult:
    """Momentum SGD over seeded shuffles; fully deterministic given the seed.

    Update rule per parameter: v <- momentum·v - lr·g; p <- p + v, where g
    already includes the weight-decay term.  Aborts on a non-finite loss,
    naming the epoch and batch.
    """
    config.validate()
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise InputFormatError("features and targets must be aligned 2-D arrays")
    if x.shape[0] == 0:
        raise InputFormatError("empty training set")
    if config.loss == "logistic_onehot":
        _check_one_hot(y)

    activation = output_activation or default_activation(config.loss)
    rng = np.random.default_rng(config.seed)
    params = init_parameters(arch, x.shape[1], y.shape[1], hidden_units, activation, rng)
    velocity = {name: np.zeros_like(array) for name, array in params.arrays()}

    lr = config.learning_rate
    trace: list[float] = []
    for epoch in range(config.epochs):
        if epoch in config.lr_step_epochs:
            lr *= config.lr_step_factor
        order = rng.permutation(x.shape[0])
        epoch_losses = []
        for batch_index, start in enumerate(range(0, len(order), config.batch_size)):
            idx = order[start : start + config.batch_size]
            xb, yb = x[idx], y[idx]
            # overflow here is handled by the non-finite check below
            with np.errstate(over="ignore", invalid="ignore"):
                out, _, z = _forward_cached(params, xb)
                if config.loss == "logistic_onehot":
                    batch_loss = _loss_logistic_from_logits(z, yb)
                else:
                    batch_loss = loss_euclidean(out, yb)
            if not np.isfinite(batch_loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {batch_index}"
                )
            epoch_losses.append(batch_loss)
            grads = gradient(params, xb, yb, config)
            for name, array in params.arrays():
                velocity[name] *= config.momentum
                velocity[name] -= lr * grads[name]
                array += velocity[name]
        trace.append(float(np.mean(epoch_losses)))

    for name, array in params.arrays():
        if not np.all(np.isfinite(array)):
            raise TrainingDivergedError(f"non-finite parameter {name!r} after final update")
    return TrainResult(params=params, loss_trace=trace)


def predict_matrix(params: ModelParameters, features: np.ndarray) -> np.ndarray:
    """Stacked forward outputs clamped elementwise into [0, 1]."""
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    out, _, _ = _forward_cached(params, x)
    return np.clip(out, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Checkpoint and tabular feature/prediction files
# ---------------------------------------------------------------------------

def save_checkpoint(
    path: str | Path,
    params: ModelParameters,
    vocab_hash: str = "",
    config: TrainConfig | None = None,
) -> None:
    meta = {
        "format_version": CHECKPOINT_VERSION,
        "arch": params.arch,
        "output_activation": params.output_activation,
        "input_dim": params.input_dim,
        "output_dim": params.output_dim,
        "hidden_units": params.hidden_units,
        "vocab_hash": vocab_hash,
        "train_config": None if config is None else asdict(config),
    }
    arrays = {name: array for name, array in params.arrays()}
    with open(path, "wb") as handle:  # keep the exact path; np.savez would append .npz
        np.savez(handle, meta=json.dumps(meta, sort_keys=True), **arrays)


def load_checkpoint(path: str | Path) -> tuple[ModelParameters, dict]:
    with np.load(path, allow_pickle=False) as data:
        try:
            meta = json.loads(str(data["meta"]))
        except KeyError:
            raise InputFormatError(f"{path}: not a model checkpoint (missing meta)") from None
        if meta.get("format_version") != CHECKPOINT_VERSION:
            raise InputFormatError(
                f"{path}: unsupported checkpoint version {meta.get('format_version')!r}"
            )
        params = ModelParameters(
            meta["arch"],
            meta["output_activation"],
            np.array(data["w1"], dtype=np.float64),
            np.array(data["b1"], dtype=np.float64),
            np.array(data["w2"], dtype=np.float64) if meta["arch"] == "hidden" else None,
            np.array(data["b2"], dtype=np.float64) if meta["arch"] == "hidden" else None,
        )
    return params, meta


def write_features(path: str | Path, features: dict[str, np.ndarray]) -> None:
    """Tabular features: one row per video, full float64 precision."""
    if not features:
        raise InputFormatError("no feature vectors to write")
    dim = len(next(iter(features.values())))
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["video_id"] + [f"f{d:03d}" for d in range(dim)])
        for video_id, vec in features.items():
            if len(vec) != dim:
                raise InputFormatError(f"feature dimension mismatch for video {video_id!r}")
            writer.writerow([video_id] + [repr(float(v)) for v in vec])


def load_features(path: str | Path) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header or header[0] != "video_id":
            raise InputFormatError(f"{path}: expected a video_id column first")
        dim = len(header) - 1
        for lineno, row in enumerate(reader, start=2):
            if len(row) != dim + 1:
                raise InputFormatError(f"{path}:{lineno}: expected {dim + 1} columns")
            if row[0] in out:
                raise InputFormatError(f"{path}:{lineno}: duplicate video_id {row[0]!r}")
            try:
                out[row[0]] = np.array([float(v) for v in row[1:]], dtype=np.float64)
            except ValueError as exc:
                raise InputFormatError(f"{path}:{lineno}: {exc}") from None
    if not out:
        raise InputFormatError(f"{path}: no feature rows")
    return out


def write_predictions(
    path: str | Path, video_ids: Sequence[str], matrix: np.ndarray, vocab_verbs: Sequence[str]
) -> None:
    matrix = np.atleast_2d(matrix)
    if matrix.shape != (len(video_ids), len(vocab_verbs)):
        raise InputFormatError("prediction matrix shape does not match ids x vocabulary")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["video_id", *vocab_verbs])
        for video_id, row in zip(video_ids, matrix):
            writer.writerow([video_id] + [repr(float(v)) for v in row])


def load_predictions(path: str | Path, vocab_verbs: Sequence[str]) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["video_id", *vocab_verbs]:
            raise InputFormatError(f"{path}: header does not match the vocabulary")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(vocab_verbs) + 1:
                raise InputFormatError(f"{path}:{lineno}: wrong column count")
            try:
                out[row[0]] = np.array([float(v) for v in row[1:]], dtype=np.float64)
            except ValueError as exc:
                raise InputFormatError(f"{path}:{lineno}: {exc}") from None
    if not out:
        raise InputFormatError(f"{path}: no prediction rows")
    return out
