"""verbprob: crowdsourced multi-verb annotations as per-video probability
distributions, a probabilistic multi-label trainer versus a majority-vote
baseline, and threshold-parameterised set-retrieval evaluation."""

from .annotations import (
    AnnotationRecord,
    VideoAnnotation,
    VideoMeta,
    aggregate,
    majority_vote,
    to_one_hot,
)
from .errors import ConfigError, InputFormatError, TrainingDivergedError
from .metrics import (
    AlphaSweep,
    EvalResult,
    PerVerbError,
    accuracy_classification,
    accuracy_probabilistic,
    alpha_sweep,
    annotated_set,
    per_verb_error,
    per_verb_squared_error,
    predicted_set,
)
from .model import (
    ModelParameters,
    TrainConfig,
    TrainResult,
    forward,
    gradient,
    loss_euclidean,
    loss_logistic_onehot,
    predict_matrix,
    train,
)
from .pipeline import (
    ExperimentConfig,
    ExperimentReport,
    FoldAssignment,
    emit_reports,
    make_folds,
    run_experiment,
)
from .stats import (
    CooccurrenceMatrix,
    CorrelationReport,
    cooccurrence_counts,
    cooccurrence_from_records,
    r_squared,
    top_symmetric_pairs,
    verbs_per_annotator,
)
from .synthetic import SynthConfig, SynthCorpus, generate, truth_gap
from .vocab import VerbVocabulary, load_vocabulary, save_vocabulary

__version__ = "0.1.0"

__all__ = [
    "AnnotationRecord",
    "AlphaSweep",
    "ConfigError",
    "CooccurrenceMatrix",
    "CorrelationReport",
    "EvalResult",
    "ExperimentConfig",
    "ExperimentReport",
    "FoldAssignment",
    "InputFormatError",
    "ModelParameters",
    "PerVerbError",
    "SynthConfig",
    "SynthCorpus",
    "TrainConfig",
    "TrainResult",
    "TrainingDivergedError",
    "VerbVocabulary",
    "VideoAnnotation",
    "VideoMeta",
    "accuracy_classification",
    "accuracy_probabilistic",
    "aggregate",
    "alpha_sweep",
    "annotated_set",
    "cooccurrence_counts",
    "cooccurrence_from_records",
    "emit_reports",
    "forward",
    "generate",
    "gradient",
    "load_vocabulary",
    "loss_euclidean",
    "loss_logistic_onehot",
    "majority_vote",
    "make_folds",
    "per_verb_error",
    "per_verb_squared_error",
    "predict_matrix",
    "predicted_set",
    "r_squared",
    "run_experiment",
    "save_vocabulary",
    "to_one_hot",
    "top_symmetric_pairs",
    "train",
    "truth_gap",
    "verbs_per_annotator",
]
