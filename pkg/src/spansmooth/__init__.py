"""Label smoothing for span extraction, with a toy multi-hop QA testbed.

Public surface: span/F1 primitives (:mod:`.core`), soft-target construction
including the overlap-F1 smoothing fast path and its brute-force oracle
(:mod:`.smoothing`), smoothing-weight schedules (:mod:`.schedule`), the
training objectives (:mod:`.losses`), the trainable toy pipeline and its
sklearn-style estimator (:mod:`.pipeline`), dataset ingestion and synthesis
(:mod:`.data`), and evaluation metrics (:mod:`.metrics`).
"""

from .core import (
    Document,
    Example,
    GoldAnswer,
    Span,
    check_distribution,
    check_raw_scores,
    span_f1,
    span_overlap,
)
from .data import SyntheticConfig, align_answer, generate_synthetic, parse_hotpot_json, tokenize
from .losses import (
    LossWeights,
    reading_total,
    refine_ce,
    retrieval_bce,
    retrieval_total,
    soft_cross_entropy,
    type_ce,
)
from .metrics import MetricsReport, answer_em, answer_f1, classify_error, normalize_answer, set_em_f1
from .pipeline import (
    MultiHopQAModel,
    Prediction,
    TrainConfig,
    TrainingDiverged,
    decode_span,
    run_pipeline,
    train,
)
from .schedule import ScheduleConfig, epsilon_at, schedule_table
from .smoothing import (
    SmoothingMethod,
    SoftTarget,
    build_soft_target,
    f1_end_scores,
    f1_end_scores_brute,
    f1_start_scores,
    f1_start_scores_brute,
    f1_target,
    normalize_softmax,
    uniform_target,
    word_overlap_target,
)

__version__ = "0.1.0"

__all__ = [
    "Document",
    "Example",
    "GoldAnswer",
    "LossWeights",
    "MetricsReport",
    "MultiHopQAModel",
    "Prediction",
    "ScheduleConfig",
    "SmoothingMethod",
    "SoftTarget",
    "Span",
    "SyntheticConfig",
    "TrainConfig",
    "TrainingDiverged",
    "align_answer",
    "answer_em",
    "answer_f1",
    "build_soft_target",
    "check_distribution",
    "check_raw_scores",
    "classify_error",
    "decode_span",
    "epsilon_at",
    "f1_end_scores",
    "f1_end_scores_brute",
    "f1_start_scores",
    "f1_start_scores_brute",
    "f1_target",
    "generate_synthetic",
    "normalize_answer",
    "normalize_softmax",
    "parse_hotpot_json",
    "reading_total",
    "refine_ce",
    "retrieval_bce",
    "retrieval_total",
    "run_pipeline",
    "schedule_table",
    "set_em_f1",
    "soft_cross_entropy",
    "span_f1",
    "span_overlap",
    "tokenize",
    "train",
    "type_ce",
    "uniform_target",
    "word_overlap_target",
]
