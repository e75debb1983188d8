"""Answer, document-retrieval, and supporting-fact metrics plus the
answer-error taxonomy.

Answer strings are normalized (lowercase, punctuation stripped, articles
removed, whitespace collapsed) before comparison; answer F1 is token-multiset
precision/recall. Wrong answers split into two categories: span errors
(some overlap with the gold answer once stop words are excluded — the
prediction found the right neighborhood but the wrong boundaries) and
multi-hop errors (no overlap at all — the reasoning landed elsewhere).
"""

from __future__ import annotations

import json
import string
from collections import Counter
from dataclasses import asdict, dataclass

ARTICLES = frozenset({"a", "an", "the"})

# Fixed 30-word stop-word list used by the error classifier. The exact
# membership is part of the classifier's contract: changing it reshuffles
# the span-error / multi-hop-error split.
STOPWORDS = frozenset(
    (
        "a", "an", "the", "and", "or", "but", "if", "of", "at", "by",
        "for", "with", "to", "from", "in", "on", "is", "are", "was", "were",
        "be", "been", "it", "its", "this", "that", "these", "those", "as", "not",
    )
)

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)

ERROR_CORRECT = "correct"
ERROR_ANSWER_SPAN = "answer_span_error"
ERROR_MULTIHOP = "multihop_error"


def normalize_answer(text: str) -> str:
    """Lowercase, drop punctuation, drop articles, collapse whitespace."""
    text = text.lower().translate(_PUNCT_TABLE)
    return " ".join(tok for tok in text.split() if tok not in ARTICLES)


def _is_yes_no(normalized: str) -> bool:
    return normalized in ("yes", "no")


def answer_em(prediction: str, gold: str) -> float:
    """1.0 iff the normalized strings match exactly."""
    return float(normalize_answer(prediction) == normalize_answer(gold))


def answer_f1(prediction: str, gold: str) -> tuple[float, float, float]:
    """Token-multiset (f1, precision, recall) over normalized answers.

    Yes/no answers follow the exact-match convention: if either side
    normalizes to "yes" or "no", the score is all-ones on a match and
    all-zeros otherwise.
    """
    pred_norm = normalize_answer(prediction)
    gold_norm = normalize_answer(gold)
    if _is_yes_no(pred_norm) or _is_yes_no(gold_norm):
        return (1.0, 1.0, 1.0) if pred_norm == gold_norm else (0.0, 0.0, 0.0)
    pred_tokens = pred_norm.split()
    gold_tokens = gold_norm.split()
    if not pred_tokens or not gold_tokens:
        return (1.0, 1.0, 1.0) if pred_norm == gold_norm else (0.0, 0.0, 0.0)
    overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    if overlap == 0:
        return (0.0, 0.0, 0.0)
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    f1 = 2.0 * overlap / (len(pred_tokens) + len(gold_tokens))
    return (f1, precision, recall)


def set_em_f1(predicted: set, gold: set) -> tuple[float, float]:
    """Exact-match and overlap-F1 between two finite identifier sets."""
    predicted = set(predicted)
    gold = set(gold)
    em = float(predicted == gold)
    if not predicted and not gold:
        return em, 1.0
    if not predicted or not gold:
        return em, 0.0
    overlap = len(predicted & gold)
    f1 = 2.0 * overlap / (len(predicted) + len(gold))
    return em, f1


def classify_error(prediction: str, gold: str) -> str:
    """Partition a prediction into correct / answer-span / multi-hop.

    Correct means normalized exact match. Otherwise the two error classes
    split on whether any non-stop-word token is shared with the gold answer.
    """
    if normalize_answer(prediction) == normalize_answer(gold):
        return ERROR_CORRECT
    pred_tokens = {t for t in normalize_answer(prediction).split() if t not in STOPWORDS}
    gold_tokens = {t for t in normalize_answer(gold).split() if t not in STOPWORDS}
    if pred_tokens & gold_tokens:
        return ERROR_ANSWER_SPAN
    return ERROR_MULTIHOP


@dataclass(frozen=True)
class MetricsReport:
    """Aggregate evaluation over a prediction set."""

    answer_em: float
    answer_f1: float
    doc_em: float
    doc_f1: float
    sup_em: float
    sup_f1: float
    n_examples: int
    answer_span_errors: int
    multihop_errors: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def aggregate_metrics(records) -> MetricsReport:
    """Build a report from per-example (pred_answer, gold_answer, pred_docs,
    gold_docs, pred_sup, gold_sup) tuples."""
    records = list(records)
    n = len(records)
    if n == 0:
        return MetricsReport(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0, 0, 0)
    sums = {"aem": 0.0, "af1": 0.0, "dem": 0.0, "df1": 0.0, "sem": 0.0, "sf1": 0.0}
    span_errors = 0
    multihop_errors = 0
    for pred_ans, gold_ans, pred_docs, gold_docs, pred_sup, gold_sup in records:
        sums["aem"] += answer_em(pred_ans, gold_ans)
        sums["af1"] += answer_f1(pred_ans, gold_ans)[0]
        dem, df1 = set_em_f1(pred_docs, gold_docs)
        sums["dem"] += dem
        sums["df1"] += df1
        sem, sf1 = set_em_f1(pred_sup, gold_sup)
        sums["sem"] += sem
        sums["sf1"] += sf1
        kin = classify_error(pred_ans, gold_ans)
        if kin == ERROR_ANSWER_SPAN:
            span_errors += 1
        elif kin == ERROR_MULTIHOP:
            multihop_errors += 1
    return MetricsReport(
        answer_em=sums["aem"] / n,
        answer_f1=sums["af1"] / n,
        doc_em=sums["dem"] / n,
        doc_f1=sums["df1"] / n,
        sup_em=sums["sem"] / n,
        sup_f1=sums["sf1"] / n,
        n_examples=n,
        answer_span_errors=span_errors,
        multihop_errors=multihop_errors,
    )
