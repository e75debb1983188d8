"""Foundational types for tokens, spans, QA examples, and probability vectors.

Spans are inclusive token-index intervals ``[start, end]``; every overlap and
F1 quantity in the package is positional (token-index overlap inside one fixed
context), which keeps all downstream summations off-by-one free. String-level
answer F1 lives in :mod:`spansmooth.metrics` instead.

All real arithmetic is double precision. The validation helpers follow the
sklearn ``check_array`` idiom: validate, coerce to ``float64``, return the
array.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DISTRIBUTION_SUM_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class Span:
    """Inclusive token-index interval with 0 <= start <= end."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start <= self.end):
            raise ValueError(f"invalid span ({self.start}, {self.end}): need 0 <= start <= end")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


def _f1_from_bounds(ps: int, pe: int, gs: int, ge: int) -> float:
    # Scalar kernel shared by span_f1 and the brute-force smoothing oracle;
    # avoids Span construction inside O(L^2) enumeration loops.
    overlap = min(pe, ge) - max(ps, gs) + 1
    if overlap <= 0:
        return 0.0
    return 2.0 * overlap / ((pe - ps + 1) + (ge - gs + 1))


def span_overlap(a: Span, b: Span) -> int:
    """Number of token positions shared by two spans (0 if disjoint)."""
    return max(0, min(a.end, b.end) - max(a.start, b.start) + 1)


def span_f1(pred: Span, gold: Span) -> float:
    """Positional F1 between two spans: 2*overlap / (len(pred) + len(gold)).

    Symmetric in its arguments, in [0, 1], and equal to 1 iff the spans are
    identical.
    """
    return _f1_from_bounds(pred.start, pred.end, gold.start, gold.end)


def check_raw_scores(scores, name: str = "scores") -> np.ndarray:
    """Validate an unnormalized nonnegative score vector; returns float64 array."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d array")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if np.any(arr < 0):
        raise ValueError(f"{name} must be nonnegative")
    return arr


def check_distribution(probs, name: str = "distribution", tol: float = DISTRIBUTION_SUM_TOL) -> np.ndarray:
    """Validate a probability vector (nonnegative, sums to 1 within tol)."""
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d array")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if np.any(arr < 0):
        raise ValueError(f"{name} must be nonnegative")
    total = float(arr.sum())
    if abs(total - 1.0) > tol:
        raise ValueError(f"{name} must sum to 1 (got {total!r})")
    return arr


ANSWER_KINDS = ("span", "yes", "no")

# Categorical label used by the answer-type head: no=0, yes=1, span=2.
ANSWER_TYPE_LABELS = {"no": 0, "yes": 1, "span": 2}


@dataclass(frozen=True, slots=True)
class GoldAnswer:
    """Gold answer: either a context span or a yes/no verdict."""

    kind: str
    span: Span | None = None

    def __post_init__(self):
        if self.kind not in ANSWER_KINDS:
            raise ValueError(f"unknown answer kind {self.kind!r}")
        if self.kind == "span" and self.span is None:
            raise ValueError("span answers require a span")
        if self.kind != "span" and self.span is not None:
            raise ValueError("yes/no answers must not carry a span")

    @property
    def type_label(self) -> int:
        return ANSWER_TYPE_LABELS[self.kind]


@dataclass(frozen=True)
class Document:
    title: str
    sentences: tuple[tuple[str, ...], ...]

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(tok for sent in self.sentences for tok in sent)


@dataclass(frozen=True)
class Example:
    """One QA instance: question, candidate documents, and gold annotations.

    ``gold_doc_flags`` marks exactly two documents as required evidence;
    ``supporting_flags`` mirrors the per-document sentence structure and may
    only flag sentences inside gold documents. Span answers are indexed into
    the gold-pair context: the two gold documents' tokens concatenated in
    document order.
    """

    id: str
    question: tuple[str, ...]
    documents: tuple[Document, ...]
    gold_doc_flags: tuple[int, ...]
    supporting_flags: tuple[tuple[int, ...], ...]
    answer: GoldAnswer
    answer_text: str
    _validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if len(self.documents) != len(self.gold_doc_flags):
            raise ValueError("gold_doc_flags length must match documents")
        if len(self.documents) != len(self.supporting_flags):
            raise ValueError("supporting_flags length must match documents")
        for doc, flags in zip(self.documents, self.supporting_flags):
            if len(doc.sentences) != len(flags):
                raise ValueError(f"sentence flags mismatch in document {doc.title!r}")
        if not self._validate:
            return
        if sum(self.gold_doc_flags) != 2:
            raise ValueError(f"example {self.id!r}: expected exactly 2 gold documents")
        for doc, gold, flags in zip(self.documents, self.gold_doc_flags, self.supporting_flags):
            if not gold and any(flags):
                raise ValueError(f"example {self.id!r}: supporting sentence outside gold document {doc.title!r}")
        if self.answer.kind == "span":
            bound = len(self.gold_context_tokens())
            if self.answer.span.end >= bound:
                raise ValueError(f"example {self.id!r}: answer span exceeds gold context (L={bound})")

    def gold_doc_indices(self) -> tuple[int, ...]:
        return tuple(i for i, flag in enumerate(self.gold_doc_flags) if flag)

    def gold_context_tokens(self) -> tuple[str, ...]:
        """Tokens of the two gold documents concatenated in document order."""
        return tuple(tok for i in self.gold_doc_indices() for tok in self.documents[i].tokens)

    def gold_doc_titles(self) -> set[str]:
        return {self.documents[i].title for i in self.gold_doc_indices()}

    def supporting_ids(self) -> set[tuple[str, int]]:
        """(title, sentence index) pairs of annotated supporting sentences."""
        return {
            (doc.title, j)
            for doc, flags in zip(self.documents, self.supporting_flags)
            for j, flag in enumerate(flags)
            if flag
        }
