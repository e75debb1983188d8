"""Soft-target construction for span extraction.

A span-extraction head is trained on a pair of per-position distributions
(start, end) over an answer-bearing context of length L. Besides plain
one-hot targets this module builds three smoothed alternatives:

* uniform smoothing — mix the one-hot target with 1/L everywhere;
* word-overlap smoothing — mix with a uniform distribution confined to the
  gold span (a stand-in for likelihood-estimated overlap weighting);
* overlap-F1 smoothing — score every position t by how well spans anchored
  there can match the gold span, then softmax-normalize.

The F1 raw score at position t sums the positional span-F1 of every
candidate span starting (resp. ending) at t:

    start_raw(t) = sum_{xi=t}^{L-1} f1((t, xi), gold)
    end_raw(t)   = sum_{xi=0}^{t}   f1((xi, t), gold)

``*_scores_brute`` evaluates these sums with the literal double loop and is
kept permanently as the test oracle. ``*_scores`` evaluates the same sums in
O(L) total: splitting by the position of t relative to the gold span
[s, e] turns each sum into terms of the form sum 2*c / (k + La) over a
contiguous range of k, i.e. a difference of harmonic numbers, because the
denominator len(candidate) + len(gold) walks an arithmetic progression with
step 1. With H(n) the n-th harmonic number, La = e - s + 1:

    t <  s: 2*La - 2*c1*(H(c1+La) - H(c1)) + 2*La*(H(L-t+La) - H(c1+La)),
            c1 = e - t + 1
    t in [s, e]: 2*m - 2*La*(H(m+La) - H(La)) + 2*m*(H(L-t+La) - H(m+La)),
            m = e - t + 1
    t >  e: 0   (every span starting after e misses the gold span)

and mirrored for end scores. All targets mix as
(1 - eps) * one_hot + eps * smoothing_distribution, so eps = 0 recovers the
one-hot target for every method and decaying-eps schedules apply uniformly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .core import Span, _f1_from_bounds, check_distribution

SMOOTHING_KINDS = ("one_hot", "uniform", "word_overlap", "f1")

DISTRIBUTION_CSV_HEADER = (
    "position",
    "raw_start",
    "raw_end",
    "norm_start",
    "norm_end",
    "target_start",
    "target_end",
)


@dataclass(frozen=True)
class SmoothingMethod:
    """Target-construction choice plus its smoothing weight.

    ``epsilon`` is ignored when kind is ``one_hot`` (the target is the pure
    one-hot distribution regardless).
    """

    kind: str
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in SMOOTHING_KINDS:
            raise ValueError(f"unknown smoothing kind {self.kind!r}")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon!r}")


@dataclass(frozen=True)
class SoftTarget:
    """Paired start/end target distributions of identical length."""

    start: np.ndarray
    end: np.ndarray

    def __post_init__(self):
        start = check_distribution(self.start, "start target")
        end = check_distribution(self.end, "end target")
        if start.shape != end.shape:
            raise ValueError("start and end targets must have the same length")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)

    @property
    def length(self) -> int:
        return self.start.size


def _check_gold(length: int, gold: Span) -> None:
    if length < 1:
        raise ValueError(f"context length must be >= 1, got {length}")
    if gold.end >= length:
        raise ValueError(f"gold span {gold} out of bounds for context length {length}")


def f1_start_scores_brute(length: int, gold: Span) -> np.ndarray:
    """Raw start scores by literal enumeration of every candidate span.

    Oracle implementation: O(L^2), kept as the reference the fast path is
    tested against.
    """
    _check_gold(length, gold)
    gs, ge = gold.start, gold.end
    out = np.zeros(length)
    for t in range(length):
        total = 0.0
        for xi in range(t, length):
            total += _f1_from_bounds(t, xi, gs, ge)
        out[t] = total
    return out


def f1_end_scores_brute(length: int, gold: Span) -> np.ndarray:
    """Raw end scores by literal enumeration (oracle twin of the start sum)."""
    _check_gold(length, gold)
    gs, ge = gold.start, gold.end
    out = np.zeros(length)
    for t in range(length):
        total = 0.0
        for xi in range(t + 1):
            total += _f1_from_bounds(xi, t, gs, ge)
        out[t] = total
    return out


def _harmonic_prefix(n: int) -> np.ndarray:
    # H[0] = 0, H[k] = 1 + 1/2 + ... + 1/k
    return np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1, n + 1))))


def f1_start_scores(length: int, gold: Span) -> np.ndarray:
    """Raw start scores via the closed-out case-split sums; O(L) total.

    Equals :func:`f1_start_scores_brute` elementwise within 1e-9.
    """
    _check_gold(length, gold)
    s, e = gold.start, gold.end
    la = gold.length
    h = _harmonic_prefix(length + la)
    out = np.zeros(length)

    t = np.arange(0, s)
    if t.size:
        c1 = e - t + 1
        out[t] = (
            2.0 * la
            - 2.0 * c1 * (h[c1 + la] - h[c1])
            + 2.0 * la * (h[length - t + la] - h[c1 + la])
        )

    t = np.arange(s, e + 1)
    m = e - t + 1
    out[t] = (
        2.0 * m
        - 2.0 * la * (h[m + la] - h[la])
        + 2.0 * m * (h[length - t + la] - h[m + la])
    )
    return out


def f1_end_scores(length: int, gold: Span) -> np.ndarray:
    """Raw end scores via the closed-out case-split sums; O(L) total."""
    _check_gold(length, gold)
    s, e = gold.start, gold.end
    la = gold.length
    h = _harmonic_prefix(length + la)
    out = np.zeros(length)

    t = np.arange(e + 1, length)
    if t.size:
        c2 = t - s + 1
        out[t] = (
            2.0 * la
            - 2.0 * c2 * (h[c2 + la] - h[c2])
            + 2.0 * la * (h[t + 1 + la] - h[c2 + la])
        )

    t = np.arange(s, e + 1)
    m = t - s + 1
    out[t] = (
        2.0 * m
        - 2.0 * la * (h[m + la] - h[la])
        + 2.0 * m * (h[t + 1 + la] - h[m + la])
    )
    return out


def normalize_softmax(raw) -> np.ndarray:
    """Softmax with max-subtraction; order-preserving and shift-invariant."""
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("softmax input must be a nonempty 1-d array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("softmax input must be finite")
    shifted = np.exp(arr - arr.max())
    return shifted / shifted.sum()


def one_hot(length: int, index: int) -> np.ndarray:
    if not (0 <= index < length):
        raise ValueError(f"index {index} out of range for length {length}")
    out = np.zeros(length)
    out[index] = 1.0
    return out


def uniform_target(length: int, gold_pos: int, epsilon: float) -> np.ndarray:
    """(1 - eps) * one_hot(gold_pos) + eps / L everywhere."""
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon!r}")
    out = (1.0 - epsilon) * one_hot(length, gold_pos)
    out += epsilon / length
    return out


def f1_target(length: int, gold: Span, epsilon: float) -> SoftTarget:
    """One-hot targets relaxed toward the softmax-normalized F1 scores."""
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon!r}")
    _check_gold(length, gold)
    start = (1.0 - epsilon) * one_hot(length, gold.start)
    start += epsilon * normalize_softmax(f1_start_scores(length, gold))
    end = (1.0 - epsilon) * one_hot(length, gold.end)
    end += epsilon * normalize_softmax(f1_end_scores(length, gold))
    return SoftTarget(start=start, end=end)


def word_overlap_target(length: int, gold: Span, epsilon: float) -> SoftTarget:
    """One-hot targets relaxed toward uniform mass over the gold span only."""
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon!r}")
    _check_gold(length, gold)
    span_uniform = np.zeros(length)
    span_uniform[gold.start : gold.end + 1] = 1.0 / gold.length
    start = (1.0 - epsilon) * one_hot(length, gold.start) + epsilon * span_uniform
    end = (1.0 - epsilon) * one_hot(length, gold.end) + epsilon * span_uniform
    return SoftTarget(start=start, end=end)


def build_soft_target(
    method: SmoothingMethod, length: int, gold: Span, epsilon: float | None = None
) -> SoftTarget:
    """Build the (start, end) target pair for a smoothing method.

    ``epsilon`` overrides ``method.epsilon`` when given, which is how
    per-epoch schedules inject the decayed weight.
    """
    eps = method.epsilon if epsilon is None else epsilon
    _check_gold(length, gold)
    if method.kind == "one_hot":
        return SoftTarget(start=one_hot(length, gold.start), end=one_hot(length, gold.end))
    if method.kind == "uniform":
        return SoftTarget(
            start=uniform_target(length, gold.start, eps),
            end=uniform_target(length, gold.end, eps),
        )
    if method.kind == "word_overlap":
        return word_overlap_target(length, gold, eps)
    return f1_target(length, gold, eps)


def _raw_columns(method: SmoothingMethod, length: int, gold: Span):
    if method.kind == "f1":
        return f1_start_scores(length, gold), f1_end_scores(length, gold)
    if method.kind == "word_overlap":
        ind = np.zeros(length)
        ind[gold.start : gold.end + 1] = 1.0
        return ind, ind.copy()
    if method.kind == "uniform":
        ones = np.ones(length)
        return ones, ones.copy()
    return one_hot(length, gold.start), one_hot(length, gold.end)


def smoothing_table(method: SmoothingMethod, length: int, gold: Span) -> dict[str, np.ndarray]:
    """Per-position dump columns: raw scores, normalized scores, final target.

    The normalized column is the smoothing distribution entering the eps-mix:
    the softmax of the raw scores for ``f1``, the raw column rescaled to sum 1
    otherwise.
    """
    raw_start, raw_end = _raw_columns(method, length, gold)
    if method.kind == "f1":
        norm_start = normalize_softmax(raw_start)
        norm_end = normalize_softmax(raw_end)
    else:
        norm_start = raw_start / raw_start.sum()
        norm_end = raw_end / raw_end.sum()
    target = build_soft_target(method, length, gold)
    return {
        "position": np.arange(length),
        "raw_start": raw_start,
        "raw_end": raw_end,
        "norm_start": norm_start,
        "norm_end": norm_end,
        "target_start": target.start,
        "target_end": target.end,
    }


def write_distribution_csv(path, table: dict[str, np.ndarray], config: dict) -> None:
    """Write the distribution dump: config comment, header, 9-decimal rows."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
        writer = csv.writer(fh)
        writer.writerow(DISTRIBUTION_CSV_HEADER)
        for i in range(len(table["position"])):
            row = [str(int(table["position"][i]))]
            row += [f"{table[col][i]:.9f}" for col in DISTRIBUTION_CSV_HEADER[1:]]
            writer.writerow(row)
