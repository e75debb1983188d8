"""Training objectives: soft-target cross-entropy for the span heads, binary
cross-entropy for document retrieval, categorical cross-entropy for pair
refinement and answer-type selection, and the two weighted totals.

Every probability entering a log is clamped to [1e-12, 1 - 1e-12] so losses
stay finite; log-probability inputs are validated to be normalized
(log-sum-exp zero within 1e-6).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import check_distribution

PROB_CLAMP = 1e-12
LOGSUMEXP_TOL = 1e-6


@dataclass(frozen=True)
class LossWeights:
    """Nonnegative coefficients of the loss totals (all default to 1)."""

    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 1.0
    lambda4: float = 1.0
    lambda5: float = 1.0

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3", "lambda4", "lambda5"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


def clamp_probability(p):
    """Clamp probabilities away from 0 and 1 before taking logs."""
    return np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)


def _check_log_probs(log_probs, name: str) -> np.ndarray:
    arr = np.asarray(log_probs, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d array")
    if np.any(np.isnan(arr)) or np.any(arr == np.inf):
        raise ValueError(f"{name} must not contain NaN or +inf")
    finite = arr[np.isfinite(arr)]
    if finite.size == 0:
        raise ValueError(f"{name} has no finite entries")
    m = finite.max()
    lse = m + math.log(np.exp(finite - m).sum())
    if abs(lse) > LOGSUMEXP_TOL:
        raise ValueError(f"{name} is not a normalized log-distribution (logsumexp={lse!r})")
    return arr


def soft_cross_entropy(target, predicted_log_probs) -> float:
    """-sum_k target_k * log p_k for a soft target distribution.

    Reduces to -log p(gold) exactly when the target is one-hot; positions
    with zero target mass are excluded from the sum so the prediction may
    legitimately assign them log-probability -inf.
    """
    target = check_distribution(target, "target")
    logp = _check_log_probs(predicted_log_probs, "predicted_log_probs")
    if target.shape != logp.shape:
        raise ValueError("target and predicted_log_probs must have the same length")
    mask = target > 0
    return float(-(target[mask] * logp[mask]).sum())


def retrieval_bce(labels, probs) -> float:
    """Mean binary cross-entropy over documents.

    Labels are usually {0, 1} but may be soft values in [0, 1] (smoothed
    binary targets use (1 - eps) * y + eps / 2).
    """
    y = np.asarray(labels, dtype=np.float64)
    p = np.asarray(probs, dtype=np.float64)
    if y.shape != p.shape or y.ndim != 1 or y.size == 0:
        raise ValueError("labels and probs must be nonempty 1-d arrays of equal length")
    if np.any(y < 0) or np.any(y > 1):
        raise ValueError("labels must lie in [0, 1]")
    if not np.all(np.isfinite(p)):
        raise ValueError("probs must be finite")
    p = clamp_probability(p)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def refine_ce(labels, pair_log_probs) -> float:
    """-log p(gold pair) over the candidate document pairs.

    Exactly one pair must be labeled 1; the pair scores must already be
    softmax-normalized over all candidates.
    """
    y = np.asarray(labels)
    logp = _check_log_probs(pair_log_probs, "pair_log_probs")
    if y.shape != logp.shape:
        raise ValueError("labels and pair_log_probs must have the same length")
    positives = np.flatnonzero(y == 1)
    if positives.size != 1 or not np.all((y == 0) | (y == 1)):
        raise ValueError("exactly one pair must be labeled 1")
    return float(-logp[positives[0]])


def type_ce(label: int, type_log_probs) -> float:
    """-log p(label) over the three answer types (no=0, yes=1, span=2)."""
    logp = _check_log_probs(type_log_probs, "type_log_probs")
    if logp.size != 3:
        raise ValueError("type_log_probs must have length 3")
    if label not in (0, 1, 2):
        raise ValueError(f"label must be 0, 1, or 2, got {label!r}")
    return float(-logp[label])


def retrieval_total(l_retrieve: float, l_refine: float, weights: LossWeights) -> float:
    """lambda1 * retrieval loss + lambda2 * refinement loss."""
    return weights.lambda1 * l_retrieve + weights.lambda2 * l_refine


def reading_total(
    l_type: float, l_start: float, l_end: float, l_sup: float, weights: LossWeights
) -> float:
    """lambda3 * type + lambda4 * (start + end) + lambda5 * support."""
    return (
        weights.lambda3 * l_type
        + weights.lambda4 * (l_start + l_end)
        + weights.lambda5 * l_sup
    )
