"""Toy multi-hop QA pipeline: retrieve -> refine -> read.

The encoder is a mean-pooled learned token-embedding table; every head is a
linear probe on top of it:

* retrieval: sigmoid of a linear score of encode(question + document), one
  probability per candidate document, top-K kept;
* refinement: softmax over the C(K, 2) document pairs, scored from
  encode(question + doc_i + doc_j);
* reader: per-token start/end logits (dot of token embedding with a head
  vector), a 3-way answer-type head on the pooled question+context
  representation, and a per-sentence binary supporting-fact head on pooled
  sentence representations.

Gradients are written by hand and checked against central finite differences
(the loss-only functions in this module recompute every loss through
:mod:`spansmooth.losses`, giving the check an independent route). Training
is plain mini-batch gradient descent with decoupled weight decay and is
bit-deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from . import losses as L
from .core import Example, Span
from .metrics import aggregate_metrics
from .schedule import ScheduleConfig, epsilon_at
from .smoothing import SmoothingMethod, build_soft_target

LOG_FIELDS = (
    "epoch",
    "epsilon",
    "loss_retrieve",
    "loss_refine",
    "loss_type",
    "loss_span",
    "loss_sup",
    "dev_answer_em",
    "dev_answer_f1",
    "dev_sup_em",
    "dev_sup_f1",
    "dev_doc_em",
    "dev_doc_f1",
)


class TrainingDiverged(RuntimeError):
    """Raised when a loss becomes non-finite during training."""


# ---------------------------------------------------------------------------
# Vocabulary and compiled examples
# ---------------------------------------------------------------------------


class Vocabulary:
    """Deterministic token <-> id mapping built from a dataset."""

    def __init__(self, tokens):
        self._token_to_id = {tok: i for i, tok in enumerate(tokens)}

    @classmethod
    def build(cls, examples) -> "Vocabulary":
        seen = set()
        for ex in examples:
            seen.update(ex.question)
            for doc in ex.documents:
                seen.update(doc.tokens)
        return cls(sorted(seen))

    def __len__(self) -> int:
        return len(self._token_to_id)

    def encode(self, tokens) -> np.ndarray:
        try:
            return np.array([self._token_to_id[t] for t in tokens], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"unknown token {exc.args[0]!r}") from exc

    def tokens(self) -> list[str]:
        return list(self._token_to_id)


@dataclass(frozen=True)
class CompiledExample:
    """Token-id view of an Example, precomputed once per dataset."""

    example: Example
    question_ids: np.ndarray
    doc_ids: tuple[np.ndarray, ...]
    retrieval_ids: tuple[np.ndarray, ...]  # question + document, per document
    sentence_ids: tuple[tuple[np.ndarray, ...], ...]
    gold_pair: tuple[int, int]

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)


def compile_example(example: Example, vocab: Vocabulary) -> CompiledExample:
    q_ids = vocab.encode(example.question)
    doc_ids = tuple(vocab.encode(doc.tokens) for doc in example.documents)
    return CompiledExample(
        example=example,
        question_ids=q_ids,
        doc_ids=doc_ids,
        retrieval_ids=tuple(np.concatenate((q_ids, ids)) for ids in doc_ids),
        sentence_ids=tuple(
            tuple(vocab.encode(sent) for sent in doc.sentences) for doc in example.documents
        ),
        gold_pair=example.gold_doc_indices(),
    )


def pair_context_ids(cex: CompiledExample, pair: tuple[int, int]) -> np.ndarray:
    lo, hi = sorted(pair)
    return np.concatenate((cex.doc_ids[lo], cex.doc_ids[hi]))


def pair_sentences(cex: CompiledExample, pair: tuple[int, int]):
    """(doc index, sentence index, token ids) for the pair, in context order."""
    lo, hi = sorted(pair)
    out = []
    for doc_idx in (lo, hi):
        for sent_idx, ids in enumerate(cex.sentence_ids[doc_idx]):
            out.append((doc_idx, sent_idx, ids))
    return out


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------


@dataclass
class ToyModelParams:
    """All trainable arrays; biases are 0-d (or length-3) arrays."""

    token_embeddings: np.ndarray
    retrieval_w: np.ndarray
    retrieval_b: np.ndarray
    pair_w: np.ndarray
    pair_b: np.ndarray
    type_w: np.ndarray
    type_b: np.ndarray
    start_w: np.ndarray
    end_w: np.ndarray
    support_w: np.ndarray
    support_b: np.ndarray

    GROUPS = (
        "token_embeddings",
        "retrieval_w",
        "retrieval_b",
        "pair_w",
        "pair_b",
        "type_w",
        "type_b",
        "start_w",
        "end_w",
        "support_w",
        "support_b",
    )

    # decoupled weight decay applies to weights, not biases
    DECAYED = frozenset(
        {"token_embeddings", "retrieval_w", "pair_w", "type_w", "start_w", "end_w", "support_w"}
    )

    def groups(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.GROUPS}

    def copy(self) -> "ToyModelParams":
        return ToyModelParams(**{name: getattr(self, name).copy() for name in self.GROUPS})

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(getattr(self, name))) for name in self.GROUPS)


def init_params(vocab_size: int, dim: int, rng, scale: float = 0.1, bias_scale: float = 0.0) -> ToyModelParams:
    def bias(shape=()):
        return rng.normal(0.0, bias_scale, shape) if bias_scale > 0 else np.zeros(shape)

    return ToyModelParams(
        token_embeddings=rng.normal(0.0, scale, (vocab_size, dim)),
        retrieval_w=rng.normal(0.0, scale, dim),
        retrieval_b=bias(),
        pair_w=rng.normal(0.0, scale, dim),
        pair_b=bias(),
        type_w=rng.normal(0.0, scale, (3, dim)),
        type_b=bias(3),
        start_w=rng.normal(0.0, scale, dim),
        end_w=rng.normal(0.0, scale, dim),
        support_w=rng.normal(0.0, scale, dim),
        support_b=bias(),
    )


def zero_grads(params: ToyModelParams) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(arr) for name, arr in params.groups().items()}


# ---------------------------------------------------------------------------
# Forward passes
# ---------------------------------------------------------------------------


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max()
    return shifted - np.log(np.exp(shifted).sum())


def encode(token_ids, params: ToyModelParams) -> np.ndarray:
    """Mean of the embedding rows of a nonempty token-id sequence."""
    ids = np.asarray(token_ids)
    if ids.size == 0:
        raise ValueError("cannot encode an empty token sequence")
    if ids.min() < 0 or ids.max() >= params.token_embeddings.shape[0]:
        raise ValueError("unknown token id")
    return params.token_embeddings[ids].mean(axis=0)


def retrieve_probs(cex: CompiledExample, params: ToyModelParams) -> np.ndarray:
    """Per-document relevance probability, sigmoid of the retrieval head."""
    scores = np.array(
        [float(params.retrieval_w @ encode(ids, params)) + float(params.retrieval_b) for ids in cex.retrieval_ids]
    )
    return _sigmoid(scores)


def select_top_k(probs, k: int) -> list[int]:
    """Indices of the k highest probabilities, ties broken by lower index.

    Returned in ascending index order (the selection is a set; pair
    enumeration wants deterministic ordering).
    """
    probs = np.asarray(probs)
    k = min(k, probs.size)
    order = np.argsort(-probs, kind="stable")[:k]
    return sorted(int(i) for i in order)


def candidate_pairs(doc_indices) -> list[tuple[int, int]]:
    docs = sorted(doc_indices)
    return [(docs[i], docs[j]) for i in range(len(docs)) for j in range(i + 1, len(docs))]


def refine_log_probs(cex: CompiledExample, pairs, params: ToyModelParams) -> np.ndarray:
    """Log-probabilities over candidate document pairs (softmax over pairs)."""
    if not pairs:
        raise ValueError("refinement needs at least one candidate pair")
    logits = np.empty(len(pairs))
    for p, (i, j) in enumerate(pairs):
        ids = np.concatenate((cex.question_ids, cex.doc_ids[i], cex.doc_ids[j]))
        logits[p] = float(params.pair_w @ encode(ids, params)) + float(params.pair_b)
    return _log_softmax(logits)


@dataclass(frozen=True)
class ReaderOutput:
    type_log_probs: np.ndarray  # (3,)
    start_logits: np.ndarray  # (L,)
    end_logits: np.ndarray  # (L,)
    support_probs: np.ndarray  # one per sentence of the pair


def reader_forward(cex: CompiledExample, pair: tuple[int, int], params: ToyModelParams) -> ReaderOutput:
    ctx_ids = pair_context_ids(cex, pair)
    if ctx_ids.size == 0:
        raise ValueError("empty reader context")
    ctx_emb = params.token_embeddings[ctx_ids]
    pooled = encode(np.concatenate((cex.question_ids, ctx_ids)), params)
    type_logits = params.type_w @ pooled + params.type_b
    support = np.array(
        [
            float(params.support_w @ encode(ids, params)) + float(params.support_b)
            for _, _, ids in pair_sentences(cex, pair)
        ]
    )
    return ReaderOutput(
        type_log_probs=_log_softmax(type_logits),
        start_logits=ctx_emb @ params.start_w,
        end_logits=ctx_emb @ params.end_w,
        support_probs=_sigmoid(support),
    )


def decode_span(start_logits, end_logits, max_answer_len: int) -> Span:
    """Best (start, end) with end - start < max_answer_len.

    Maximizes start_logits[s] + end_logits[e]; ties resolve to the smallest
    start, then the smallest end.
    """
    start_logits = np.asarray(start_logits)
    end_logits = np.asarray(end_logits)
    if start_logits.size == 0:
        raise ValueError("cannot decode an empty context")
    if max_answer_len < 1:
        raise ValueError("max_answer_len must be >= 1")
    best = (0, 0)
    best_score = -np.inf
    for s in range(start_logits.size):
        window = end_logits[s : s + max_answer_len]
        j = int(np.argmax(window))
        score = start_logits[s] + window[j]
        if score > best_score:
            best_score = score
            best = (s, s + j)
    return Span(*best)


# ---------------------------------------------------------------------------
# Training targets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainingTargets:
    """Per-example targets at a given smoothing weight, for the gold pair."""

    retrieval_labels: np.ndarray
    type_label: int
    start_target: np.ndarray | None
    end_target: np.ndarray | None
    support_labels: np.ndarray


def smooth_binary_labels(labels: np.ndarray, epsilon: float) -> np.ndarray:
    """Binary analogue of the eps-mix: (1 - eps) * y + eps / 2."""
    return (1.0 - epsilon) * labels + 0.5 * epsilon


def build_targets(
    cex: CompiledExample,
    method: SmoothingMethod,
    epsilon: float,
    smooth_binary: bool = False,
) -> TrainingTargets:
    ex = cex.example
    retrieval = np.asarray(ex.gold_doc_flags, dtype=np.float64)
    support = np.array(
        [float(ex.supporting_flags[d][s]) for d, s, _ in pair_sentences(cex, cex.gold_pair)]
    )
    if smooth_binary:
        retrieval = smooth_binary_labels(retrieval, epsilon)
        support = smooth_binary_labels(support, epsilon)
    start_target = end_target = None
    if ex.answer.kind == "span":
        length = int(pair_context_ids(cex, cex.gold_pair).size)
        target = build_soft_target(method, length, ex.answer.span, epsilon=epsilon)
        start_target, end_target = target.start, target.end
    return TrainingTargets(
        retrieval_labels=retrieval,
        type_label=ex.answer.type_label,
        start_target=start_target,
        end_target=end_target,
        support_labels=support,
    )


# ---------------------------------------------------------------------------
# Losses (pure, for finite-difference checking) and hand-written gradients
# ---------------------------------------------------------------------------


def example_retrieval_loss(
    cex: CompiledExample,
    cand_docs,
    retrieval_labels,
    params: ToyModelParams,
    weights: L.LossWeights,
) -> float:
    """Weighted retrieval + refinement loss with the candidate set held fixed.

    Refinement contributes 0 when the gold pair is not among the candidate
    pairs (the example is skipped for refinement).
    """
    probs = retrieve_probs(cex, params)
    l_ret = L.retrieval_bce(retrieval_labels, probs)
    pairs = candidate_pairs(cand_docs)
    l_ref = 0.0
    if tuple(cex.gold_pair) in pairs:
        logq = refine_log_probs(cex, pairs, params)
        labels = np.array([1 if p == tuple(cex.gold_pair) else 0 for p in pairs])
        l_ref = L.refine_ce(labels, logq)
    return L.retrieval_total(l_ret, l_ref, weights)


def example_reading_loss(
    cex: CompiledExample,
    pair,
    targets: TrainingTargets,
    params: ToyModelParams,
    weights: L.LossWeights,
) -> float:
    """Weighted reading loss on a fixed document pair."""
    out = reader_forward(cex, pair, params)
    l_type = L.type_ce(targets.type_label, out.type_log_probs)
    l_start = l_end = 0.0
    if targets.start_target is not None:
        l_start = L.soft_cross_entropy(targets.start_target, _log_softmax(out.start_logits))
        l_end = L.soft_cross_entropy(targets.end_target, _log_softmax(out.end_logits))
    l_sup = L.retrieval_bce(targets.support_labels, out.support_probs)
    return L.reading_total(l_type, l_start, l_end, l_sup, weights)


def _scatter_embedding_grad(grads, ids, vec):
    np.add.at(grads["token_embeddings"], ids, vec)


def accumulate_retrieval_grads(
    cex: CompiledExample,
    cand_docs,
    retrieval_labels,
    params: ToyModelParams,
    weights: L.LossWeights,
    grads: dict[str, np.ndarray],
    scale: float = 1.0,
) -> tuple[float, float, bool]:
    """Add gradients of the weighted retrieval total into ``grads``.

    Returns (retrieval loss, refinement loss, refinement_skipped); losses are
    the unweighted components.
    """
    emb = params.token_embeddings
    labels = np.asarray(retrieval_labels, dtype=np.float64)
    m = len(cex.retrieval_ids)

    l_ret_terms = 0.0
    w_scale = weights.lambda1 * scale
    dw = np.zeros_like(params.retrieval_w)
    db = 0.0
    for i, ids in enumerate(cex.retrieval_ids):
        e_i = emb[ids].mean(axis=0)
        z = float(params.retrieval_w @ e_i) + float(params.retrieval_b)
        p = float(_sigmoid(z))
        pc = float(L.clamp_probability(p))
        l_ret_terms += -(labels[i] * np.log(pc) + (1.0 - labels[i]) * np.log(1.0 - pc))
        dz = (p - labels[i]) / m
        dw += dz * e_i
        db += dz
        _scatter_embedding_grad(grads, ids, (w_scale * dz / ids.size) * params.retrieval_w)
    grads["retrieval_w"] += w_scale * dw
    grads["retrieval_b"] += w_scale * db
    l_ret = l_ret_terms / m

    pairs = candidate_pairs(cand_docs)
    gold = tuple(cex.gold_pair)
    if gold not in pairs:
        return l_ret, 0.0, True

    p_scale = weights.lambda2 * scale
    pair_ids = [np.concatenate((cex.question_ids, cex.doc_ids[i], cex.doc_ids[j])) for i, j in pairs]
    reps = np.stack([emb[ids].mean(axis=0) for ids in pair_ids])
    logits = reps @ params.pair_w + float(params.pair_b)
    logq = _log_softmax(logits)
    gold_idx = pairs.index(gold)
    l_ref = float(-logq[gold_idx])
    dlogits = np.exp(logq)
    dlogits[gold_idx] -= 1.0
    grads["pair_w"] += p_scale * (dlogits @ reps)
    grads["pair_b"] += p_scale * dlogits.sum()
    for dz, ids in zip(dlogits, pair_ids):
        _scatter_embedding_grad(grads, ids, (p_scale * dz / ids.size) * params.pair_w)
    return l_ret, l_ref, False


def accumulate_reading_grads(
    cex: CompiledExample,
    pair,
    targets: TrainingTargets,
    params: ToyModelParams,
    weights: L.LossWeights,
    grads: dict[str, np.ndarray],
    scale: float = 1.0,
) -> tuple[float, float, float]:
    """Add gradients of the weighted reading total into ``grads``.

    Returns (type loss, start+end loss, support loss), unweighted.
    """
    emb = params.token_embeddings
    ctx_ids = pair_context_ids(cex, pair)
    ctx_emb = emb[ctx_ids]

    # answer-type head on pooled question+context
    pooled_ids = np.concatenate((cex.question_ids, ctx_ids))
    pooled = emb[pooled_ids].mean(axis=0)
    type_logits = params.type_w @ pooled + params.type_b
    type_logq = _log_softmax(type_logits)
    l_type = float(-type_logq[targets.type_label])
    dlogits = np.exp(type_logq)
    dlogits[targets.type_label] -= 1.0
    t_scale = weights.lambda3 * scale
    grads["type_w"] += t_scale * np.outer(dlogits, pooled)
    grads["type_b"] += t_scale * dlogits
    dpooled = params.type_w.T @ dlogits
    _scatter_embedding_grad(grads, pooled_ids, (t_scale / pooled_ids.size) * dpooled[None, :])

    # span heads (span-typed examples only)
    l_span = 0.0
    if targets.start_target is not None:
        s_scale = weights.lambda4 * scale
        for head, target in (("start_w", targets.start_target), ("end_w", targets.end_target)):
            w = getattr(params, head)
            logits = ctx_emb @ w
            logq = _log_softmax(logits)
            l_span += float(-(target[target > 0] * logq[target > 0]).sum())
            dlogit = np.exp(logq) - target
            grads[head] += s_scale * (ctx_emb.T @ dlogit)
            _scatter_embedding_grad(grads, ctx_ids, s_scale * np.outer(dlogit, w))

    # supporting-fact head on pooled sentences
    sents = pair_sentences(cex, pair)
    n_sent = len(sents)
    sup_scale = weights.lambda5 * scale
    l_sup_terms = 0.0
    dw = np.zeros_like(params.support_w)
    db = 0.0
    for (_, _, ids), y in zip(sents, targets.support_labels):
        u = emb[ids].mean(axis=0)
        z = float(params.support_w @ u) + float(params.support_b)
        p = float(_sigmoid(z))
        pc = float(L.clamp_probability(p))
        l_sup_terms += -(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))
        dz = (p - y) / n_sent
        dw += dz * u
        db += dz
        _scatter_embedding_grad(grads, ids, (sup_scale * dz / ids.size) * params.support_w)
    grads["support_w"] += sup_scale * dw
    grads["support_b"] += sup_scale * db
    l_sup = l_sup_terms / n_sent

    return l_type, l_span, l_sup


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    epochs: int = 16
    batch_size: int = 16
    learning_rate: float = 0.05
    weight_decay: float = 0.01
    k_docs: int = 3
    embedding_dim: int = 32
    max_answer_len: int = 4
    init_scale: float = 0.1
    smoothing: SmoothingMethod = field(default_factory=lambda: SmoothingMethod("one_hot"))
    schedule: ScheduleConfig | None = None
    loss_weights: L.LossWeights = field(default_factory=L.LossWeights)
    smooth_binary: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.k_docs < 2:
            raise ValueError("k_docs must be >= 2")
        if self.max_answer_len < 1:
            raise ValueError("max_answer_len must be >= 1")
        if self.schedule is not None and self.schedule.n_epochs < self.epochs:
            raise ValueError("schedule is shorter than the training run")

    def resolved_schedule(self) -> ScheduleConfig:
        if self.schedule is not None:
            return self.schedule
        return ScheduleConfig(kind="constant", epsilon0=self.smoothing.epsilon, n_epochs=self.epochs)


@dataclass(frozen=True)
class Prediction:
    example_id: str
    answer_text: str
    doc_titles: set[str]
    support_ids: set[tuple[str, int]]
    answer_type: int
    span: Span | None


@dataclass
class TrainResult:
    params: ToyModelParams
    vocab: Vocabulary
    log: list[dict]
    refine_skipped: int


def run_pipeline(
    cex: CompiledExample, params: ToyModelParams, config: TrainConfig
) -> Prediction:
    """Full cascade on one example: retrieve top-K, refine to a pair, read."""
    probs = retrieve_probs(cex, params)
    selected = select_top_k(probs, config.k_docs)
    pairs = candidate_pairs(selected)
    logq = refine_log_probs(cex, pairs, params)
    pair = pairs[int(np.argmax(logq))]
    out = reader_forward(cex, pair, params)

    answer_type = int(np.argmax(out.type_log_probs))
    span = None
    if answer_type == 0:
        answer_text = "no"
    elif answer_type == 1:
        answer_text = "yes"
    else:
        span = decode_span(out.start_logits, out.end_logits, config.max_answer_len)
        lo, hi = pair
        ctx_tokens = cex.example.documents[lo].tokens + cex.example.documents[hi].tokens
        answer_text = " ".join(ctx_tokens[span.start : span.end + 1])

    support = {
        (cex.example.documents[d].title, s)
        for (d, s, _), p in zip(pair_sentences(cex, pair), out.support_probs)
        if p > 0.5
    }
    titles = {cex.example.documents[i].title for i in pair}
    return Prediction(
        example_id=cex.example.id,
        answer_text=answer_text,
        doc_titles=titles,
        support_ids=support,
        answer_type=answer_type,
        span=span,
    )


def evaluate(compiled_dev, params, config) -> dict[str, float]:
    records = []
    for cex in compiled_dev:
        pred = run_pipeline(cex, params, config)
        ex = cex.example
        records.append(
            (pred.answer_text, ex.answer_text, pred.doc_titles, ex.gold_doc_titles(), pred.support_ids, ex.supporting_ids())
        )
    report = aggregate_metrics(records)
    return {
        "dev_answer_em": report.answer_em,
        "dev_answer_f1": report.answer_f1,
        "dev_sup_em": report.sup_em,
        "dev_sup_f1": report.sup_f1,
        "dev_doc_em": report.doc_em,
        "dev_doc_f1": report.doc_f1,
    }


def train(dataset, config: TrainConfig, dev=None, vocab: Vocabulary | None = None) -> TrainResult:
    """Train the toy pipeline; deterministic given the seed.

    The reader heads are trained on the gold document pair; retrieval
    candidates for the refinement loss come from the current model's top-K
    (examples whose top-K misses the gold pair are skipped for refinement
    and counted). Aborts with :class:`TrainingDiverged` if any loss goes
    non-finite.
    """
    dataset = list(dataset)
    if not dataset:
        raise ValueError("dataset must be nonempty")
    dev = list(dev) if dev else []
    if vocab is None:
        vocab = Vocabulary.build(dataset + dev)
    compiled = [compile_example(ex, vocab) for ex in dataset]
    compiled_dev = [compile_example(ex, vocab) for ex in dev]

    rng = np.random.default_rng(config.seed)
    params = init_params(len(vocab), config.embedding_dim, rng, scale=config.init_scale)
    schedule = config.resolved_schedule()
    weights = config.loss_weights
    lr = config.learning_rate
    decay_factor = 1.0 - lr * config.weight_decay

    log = []
    refine_skipped_total = 0
    for epoch in range(config.epochs):
        eps = epsilon_at(schedule, epoch)
        order = rng.permutation(len(compiled))
        sums = {"retrieve": 0.0, "refine": 0.0, "type": 0.0, "span": 0.0, "sup": 0.0}
        counts = {"retrieve": 0, "refine": 0, "type": 0, "span": 0, "sup": 0}

        for lo in range(0, len(order), config.batch_size):
            batch = [compiled[i] for i in order[lo : lo + config.batch_size]]
            grads = zero_grads(params)
            scale = 1.0 / len(batch)
            for cex in batch:
                targets = build_targets(cex, config.smoothing, eps, config.smooth_binary)
                cand = select_top_k(retrieve_probs(cex, params), config.k_docs)
                l_ret, l_ref, skipped = accumulate_retrieval_grads(
                    cex, cand, targets.retrieval_labels, params, weights, grads, scale
                )
                l_type, l_span, l_sup = accumulate_reading_grads(
                    cex, cex.gold_pair, targets, params, weights, grads, scale
                )
                sums["retrieve"] += l_ret
                counts["retrieve"] += 1
                sums["type"] += l_type
                counts["type"] += 1
                sums["sup"] += l_sup
                counts["sup"] += 1
                if skipped:
                    refine_skipped_total += 1
                else:
                    sums["refine"] += l_ref
                    counts["refine"] += 1
                if targets.start_target is not None:
                    sums["span"] += l_span
                    counts["span"] += 1
                if not np.isfinite(l_ret + l_ref + l_type + l_span + l_sup):
                    exc = TrainingDiverged(f"non-finite loss at epoch {epoch}")
                    exc.partial_log = list(log)
                    raise exc
            for name, grad in grads.items():
                arr = getattr(params, name)
                if name in ToyModelParams.DECAYED:
                    arr *= decay_factor
                arr -= lr * grad
        if not params.all_finite():
            exc = TrainingDiverged(f"non-finite parameters after epoch {epoch}")
            exc.partial_log = list(log)
            raise exc

        record = {
            "epoch": epoch,
            "epsilon": eps,
            "loss_retrieve": sums["retrieve"] / max(counts["retrieve"], 1),
            "loss_refine": sums["refine"] / max(counts["refine"], 1),
            "loss_type": sums["type"] / max(counts["type"], 1),
            "loss_span": sums["span"] / max(counts["span"], 1),
            "loss_sup": sums["sup"] / max(counts["sup"], 1),
        }
        if compiled_dev:
            record.update(evaluate(compiled_dev, params, config))
        else:
            record.update({k: 0.0 for k in LOG_FIELDS[7:]})
        log.append(record)

    return TrainResult(params=params, vocab=vocab, log=log, refine_skipped=refine_skipped_total)


# ---------------------------------------------------------------------------
# sklearn-style estimator facade
# ---------------------------------------------------------------------------


class MultiHopQAModel(BaseEstimator):
    """Estimator wrapper over :func:`train` / :func:`run_pipeline`.

    Parameters mirror :class:`TrainConfig`; fitted state lives in
    ``params_``, ``vocab_``, and the per-epoch ``log_``.
    """

    def __init__(
        self,
        seed: int = 0,
        epochs: int = 16,
        batch_size: int = 16,
        learning_rate: float = 0.05,
        weight_decay: float = 0.01,
        k_docs: int = 3,
        embedding_dim: int = 32,
        max_answer_len: int = 4,
        init_scale: float = 0.1,
        smoothing: SmoothingMethod | None = None,
        schedule: ScheduleConfig | None = None,
        loss_weights: L.LossWeights | None = None,
        smooth_binary: bool = False,
    ):
        self.seed = seed
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.k_docs = k_docs
        self.embedding_dim = embedding_dim
        self.max_answer_len = max_answer_len
        self.init_scale = init_scale
        self.smoothing = smoothing
        self.schedule = schedule
        self.loss_weights = loss_weights
        self.smooth_binary = smooth_binary

    def _config(self) -> TrainConfig:
        return TrainConfig(
            seed=self.seed,
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            weight_decay=self.weight_decay,
            k_docs=self.k_docs,
            embedding_dim=self.embedding_dim,
            max_answer_len=self.max_answer_len,
            init_scale=self.init_scale,
            smoothing=self.smoothing or SmoothingMethod("one_hot"),
            schedule=self.schedule,
            loss_weights=self.loss_weights or L.LossWeights(),
            smooth_binary=self.smooth_binary,
        )

    def fit(self, examples, dev_examples=None):
        result = train(examples, self._config(), dev=dev_examples)
        self.params_ = result.params
        self.vocab_ = result.vocab
        self.log_ = result.log
        self.refine_skipped_ = result.refine_skipped
        return self

    def predict(self, examples) -> list[Prediction]:
        if not hasattr(self, "params_"):
            raise RuntimeError("model is not fitted")
        config = self._config()
        return [
            run_pipeline(compile_example(ex, self.vocab_), self.params_, config) for ex in examples
        ]
