"""Dataset ingestion and synthesis.

Covers four jobs: whitespace tokenization with punctuation stripping,
aligning an answer string to a token span, parsing the public multi-hop QA
JSON schema (records with ``_id``/``question``/``answer``/
``supporting_facts``/``context``), and generating synthetic multi-hop
examples with two controllable noise modes:

* quantifier noise — a training example's annotated span gains one trailing
  token (e.g. "four" annotated as "four times") while dev annotations keep
  the bare answer, reproducing train/dev annotation discrepancy;
* alternate paths — the answer string is planted verbatim inside a non-gold
  document, so the evidence chain is not unique even though only one pair of
  documents is annotated.

Every generated example has exactly two gold documents: one carries the
answer evidence, the other a bridging fact, each with one flagged supporting
sentence.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass

import numpy as np

from .core import Document, Example, GoldAnswer, Span

_STRIP_CHARS = string.punctuation


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercase, split on whitespace, strip surrounding punctuation."""
    out = []
    for raw in text.lower().split():
        tok = raw.strip(_STRIP_CHARS)
        if tok:
            out.append(tok)
    return tuple(out)


def align_answer(answer, context_tokens) -> Span | None:
    """First occurrence of the answer tokens as a contiguous subsequence.

    ``answer`` may be a string (tokenized here) or a token sequence. Returns
    None when the answer does not occur.
    """
    needle = tokenize(answer) if isinstance(answer, str) else tuple(answer)
    haystack = tuple(context_tokens)
    n = len(needle)
    if n == 0 or n > len(haystack):
        return None
    for start in range(len(haystack) - n + 1):
        if haystack[start : start + n] == needle:
            return Span(start, start + n - 1)
    return None


# ---------------------------------------------------------------------------
# Multi-hop QA JSON schema
# ---------------------------------------------------------------------------

SKIP_UNALIGNABLE = "unalignable"


@dataclass(frozen=True)
class HotpotParseResult:
    examples: tuple[Example, ...]
    skipped: tuple[tuple[str, str], ...]  # (example id, reason)


def parse_hotpot_json(text: str) -> HotpotParseResult:
    """Parse the public distractor-setting JSON into Examples.

    Gold documents are the titles named by ``supporting_facts``; answers
    "yes"/"no" become verdict answers, everything else is aligned to its
    first occurrence in the gold-pair context. Records whose span answer
    cannot be found in the gold documents are skipped and reported.
    Malformed records (supporting-fact title or sentence missing from the
    context, not exactly two gold titles) raise ValueError.
    """
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed JSON: {exc}") from exc
    if not isinstance(records, list):
        raise ValueError("expected a JSON array of records")

    examples = []
    skipped = []
    for record in records:
        ex_id = str(record["_id"])
        documents = tuple(
            Document(title=title, sentences=tuple(tokenize(s) for s in sentences))
            for title, sentences in record["context"]
        )
        titles = {doc.title: i for i, doc in enumerate(documents)}

        gold_titles = []
        flags = [[0] * len(doc.sentences) for doc in documents]
        for title, sent_idx in record["supporting_facts"]:
            if title not in titles:
                raise ValueError(f"example {ex_id!r}: supporting-fact title {title!r} not in context")
            doc_idx = titles[title]
            if not (0 <= sent_idx < len(documents[doc_idx].sentences)):
                raise ValueError(f"example {ex_id!r}: supporting-fact sentence {sent_idx} out of range")
            flags[doc_idx][sent_idx] = 1
            if title not in gold_titles:
                gold_titles.append(title)
        if len(gold_titles) != 2:
            raise ValueError(f"example {ex_id!r}: expected exactly 2 gold titles, got {len(gold_titles)}")
        gold_doc_flags = tuple(int(doc.title in gold_titles) for doc in documents)

        answer_text = str(record["answer"])
        verdict = answer_text.strip().lower()
        if verdict in ("yes", "no"):
            answer = GoldAnswer(kind=verdict)
        else:
            gold_ctx = tuple(
                tok
                for i, doc in enumerate(documents)
                if gold_doc_flags[i]
                for tok in doc.tokens
            )
            span = align_answer(answer_text, gold_ctx)
            if span is None:
                skipped.append((ex_id, SKIP_UNALIGNABLE))
                continue
            answer = GoldAnswer(kind="span", span=span)

        examples.append(
            Example(
                id=ex_id,
                question=tokenize(record["question"]),
                documents=documents,
                gold_doc_flags=gold_doc_flags,
                supporting_flags=tuple(tuple(f) for f in flags),
                answer=answer,
                answer_text=answer_text,
            )
        )
    return HotpotParseResult(examples=tuple(examples), skipped=tuple(skipped))


# ---------------------------------------------------------------------------
# JSON-lines serialization of Examples
# ---------------------------------------------------------------------------


def example_to_dict(ex: Example) -> dict:
    return {
        "id": ex.id,
        "question": list(ex.question),
        "documents": [
            {"title": doc.title, "sentences": [list(s) for s in doc.sentences]}
            for doc in ex.documents
        ],
        "gold_doc_flags": list(ex.gold_doc_flags),
        "supporting_flags": [list(f) for f in ex.supporting_flags],
        "answer": {
            "kind": ex.answer.kind,
            "span": [ex.answer.span.start, ex.answer.span.end] if ex.answer.span else None,
        },
        "answer_text": ex.answer_text,
    }


def example_from_dict(d: dict) -> Example:
    span = d["answer"]["span"]
    return Example(
        id=d["id"],
        question=tuple(d["question"]),
        documents=tuple(
            Document(title=doc["title"], sentences=tuple(tuple(s) for s in doc["sentences"]))
            for doc in d["documents"]
        ),
        gold_doc_flags=tuple(d["gold_doc_flags"]),
        supporting_flags=tuple(tuple(f) for f in d["supporting_flags"]),
        answer=GoldAnswer(kind=d["answer"]["kind"], span=Span(*span) if span else None),
        answer_text=d["answer_text"],
    )


def write_examples_jsonl(path, examples) -> None:
    with open(path, "w") as fh:
        for ex in examples:
            fh.write(json.dumps(example_to_dict(ex), sort_keys=True))
            fh.write("\n")


def read_examples_jsonl(path) -> tuple[Example, ...]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(example_from_dict(json.loads(line)))
    return tuple(out)


# ---------------------------------------------------------------------------
# Synthetic generator
# ---------------------------------------------------------------------------

ANSWER_WORDS = (
    "four", "seven", "twelve", "forty", "ninety", "eleven", "thirty", "sixty",
    "umber", "ochre", "sienna", "viridian", "crimson", "teal", "indigo", "magenta",
    "maple", "cedar", "alder", "rowan", "aspen", "birch", "hazel", "willow",
    "falcon", "heron", "plover", "osprey", "kestrel", "swift", "crane", "finch",
    "basalt", "gneiss", "quartz", "shale", "marble", "flint", "slate", "pumice",
    "pewter", "bronze", "brass", "steel", "chrome", "mercury", "platinum", "tungsten",
)

QUANTIFIER_WORDS = ("times", "years", "miles", "points", "days", "weeks", "months", "hours")

TOPIC_WORDS = (
    "arden", "belmont", "calder", "dunmore", "elsworth", "farley", "graton", "holbrook",
    "ivydale", "juniper", "kenwood", "larkspur", "milford", "norwood", "oakley", "penrose",
    "quimby", "redwood", "selborne", "thornton", "upland", "verona", "westfield", "yardley",
    "zephyr", "ashford", "brockton", "camden", "denholm", "eastvale", "foxcroft", "glenhaven",
)

BRIDGE_WORDS = ("founded", "located", "bordered", "governed", "renamed", "merged", "settled", "chartered")

YES_MARKER = "confirmed"
NO_MARKER = "denied"


@dataclass(frozen=True)
class SyntheticConfig:
    """Knobs of the synthetic generator.

    ``n_examples`` is the training-set size; ``n_dev`` the dev-set size
    (defaults to a quarter of the training set). ``vocab_size`` sizes the
    filler-word pool; the structural pools (answers, quantifiers, topics,
    bridges) are fixed. Probabilities: ``quantifier_noise_p`` perturbs
    training annotations only, ``alt_path_p`` plants the answer in a
    non-gold document, ``yes_no_p`` makes an example yes/no-typed.
    """

    n_examples: int
    n_dev: int | None = None
    vocab_size: int = 64
    docs_per_example: int = 10
    sentences_per_doc: int = 3
    tokens_per_sentence: int = 8
    quantifier_noise_p: float = 0.0
    alt_path_p: float = 0.0
    yes_no_p: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("quantifier_noise_p", "alt_path_p", "yes_no_p"):
            if not (0.0 <= getattr(self, name) <= 1.0):
                raise ValueError(f"{name} must be in [0, 1]")
        if self.n_examples < 1:
            raise ValueError("n_examples must be >= 1")
        if self.docs_per_example < 2:
            raise ValueError("need at least 2 documents per example")
        if self.sentences_per_doc < 1:
            raise ValueError("need at least 1 sentence per document")
        if self.tokens_per_sentence < 3:
            raise ValueError("sentences too short to hold topic + answer + quantifier")
        if self.vocab_size < 8:
            raise ValueError("vocab_size must be >= 8")

    @property
    def dev_size(self) -> int:
        return self.n_dev if self.n_dev is not None else max(1, self.n_examples // 4)


def _filler_words(config: SyntheticConfig) -> tuple[str, ...]:
    return tuple(f"w{i:03d}" for i in range(config.vocab_size))


def _filler_sentence(rng, fillers, n_tokens, lead=None):
    toks = list(rng.choice(len(fillers), size=n_tokens))
    sent = [fillers[i] for i in toks]
    if lead is not None:
        sent[0] = lead
    return sent


def _generate_example(rng, config: SyntheticConfig, ex_id: str, perturb_annotation: bool) -> Example:
    fillers = _filler_words(config)
    m = config.docs_per_example
    n_sent = config.sentences_per_doc
    n_tok = config.tokens_per_sentence

    topic_a, topic_b = (TOPIC_WORDS[i] for i in rng.choice(len(TOPIC_WORDS), size=2, replace=False))
    gold_pair = sorted(rng.choice(m, size=2, replace=False))
    answer_doc_idx, bridge_doc_idx = (gold_pair if rng.random() < 0.5 else gold_pair[::-1])

    is_yes_no = rng.random() < config.yes_no_p
    answer_idx = int(rng.integers(len(ANSWER_WORDS)))
    answer = ANSWER_WORDS[answer_idx]
    # Fixed answer->quantifier pairing: the annotation noise for one answer
    # type always involves the same trailing token, as with real quantifiers.
    quant = QUANTIFIER_WORDS[answer_idx % len(QUANTIFIER_WORDS)]

    docs = []
    flags = []
    answer_sent_idx = int(rng.integers(n_sent))
    answer_slot = int(rng.integers(1, n_tok - 1))
    bridge_sent_idx = int(rng.integers(n_sent))
    alt_doc_idx = None
    if not is_yes_no and rng.random() < config.alt_path_p:
        non_gold = [i for i in range(m) if i not in gold_pair]
        alt_doc_idx = int(rng.choice(non_gold))

    for d in range(m):
        sentences = []
        doc_flags = [0] * n_sent
        for si in range(n_sent):
            if d == answer_doc_idx and si == answer_sent_idx:
                sent = _filler_sentence(rng, fillers, n_tok, lead=topic_a)
                if is_yes_no:
                    sent[answer_slot] = YES_MARKER if rng.random() < 0.5 else NO_MARKER
                else:
                    sent[answer_slot] = answer
                    sent[answer_slot + 1] = quant
                doc_flags[si] = 1
            elif d == bridge_doc_idx and si == bridge_sent_idx:
                sent = _filler_sentence(rng, fillers, n_tok, lead=topic_b)
                sent[1] = BRIDGE_WORDS[int(rng.integers(len(BRIDGE_WORDS)))]
                doc_flags[si] = 1
            else:
                lead = None
                if d not in gold_pair and rng.random() < 0.5:
                    lead = TOPIC_WORDS[int(rng.integers(len(TOPIC_WORDS)))]
                sent = _filler_sentence(rng, fillers, n_tok, lead=lead)
                if d == alt_doc_idx and si == 0:
                    sent[0] = topic_a
                    slot = min(answer_slot, n_tok - 2)
                    sent[slot] = answer
                    sent[slot + 1] = quant
            sentences.append(tuple(sent))
        docs.append(Document(title=f"doc{d:02d}", sentences=tuple(sentences)))
        flags.append(tuple(doc_flags))

    if is_yes_no:
        marker = docs[answer_doc_idx].sentences[answer_sent_idx][answer_slot]
        kind = "yes" if marker == YES_MARKER else "no"
        answer_obj = GoldAnswer(kind=kind)
        answer_text = kind
        question = ("whether", topic_a, topic_b)
    else:
        lo, hi = gold_pair
        offset = 0 if answer_doc_idx == lo else len(docs[lo].tokens)
        pos = offset + answer_sent_idx * n_tok + answer_slot
        noisy = perturb_annotation and rng.random() < config.quantifier_noise_p
        if noisy:
            answer_obj = GoldAnswer(kind="span", span=Span(pos, pos + 1))
            answer_text = f"{answer} {quant}"
        else:
            answer_obj = GoldAnswer(kind="span", span=Span(pos, pos))
            answer_text = answer
        question = ("how", "many", topic_a, topic_b)

    return Example(
        id=ex_id,
        question=question,
        documents=tuple(docs),
        gold_doc_flags=tuple(int(i in gold_pair) for i in range(m)),
        supporting_flags=tuple(flags),
        answer=answer_obj,
        answer_text=answer_text,
    )


def generate_synthetic(config: SyntheticConfig) -> tuple[tuple[Example, ...], tuple[Example, ...]]:
    """Deterministic (train, dev) split.

    Annotation perturbation (quantifier noise) applies to training examples
    only; alternate-path planting applies to both splits since it is a
    property of the text, not the annotation.
    """
    rng = np.random.default_rng(config.seed)
    train = tuple(
        _generate_example(rng, config, f"train-{i:05d}", perturb_annotation=True)
        for i in range(config.n_examples)
    )
    dev = tuple(
        _generate_example(rng, config, f"dev-{i:05d}", perturb_annotation=False)
        for i in range(config.dev_size)
    )
    return train, dev
