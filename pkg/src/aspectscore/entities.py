"""Candidate entity vocabulary and per-sentence entity mentions.

A lexicon/frequency extractor stands in for named entity recognition. Any
object with an ``extract(review)`` method returning EntityMention lists can
replace it downstream.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol

from .errors import EmptyVocabulary
from .textprep import ProcessedReview

MODES = ("lexicon", "frequency", "hybrid")


@dataclass(frozen=True)
class EntityVocabulary:
    entries: Mapping[str, int]
    source: str = "frequency"

    def __contains__(self, lemma: str) -> bool:
        return lemma in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def tokens(self) -> list[str]:
        return sorted(self.entries)


@dataclass(frozen=True)
class EntityMention:
    lemma: str
    review_id: str
    sentence_index: int


def lemma_frequencies(corpus: Iterable[ProcessedReview]) -> Counter:
    counts: Counter = Counter()
    for review in corpus:
        for sentence in review.sentences:
            counts.update(sentence.tokens)
    return counts


def build_vocabulary(
    corpus: Iterable[ProcessedReview] | Counter,
    mode: str = "frequency",
    lexicon: Iterable[str] | None = None,
    min_count: int = 5,
    max_vocab: int | None = None,
) -> EntityVocabulary:
    """Select entity lemmas from a processed corpus.

    ``lexicon`` keeps corpus lemmas found in the lexicon; ``frequency`` keeps
    the ``max_vocab`` most frequent lemmas (ties broken alphabetically);
    ``hybrid`` is the union of both. ``min_count`` applies in every mode.
    """
    if mode not in MODES:
        raise ValueError(f"unknown vocabulary mode {mode!r}")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts = corpus if isinstance(corpus, Counter) else lemma_frequencies(corpus)
    frequent = {t: n for t, n in counts.items() if n >= min_count}

    selected: dict[str, int] = {}
    if mode in ("lexicon", "hybrid"):
        if lexicon is None:
            raise ValueError(f"mode {mode!r} needs a lexicon")
        lex = set(lexicon)
        selected.update({t: n for t, n in frequent.items() if t in lex})
    if mode in ("frequency", "hybrid"):
        ranked = sorted(frequent.items(), key=lambda kv: (-kv[1], kv[0]))
        if max_vocab is not None:
            ranked = ranked[:max_vocab]
        selected.update(ranked)
    if not selected:
        raise EmptyVocabulary(f"no entity lemma survives (mode={mode}, min_count={min_count})")
    return EntityVocabulary(dict(sorted(selected.items())), mode)


def extract_mentions(review: ProcessedReview, vocab: EntityVocabulary | Iterable[str]) -> list[EntityMention]:
    vocab = vocab if isinstance(vocab, (EntityVocabulary, set, frozenset)) else set(vocab)
    return [
        EntityMention(tok, review.review_id, i)
        for i, sentence in enumerate(review.sentences)
        for tok in sentence.tokens
        if tok in vocab
    ]


class MentionExtractor(Protocol):
    def extract(self, review: ProcessedReview) -> list[EntityMention]: ...


class VocabularyExtractor:
    def __init__(self, vocab: EntityVocabulary | Iterable[str]):
        self.vocab = vocab if isinstance(vocab, EntityVocabulary) else frozenset(vocab)

    def extract(self, review: ProcessedReview) -> list[EntityMention]:
        return extract_mentions(review, self.vocab)
