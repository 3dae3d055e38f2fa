"""Sentence splitting, tokenization, stopword removal and rule-based lemmatization."""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .corpus import Review
from .errors import ConfigError, MalformedRecord

_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")
_TOKEN = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[str, ...]
    raw_span: tuple[int, int]  # (UTF-8 byte offset, byte length)


@dataclass(frozen=True)
class ProcessedReview:
    review_id: str
    listing_id: str
    sentences: tuple[Sentence, ...] = ()

    @property
    def sentence_count(self) -> int:
        return len(self.sentences)


def _sentence_spans(text: str) -> list[tuple[int, int]]:
    spans, start = [], 0
    for m in _SENTENCE_END.finditer(text):
        spans.append((start, m.end()))
        start = m.end()
    spans.append((start, len(text)))
    out = []
    for s, e in spans:
        seg = text[s:e]
        lead = len(seg) - len(seg.lstrip())
        seg = seg.strip()
        if seg:
            out.append((s + lead, s + lead + len(seg)))
    return out


def split_sentences(text: str) -> list[str]:
    """Split on runs of ``.``, ``!`` or ``?`` followed by whitespace or end of text.

    >>> split_sentences("Great host. Clean room!")
    ['Great host.', 'Clean room!']
    """
    return [text[s:e] for s, e in _sentence_spans(text)]


def tokenize(sentence: str) -> list[str]:
    return _TOKEN.findall(sentence.lower())


def remove_stopwords(tokens: Sequence[str], stoplist: Iterable[str]) -> list[str]:
    stop = stoplist if isinstance(stoplist, (set, frozenset)) else set(stoplist)
    return [t for t in tokens if t not in stop]


@dataclass(frozen=True)
class LemmaRule:
    suffix: str
    replacement: str
    min_stem: int

    def __post_init__(self):
        if not self.suffix:
            raise ConfigError("lemma rule suffix must be non-empty")
        if self.replacement != self.suffix and len(self.replacement) >= len(self.suffix):
            # keeps the fixed-point iteration in lemmatize() terminating
            raise ConfigError(f"lemma rule {self.suffix!r}->{self.replacement!r} must shorten the token")

    def matches(self, token: str) -> bool:
        return token.endswith(self.suffix) and len(token) - len(self.suffix) >= self.min_stem


@dataclass(frozen=True)
class LemmaRules:
    """Ordered suffix rules plus an exceptions dictionary.

    Exception forms containing non-alphanumeric characters (``wi-fi``) cannot
    survive tokenization, so they are kept apart as phrase merges that
    ``preprocess`` applies to raw text.
    """

    rules: tuple[LemmaRule, ...] = ()
    exceptions: Mapping[str, str] = field(default_factory=dict)
    phrases: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def build(cls, rules: Iterable[tuple[str, str, int]], exceptions: Mapping[str, str] = {}) -> "LemmaRules":
        words, phrases = {}, {}
        for form, lemma in exceptions.items():
            form, lemma = form.lower(), lemma.lower()
            if _TOKEN.fullmatch(form):
                words[form] = lemma
            else:
                phrases[form] = lemma
        return cls(tuple(LemmaRule(s, r, int(n)) for s, r, n in rules), words, phrases)


def lemmatize_token(token: str, rules: LemmaRules) -> str:
    # Applied until nothing changes, which makes lemmatization idempotent.
    seen = {token}
    while True:
        if token in rules.exceptions:
            nxt = rules.exceptions[token]
        else:
            nxt = token
            for rule in rules.rules:
                if rule.matches(token):
                    nxt = token[: len(token) - len(rule.suffix)] + rule.replacement
                    break
        if nxt == token or nxt in seen:
            return nxt
        seen.add(nxt)
        token = nxt


def lemmatize(tokens: Sequence[str], rules: LemmaRules) -> list[str]:
    return [lemmatize_token(t, rules) for t in tokens]


def merge_phrases(text: str, phrases: Mapping[str, str]) -> str:
    if not phrases:
        return text
    for form in sorted(phrases, key=lambda f: (-len(f), f)):
        pattern = r"(?<![^\W_])" + re.escape(form) + r"(?![^\W_])"
        text = re.sub(pattern, phrases[form], text, flags=re.IGNORECASE)
    return text


# --- resource files ---------------------------------------------------------

def _data_lines(path: str | os.PathLike | None, default: str) -> list[tuple[int, str]]:
    if path is None:
        content = resources.files("aspectscore.data").joinpath(default).read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            content = fh.read()
    out = []
    for lineno, raw in enumerate(content.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        out.append((lineno, raw))
    return out


def load_wordlist(path: str | os.PathLike | None = None, default: str = "stoplist.txt") -> frozenset[str]:
    """One lowercase token per line, '#' comments."""
    return frozenset(raw.strip().lower() for _, raw in _data_lines(path, default))


def load_stoplist(path: str | os.PathLike | None = None) -> frozenset[str]:
    return load_wordlist(path, "stoplist.txt")


def _tsv(path, default, ncols):
    rows = []
    for lineno, raw in _data_lines(path, default):
        parts = raw.split("\t")
        if len(parts) != ncols:
            raise MalformedRecord(f"expected {ncols} tab-separated columns", lineno)
        rows.append(parts)
    return rows


def load_lemma_rules(
    rules_path: str | os.PathLike | None = None,
    exceptions_path: str | os.PathLike | None = None,
) -> LemmaRules:
    rules = []
    for suffix, repl, n in _tsv(rules_path, "lemma_rules.tsv", 3):
        try:
            rules.append((suffix, repl, int(n)))
        except ValueError:
            raise MalformedRecord(f"bad min_stem_len {n!r}") from None
    exceptions = {f: l for f, l in _tsv(exceptions_path, "lemma_exceptions.tsv", 2)}
    return LemmaRules.build(rules, exceptions)


# --- composition ------------------------------------------------------------

@dataclass
class TextPipeline:
    """Per-sentence normalization: phrase merges, tokens, stopwords, lemmas."""

    stoplist: frozenset[str]
    rules: LemmaRules
    lemmatize_first: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def default(cls) -> "TextPipeline":
        return cls(load_stoplist(), load_lemma_rules())

    def lemma(self, token: str) -> str:
        try:
            return self._cache[token]
        except KeyError:
            out = self._cache[token] = lemmatize_token(token, self.rules)
            return out

    def normalize(self, sentence: str) -> list[str]:
        tokens = tokenize(merge_phrases(sentence, self.rules.phrases))
        if self.lemmatize_first:
            return remove_stopwords([self.lemma(t) for t in tokens], self.stoplist)
        return [self.lemma(t) for t in remove_stopwords(tokens, self.stoplist)]

    def normalize_term(self, term: str) -> list[str]:
        """Normalize a configured word (seed, lexicon entry); stopwords are kept."""
        return [self.lemma(t) for t in tokenize(merge_phrases(term, self.rules.phrases))]

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_cache"] = {}
        return state


def preprocess(review: Review, pipeline: TextPipeline) -> ProcessedReview:
    text = review.text
    sentences = []
    for s, e in _sentence_spans(text):
        byte_start = len(text[:s].encode("utf-8"))
        byte_len = len(text[s:e].encode("utf-8"))
        sentences.append(Sentence(tuple(pipeline.normalize(text[s:e])), (byte_start, byte_len)))
    return ProcessedReview(review.review_id, review.listing_id, tuple(sentences))
