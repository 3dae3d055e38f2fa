"""Aspect-based service scoring.

Every entity mention inherits its sentence's polarity. Within a sentence
the polarity is spread evenly over the J mentions (so the rescaled values
add back up to the sentence polarity), summed per aspect within a review,
and averaged per aspect over all K reviews of a listing. Dimension scores
add up their member aspects' listing scores.

Two compatibility switches reproduce the formulas exactly as printed in
the method description: ``literal_eq1`` divides by the sum of the raw
polarities (which erases the sign of negative sentences), and ``sum_eq3``
sums review scores instead of averaging them.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from itertools import groupby
from typing import Iterable, Mapping, Sequence

from .aspects import AspectModel, DimensionModel
from .entities import EntityMention, extract_mentions
from .errors import DataError, MalformedRecord, NoReviews
from .textprep import ProcessedReview, Sentence, TextPipeline


@dataclass(frozen=True)
class SentimentLexicon:
    polarities: Mapping[str, int]
    negators: frozenset[str] = frozenset()
    window: int = 2

    def __post_init__(self):
        bad = {w: p for w, p in self.polarities.items() if p not in (1, -1)}
        if bad:
            raise DataError(f"polarities must be +1 or -1: {sorted(bad)[:5]}")
        both = self.negators & set(self.polarities)
        if both:
            raise DataError(f"words are both negators and polar: {sorted(both)[:5]}")
        if self.window < 0:
            raise ValueError("negation window must be >= 0")


def load_sentiment_lexicon(
    lexicon_path: str | os.PathLike | None = None,
    negators_path: str | os.PathLike | None = None,
    window: int = 2,
    pipeline: TextPipeline | None = None,
) -> SentimentLexicon:
    """Read ``word<TAB>polarity`` lines and a negator list.

    Words are normalized with ``pipeline`` so they match processed review
    tokens. Two words collapsing onto one lemma with opposite polarity is
    an error.
    """
    pipeline = pipeline or TextPipeline.default()

    def read(path, default):
        if path is None:
            return resources.files("aspectscore.data").joinpath(default).read_text(encoding="utf-8")
        with open(path, encoding="utf-8") as fh:
            return fh.read()

    def lemma(word):
        toks = pipeline.normalize_term(word)
        return toks[0] if len(toks) == 1 else None

    polarities: dict[str, int] = {}
    for lineno, raw in enumerate(read(lexicon_path, "sentiment_lexicon.tsv").splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        parts = raw.split("\t")
        if len(parts) != 2:
            raise MalformedRecord("expected 'lemma<TAB>polarity'", lineno)
        try:
            pol = int(float(parts[1]))
        except ValueError:
            raise MalformedRecord(f"bad polarity {parts[1]!r}", lineno) from None
        key = lemma(parts[0])
        if key is None:
            continue
        if polarities.get(key, pol) != pol:
            raise DataError(f"line {lineno}: {parts[0]!r} collides with an opposite-polarity entry as {key!r}")
        polarities[key] = pol
    negators = set()
    for raw in read(negators_path, "negators.txt").splitlines():
        if raw.strip() and not raw.lstrip().startswith("#"):
            key = lemma(raw.strip())
            if key:
                negators.add(key)
    return SentimentLexicon(dict(sorted(polarities.items())), frozenset(negators), window)


def sentence_sentiment(sentence: Sentence | Sequence[str], lexicon: SentimentLexicon) -> int:
    """Sign of the summed token polarities.

    A polar token is flipped when a negator appears within ``window``
    tokens before it.
    """
    tokens = sentence.tokens if isinstance(sentence, Sentence) else sentence
    score = 0
    for pos, tok in enumerate(tokens):
        pol = lexicon.polarities.get(tok)
        if pol is None:
            continue
        lo = max(0, pos - lexicon.window)
        if any(t in lexicon.negators for t in tokens[lo:pos]):
            pol = -pol
        score += pol
    return (score > 0) - (score < 0)


@dataclass
class ScoredEntity:
    lemma: str
    aspect: str | None
    listing_id: str
    review_id: str
    sentence_index: int
    polarity: int
    rescaled: float = 0.0


def assign_polarities(
    review: ProcessedReview,
    mentions: Iterable[EntityMention],
    lexicon: SentimentLexicon,
    model: AspectModel,
) -> list[ScoredEntity]:
    polarity: dict[int, int] = {}
    out = []
    for mention in mentions:
        i = mention.sentence_index
        if i not in polarity:
            polarity[i] = sentence_sentiment(review.sentences[i], lexicon)
        out.append(ScoredEntity(mention.lemma, model.aspect_of(mention.lemma), review.listing_id,
                                review.review_id, i, polarity[i]))
    return out


def rescale_sentence(entities: list[ScoredEntity], literal_eq1: bool = False) -> list[ScoredEntity]:
    """Set ``rescaled`` for the mentions of one sentence (in place; returns the list)."""
    j = len(entities)
    if j == 0:
        return entities
    if literal_eq1:
        total = sum(e.polarity for e in entities)
        for e in entities:
            e.rescaled = e.polarity / total if total else 0.0
    else:
        for e in entities:
            e.rescaled = e.polarity / j
    return entities


def review_score(entities: Iterable[ScoredEntity]) -> tuple[dict[str, float], int]:
    """Per-aspect sums of rescaled polarities, plus the number of unassigned mentions."""
    parts: dict[str, list[float]] = {}
    unassigned = 0
    for e in entities:
        if e.aspect is None:
            unassigned += 1
        else:
            parts.setdefault(e.aspect, []).append(e.rescaled)
    return {a: math.fsum(v) for a, v in parts.items()}, unassigned


def listing_score(review_scores: Sequence[Mapping[str, float]], sum_eq3: bool = False) -> dict[str, float]:
    """Mean over all K reviews; reviews not mentioning an aspect count as 0."""
    k = len(review_scores)
    if k == 0:
        raise NoReviews("listing has no reviews")
    aspects = sorted({a for r in review_scores for a in r})
    out = {}
    for a in aspects:
        total = math.fsum(r.get(a, 0.0) for r in review_scores)
        out[a] = total if sum_eq3 else total / k
    return out


def dimension_score(listing_scores: Mapping[str, float], dims: DimensionModel) -> dict[str, float]:
    return {d: math.fsum(listing_scores.get(a, 0.0) for a in aspects) for d, aspects in dims.dimensions.items()}


@dataclass
class ScoreTable:
    review_scores: dict[tuple[str, str], dict[str, float]] = field(default_factory=dict)
    listing_scores: dict[str, dict[str, float]] = field(default_factory=dict)
    dimension_scores: dict[str, dict[str, float]] = field(default_factory=dict)
    review_counts: dict[str, int] = field(default_factory=dict)
    unassigned_mentions: int = 0
    sentence_sums: list[tuple[int, float]] = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            c: {
                "aspects": {a: _num(v) for a, v in sorted(self.listing_scores.get(c, {}).items())},
                "dimensions": {d: _num(v) for d, v in self.dimension_scores.get(c, {}).items()},
                "review_count": self.review_counts[c],
            }
            for c in sorted(self.review_counts)
        }

    def to_rows(self) -> list[tuple[str, str, str, float]]:
        rows = []
        for c in sorted(self.review_counts):
            for a, v in sorted(self.listing_scores.get(c, {}).items()):
                rows.append((c, "aspect", a, _num(v)))
            for d, v in self.dimension_scores.get(c, {}).items():
                rows.append((c, "dimension", d, _num(v)))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["listing_id", "level", "label", "score"])
        for c, level, label, v in self.to_rows():
            w.writerow([c, level, label, repr(v)])
        return buf.getvalue()

    def write(self, json_path: str | os.PathLike, csv_path: str | os.PathLike, seed: int | None = None) -> None:
        doc = {"seed": seed, "listings": self.to_json()}
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, ensure_ascii=False)
            fh.write("\n")
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def _num(x: float) -> float:
    x = round(x, 12)
    return 0.0 if x == 0 else x


def score_review(
    review: ProcessedReview,
    vocab,
    lexicon: SentimentLexicon,
    model: AspectModel,
    literal_eq1: bool = False,
) -> tuple[dict[str, float], int, list[tuple[int, float]]]:
    """Review-level aspect scores, unassigned count, and (polarity, sum of rescaled) per sentence."""
    scored = assign_polarities(review, extract_mentions(review, vocab), lexicon, model)
    sums = []
    for _, group in groupby(scored, key=lambda e: e.sentence_index):
        ents = rescale_sentence(list(group), literal_eq1)
        sums.append((ents[0].polarity, math.fsum(e.rescaled for e in ents)))
    scores, unassigned = review_score(scored)
    return scores, unassigned, sums


def score_corpus(
    reviews: Iterable[ProcessedReview],
    model: AspectModel,
    lexicon: SentimentLexicon,
    dims: DimensionModel | None = None,
    *,
    vocab=None,
    literal_eq1: bool = False,
    sum_eq3: bool = False,
    keep_review_scores: bool = True,
) -> ScoreTable:
    """Score processed reviews into a ScoreTable.

    ``vocab`` is the set of entity lemmas counted as mentions; it defaults
    to the model's seed words. Every review counts toward its listing's K,
    whether or not it mentions anything.
    """
    vocab = model.seeds() if vocab is None else frozenset(vocab) | model.seeds()
    table = ScoreTable()
    per_listing: dict[str, list[dict[str, float]]] = {}
    for review in reviews:
        scores, unassigned, sums = score_review(review, vocab, lexicon, model, literal_eq1)
        per_listing.setdefault(review.listing_id, []).append(scores)
        table.unassigned_mentions += unassigned
        table.sentence_sums.extend(sums)
        if keep_review_scores:
            table.review_scores[(review.listing_id, review.review_id)] = scores
    for c in sorted(per_listing):
        table.review_counts[c] = len(per_listing[c])
        ls = listing_score(per_listing[c], sum_eq3)
        if ls:
            table.listing_scores[c] = ls
            if dims is not None and len(dims):
                table.dimension_scores[c] = {
                    d: v for d, v in dimension_score(ls, dims).items()
                    if any(a in ls for a in dims.dimensions[d])
                }
    return table
