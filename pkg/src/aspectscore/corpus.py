"""Listing/review corpus: loading, validation, cleaning, language standardization."""
from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Protocol

from .errors import DuplicateReviewId, MalformedRecord, MissingField, TranslationFailure

log = logging.getLogger(__name__)

REQUIRED_FIELDS = ("listing_id", "review_id", "text")
FORMATS = ("jsonl", "csv")


@dataclass(frozen=True)
class Review:
    listing_id: str
    review_id: str
    text: str
    language: str | None = None

    def __post_init__(self):
        if not self.listing_id or not self.review_id:
            raise MalformedRecord("listing_id and review_id must be non-empty")


@dataclass(frozen=True, eq=False)
class ReviewCorpus:
    """Ordered reviews plus an index from listing id to review positions."""

    reviews: tuple[Review, ...] = ()
    listing_index: Mapping[str, tuple[int, ...]] = field(default_factory=dict)

    @classmethod
    def from_reviews(cls, reviews: Iterable[Review]) -> "ReviewCorpus":
        reviews = tuple(reviews)
        index: dict[str, list[int]] = {}
        seen: set[tuple[str, str]] = set()
        for pos, r in enumerate(reviews):
            key = (r.listing_id, r.review_id)
            if key in seen:
                raise DuplicateReviewId(*key)
            seen.add(key)
            index.setdefault(r.listing_id, []).append(pos)
        return cls(reviews, {k: tuple(v) for k, v in index.items()})

    def __len__(self) -> int:
        return len(self.reviews)

    def __iter__(self):
        return iter(self.reviews)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReviewCorpus):
            return NotImplemented
        return self.reviews == other.reviews

    def review_count(self, listing_id: str) -> int:
        return len(self.listing_index.get(listing_id, ()))

    def listings(self) -> list[str]:
        return list(self.listing_index)


def _detect_format(path: Path, fmt: str | None) -> str:
    if fmt:
        if fmt not in FORMATS:
            raise ValueError(f"unsupported corpus format {fmt!r}")
        return fmt
    return "csv" if path.suffix.lower() == ".csv" else "jsonl"


def _record_to_review(rec: Mapping, line: int) -> Review:
    for name in REQUIRED_FIELDS:
        if name not in rec or rec[name] is None:
            raise MissingField(name, line)
    listing_id, review_id, text = (rec[n] for n in REQUIRED_FIELDS)
    if not isinstance(text, str):
        raise MalformedRecord("field 'text' must be a string", line)
    listing_id, review_id = str(listing_id), str(review_id)
    if not listing_id or not review_id:
        raise MalformedRecord("listing_id and review_id must be non-empty", line)
    language = rec.get("language") or None
    return Review(listing_id, review_id, text, str(language) if language else None)


def _iter_jsonl(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as e:
                raise MalformedRecord(f"invalid JSON ({e.msg})", lineno) from None
            if not isinstance(rec, dict):
                raise MalformedRecord("expected a JSON object", lineno)
            yield lineno, rec


def _iter_csv(path: Path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return
        for name in REQUIRED_FIELDS:
            if name not in reader.fieldnames:
                raise MissingField(name, 1)
        for rec in reader:
            if None in rec:
                raise MalformedRecord("too many columns", reader.line_num)
            yield reader.line_num, rec


def load_corpus(path: str | os.PathLike, format: str | None = None) -> ReviewCorpus:
    """Read a JSONL or CSV review file, preserving input order.

    Format defaults to the file suffix (``.csv`` means CSV, anything else JSONL).
    """
    path = Path(path)
    fmt = _detect_format(path, format)
    rows = _iter_csv(path) if fmt == "csv" else _iter_jsonl(path)
    reviews: list[Review] = []
    seen: set[tuple[str, str]] = set()
    for lineno, rec in rows:
        review = _record_to_review(rec, lineno)
        key = (review.listing_id, review.review_id)
        if key in seen:
            raise DuplicateReviewId(*key, line=lineno)
        seen.add(key)
        reviews.append(review)
    return ReviewCorpus.from_reviews(reviews)


def write_corpus(corpus: ReviewCorpus, path: str | os.PathLike, format: str | None = None) -> None:
    path = Path(path)
    fmt = _detect_format(path, format)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if fmt == "jsonl":
            for r in corpus:
                rec = {"listing_id": r.listing_id, "review_id": r.review_id, "text": r.text}
                if r.language is not None:
                    rec["language"] = r.language
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["listing_id", "review_id", "text", "language"])
            for r in corpus:
                writer.writerow([r.listing_id, r.review_id, r.text, r.language or ""])


def alnum_count(text: str) -> int:
    return sum(1 for ch in text if ch.isalnum())


def clean_reviews(corpus: ReviewCorpus, min_alnum: int = 1) -> tuple[ReviewCorpus, int]:
    """Drop reviews with fewer than ``min_alnum`` alphanumeric characters.

    Returns the cleaned corpus and the number of removed reviews. Surviving
    reviews are passed through untouched.
    """
    kept = [r for r in corpus if alnum_count(r.text) >= min_alnum]
    removed = len(corpus) - len(kept)
    if removed:
        log.info("removed %d invalid reviews", removed)
    return ReviewCorpus.from_reviews(kept), removed


class Translator(Protocol):
    def translate(self, text: str, source: str | None, target: str) -> str: ...


class IdentityTranslator:
    def translate(self, text: str, source: str | None, target: str) -> str:
        return text


class DictionaryTranslator:
    """Offline stand-in for a translation service.

    A text that is itself a dictionary key is replaced whole; otherwise every
    key occurring in the text is substituted, longest keys first. Text with
    no known phrase at all cannot be translated.
    """

    def __init__(self, mapping: Mapping[str, str]):
        self.mapping = dict(mapping)
        self._keys = sorted(self.mapping, key=lambda k: (-len(k), k))

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "DictionaryTranslator":
        """Tab-separated ``source<TAB>target`` lines; '#' starts a comment."""
        mapping = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise MalformedRecord("expected 'source<TAB>target'", lineno)
                mapping[parts[0]] = parts[1]
        return cls(mapping)

    def translate(self, text: str, source: str | None, target: str) -> str:
        stripped = text.strip()
        if stripped in self.mapping:
            return self.mapping[stripped]
        out, hit = text, False
        for key in self._keys:
            if key in out:
                out = out.replace(key, self.mapping[key])
                hit = True
        if not hit:
            raise ValueError("no dictionary entry matches")
        return out


def _primary_subtag(tag: str) -> str:
    return tag.replace("_", "-").split("-")[0].lower()


def needs_translation(review: Review, target: str, ascii_threshold: float = 0.9) -> bool:
    if review.language:
        return _primary_subtag(review.language) != _primary_subtag(target)
    chars = [ch for ch in review.text if not ch.isspace()]
    if not chars:
        return False
    ascii_ratio = sum(1 for ch in chars if ord(ch) < 128) / len(chars)
    return ascii_ratio < ascii_threshold


def standardize_language(
    corpus: ReviewCorpus,
    translator: Translator,
    target: str = "en",
    *,
    on_error: str = "abort",
    ascii_threshold: float = 0.9,
) -> ReviewCorpus:
    """Translate every non-target review into ``target``.

    Reviews count as non-target when their language tag differs from the
    target, or, untagged, when the share of ASCII characters falls below
    ``ascii_threshold``. On translator failure, ``on_error="abort"`` raises
    TranslationFailure and ``"skip"`` drops the review with a warning.
    """
    if on_error not in ("abort", "skip"):
        raise ValueError("on_error must be 'abort' or 'skip'")
    out: list[Review] = []
    for r in corpus:
        if not needs_translation(r, target, ascii_threshold):
            out.append(r)
            continue
        try:
            text = translator.translate(r.text, r.language, target)
        except Exception as e:
            if on_error == "abort":
                raise TranslationFailure(r.review_id, str(e)) from e
            log.warning("skipping untranslatable review %s: %s", r.review_id, e)
            continue
        out.append(r if text == r.text else replace(r, text=text, language=target))
    return ReviewCorpus.from_reviews(out)
