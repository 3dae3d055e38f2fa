"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures onto
its documented exit statuses without inspecting types one by one.
"""
from __future__ import annotations


class AspectScoreError(Exception):
    exit_code = 1


class ConfigError(AspectScoreError):
    exit_code = 2


class DataError(AspectScoreError):
    exit_code = 3


class InvariantViolation(AspectScoreError):
    exit_code = 4


# corpus

class MalformedRecord(DataError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class MissingField(MalformedRecord):
    def __init__(self, field: str, line: int | None = None):
        self.field = field
        super().__init__(f"missing required field {field!r}", line)


class DuplicateReviewId(DataError):
    def __init__(self, listing_id: str, review_id: str, line: int | None = None):
        self.listing_id = listing_id
        self.review_id = review_id
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}duplicate review ({listing_id!r}, {review_id!r})")


class TranslationFailure(DataError):
    def __init__(self, review_id: str, reason: str = ""):
        self.review_id = review_id
        super().__init__(f"could not translate review {review_id!r}" + (f": {reason}" if reason else ""))


# embeddings

class EmptyFile(DataError):
    pass


class DimensionMismatch(DataError):
    def __init__(self, line: int, expected: int, got: int):
        self.line = line
        self.expected = expected
        self.got = got
        super().__init__(f"line {line}: expected {expected} components, got {got}")


class NonFiniteValue(DataError):
    def __init__(self, line: int, token: str):
        self.line = line
        super().__init__(f"line {line}: non-finite component in vector for {token!r}")


class ZeroNormVector(DataError):
    pass


# entities / graph / aspects / scoring

class EmptyVocabulary(DataError):
    pass


class PartitionMismatch(DataError):
    pass


class UnknownCommunityId(DataError):
    pass


class DuplicateLabel(DataError):
    pass


class UnknownAspect(DataError):
    pass


class OverlappingDimensions(DataError):
    pass


class NoReviews(DataError):
    pass
