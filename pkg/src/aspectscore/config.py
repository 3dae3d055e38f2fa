"""Pipeline configuration (JSON or TOML, flat keys)."""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError

DEFAULT = "default"

PATH_FIELDS = (
    "corpus", "vectors", "stoplist", "lemma_rules", "lemma_exceptions", "entity_lexicon",
    "sentiment_lexicon", "negators", "aspect_model", "dimension_model", "translation_dictionary",
    "output_dir",
)

# Parameters that influence each stage's outputs; everything else (threads,
# output location) is excluded from the stage hashes.
INGEST_PARAMS = ("corpus_format", "min_alnum", "target_language", "translator", "on_translation_error",
                 "ascii_threshold", "translate_first")
TEXT_PARAMS = ("lemmatize_first",)
CLUSTER_PARAMS = TEXT_PARAMS + ("entity_mode", "min_count", "max_vocab", "vectors_limit", "threshold",
                                "min_gain", "seed", "shuffle", "restarts", "min_cluster_size", "drop_ids")
SCORE_PARAMS = TEXT_PARAMS + ("negation_window", "compat_literal_eq1", "compat_sum_eq3", "score_entities")


@dataclass
class PipelineConfig:
    # paths; aspect_model/dimension_model also accept "default" for the shipped tables
    corpus: str | None = None
    corpus_format: str | None = None
    vectors: str | None = None
    stoplist: str | None = None
    lemma_rules: str | None = None
    lemma_exceptions: str | None = None
    entity_lexicon: str | None = None
    sentiment_lexicon: str | None = None
    negators: str | None = None
    aspect_model: str | None = None
    dimension_model: str | None = None
    translation_dictionary: str | None = None
    output_dir: str = "out"

    # ingest
    min_alnum: int = 1
    target_language: str = "en"
    translator: str = "identity"
    on_translation_error: str = "abort"
    ascii_threshold: float = 0.9
    translate_first: bool = False

    # text
    lemmatize_first: bool = False

    # cluster
    entity_mode: str = "frequency"
    min_count: int = 5
    max_vocab: int | None = 5000
    vectors_limit: int | None = None
    threshold: float = 0.5
    min_gain: float = 1e-7
    seed: int = 0
    shuffle: bool = False
    restarts: int = 1
    min_cluster_size: int = 3
    drop_ids: list[int] = field(default_factory=list)

    # score
    negation_window: int = 2
    compat_literal_eq1: bool = False
    compat_sum_eq3: bool = False
    score_entities: str = "aspects"

    # run
    stages: dict[str, bool] = field(default_factory=lambda: {"ingest": True, "cluster": True, "score": True})
    threads: int = 1

    def validate(self) -> "PipelineConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(0.0 <= self.threshold <= 1.0, f"threshold must lie in [0, 1], got {self.threshold}")
        need(self.min_count >= 1, "min_count must be >= 1")
        need(self.max_vocab is None or self.max_vocab >= 1, "max_vocab must be >= 1")
        need(self.min_cluster_size >= 1, "min_cluster_size must be >= 1")
        need(self.min_gain >= 0, "min_gain must be >= 0")
        need(self.restarts >= 1, "restarts must be >= 1")
        need(self.threads >= 1, "threads must be >= 1")
        need(self.min_alnum >= 0, "min_alnum must be >= 0")
        need(0.0 <= self.ascii_threshold <= 1.0, "ascii_threshold must lie in [0, 1]")
        need(self.negation_window >= 0, "negation_window must be >= 0")
        need(self.entity_mode in ("lexicon", "frequency", "hybrid"), f"unknown entity_mode {self.entity_mode!r}")
        need(self.translator in ("identity", "dictionary"), f"unknown translator {self.translator!r}")
        need(self.on_translation_error in ("abort", "skip"), "on_translation_error must be 'abort' or 'skip'")
        need(self.score_entities in ("aspects", "vocabulary"), "score_entities must be 'aspects' or 'vocabulary'")
        need(self.corpus_format in (None, "jsonl", "csv"), f"unknown corpus_format {self.corpus_format!r}")
        need(self.translator != "dictionary" or self.translation_dictionary,
             "translator 'dictionary' needs translation_dictionary")
        need(self.entity_mode == "frequency" or self.entity_lexicon,
             f"entity_mode {self.entity_mode!r} needs entity_lexicon")
        unknown_stages = set(self.stages) - {"ingest", "cluster", "score"}
        need(not unknown_stages, f"unknown stages {sorted(unknown_stages)}")
        return self

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: str | os.PathLike | None = None) -> "PipelineConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**data)
        if base_dir is not None:
            for name in PATH_FIELDS:
                value = getattr(cfg, name)
                if value and value != DEFAULT and not os.path.isabs(value):
                    setattr(cfg, name, str(Path(base_dir) / value))
        if isinstance(cfg.stages, dict):
            cfg.stages = {"ingest": True, "cluster": True, "score": True, **cfg.stages}
        return cfg

    @classmethod
    def load(cls, path: str | os.PathLike) -> "PipelineConfig":
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
        try:
            if path.suffix.lower() == ".toml":
                data = tomllib.loads(raw.decode("utf-8"))
            else:
                data = json.loads(raw)
        except (ValueError, tomllib.TOMLDecodeError) as e:
            raise ConfigError(f"cannot parse config {path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("config root must be a table/object")
        return cls.from_dict(data, path.parent)

    def params(self, names) -> dict[str, Any]:
        return {n: getattr(self, n) for n in names}
