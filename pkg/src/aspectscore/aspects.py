"""Aspect models (labeled seed-word sets) and their service-dimension rollup."""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping

from .errors import DataError, DuplicateLabel, OverlappingDimensions, UnknownAspect, UnknownCommunityId
from .lexnet import Partition
from .textprep import TextPipeline

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AspectModel:
    aspects: Mapping[str, frozenset[str]]
    lemma_to_aspect: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        inverse: dict[str, str] = {}
        for label, seeds in self.aspects.items():
            if not seeds:
                raise DataError(f"aspect {label!r} has no seed words")
            for lemma in seeds:
                if lemma in inverse:
                    raise DataError(f"seed {lemma!r} belongs to both {inverse[lemma]!r} and {label!r}")
                inverse[lemma] = label
        object.__setattr__(self, "lemma_to_aspect", dict(sorted(inverse.items())))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Iterable[str]], pipeline: TextPipeline | None = None) -> "AspectModel":
        """Build a model from raw seed words, normalizing each through ``pipeline``.

        Seeds must normalize to a single lemma; repeats inside an aspect collapse.
        """
        pipeline = pipeline or TextPipeline.default()
        aspects = {}
        for label, words in mapping.items():
            seeds = set()
            for word in words:
                lemmas = pipeline.normalize_term(word)
                if len(lemmas) != 1:
                    raise DataError(f"seed {word!r} of aspect {label!r} normalizes to {lemmas}; single lemmas only")
                seeds.add(lemmas[0])
            aspects[label] = frozenset(seeds)
        return cls(aspects)

    @property
    def labels(self) -> list[str]:
        return list(self.aspects)

    def seeds(self) -> frozenset[str]:
        return frozenset(self.lemma_to_aspect)

    def aspect_of(self, lemma: str) -> str | None:
        return self.lemma_to_aspect.get(lemma)

    def __len__(self) -> int:
        return len(self.aspects)

    def to_json(self) -> dict[str, list[str]]:
        return {label: sorted(seeds) for label, seeds in self.aspects.items()}


def label_clusters(partition: Partition, labels: Mapping[int, str]) -> AspectModel:
    """Turn labeled communities into aspects; unlabeled communities are dropped."""
    unknown = set(labels) - set(partition.communities)
    if unknown:
        raise UnknownCommunityId(f"labels reference unknown communities {sorted(unknown)}")
    values = list(labels.values())
    dupes = sorted({v for v in values if values.count(v) > 1})
    if dupes:
        raise DuplicateLabel(f"labels used more than once: {dupes}")
    unlabeled = sorted(set(partition.communities) - set(labels))
    if unlabeled:
        log.warning("dropping %d unlabeled communities: %s", len(unlabeled), unlabeled)
    return AspectModel({labels[c]: partition.communities[c] for c in sorted(labels)})


def draft_model(partition: Partition) -> dict[str, list[str]]:
    """Placeholder-labeled aspect file content for manual editing."""
    width = max(2, len(str(max(partition.communities, default=0))))
    return {f"cluster_{c:0{width}d}": sorted(members) for c, members in sorted(partition.communities.items())}


def _read_json(path: str | os.PathLike | None, default: str):
    if path is None:
        text = resources.files("aspectscore.data").joinpath(default).read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DataError(f"{path or default}: invalid JSON ({e.msg}, line {e.lineno})") from None


def load_aspect_model(path: str | os.PathLike | None = None, pipeline: TextPipeline | None = None) -> AspectModel:
    data = _read_json(path, "aspects.json")
    if not isinstance(data, dict) or not all(isinstance(v, list) for v in data.values()):
        raise DataError("aspect model must map labels to lists of seed words")
    return AspectModel.from_mapping(data, pipeline)


def load_default_model(pipeline: TextPipeline | None = None) -> AspectModel:
    """The 18 shipped aspects and their representative seed words."""
    return load_aspect_model(None, pipeline)


def save_aspect_model(model: AspectModel | Mapping[str, list[str]], path: str | os.PathLike) -> None:
    data = model.to_json() if isinstance(model, AspectModel) else dict(model)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


@dataclass(frozen=True, eq=False)
class DimensionModel:
    dimensions: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    descriptions: Mapping[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.dimensions)


def map_dimensions(model: AspectModel, mapping: Mapping[str, Mapping | Iterable[str]]) -> DimensionModel:
    """Group aspects into dimensions.

    ``mapping`` values are either aspect lists or ``{"description", "aspects"}``
    objects as found in dimension files.
    """
    dims, descs, owner = {}, {}, {}
    for dim, spec in mapping.items():
        if isinstance(spec, Mapping):
            aspects = list(spec.get("aspects", ()))
            descs[dim] = str(spec.get("description", ""))
        else:
            aspects = list(spec)
            descs[dim] = ""
        missing = [a for a in aspects if a not in model.aspects]
        if missing:
            raise UnknownAspect(f"dimension {dim!r} references unknown aspects {missing}")
        for a in aspects:
            if a in owner and owner[a] != dim:
                raise OverlappingDimensions(f"aspect {a!r} is in both {owner[a]!r} and {dim!r}")
            owner[a] = dim
        dims[dim] = tuple(dict.fromkeys(aspects))
    return DimensionModel(dims, descs)


def load_dimension_mapping(path: str | os.PathLike | None = None) -> dict:
    data = _read_json(path, "dimensions.json")
    if not isinstance(data, dict):
        raise DataError("dimension file must be a JSON object")
    return data


def load_default_dimensions(model: AspectModel | None = None) -> DimensionModel:
    return map_dimensions(model or load_default_model(), load_dimension_mapping())
