"""Stage runners with content-hashed manifests.

Each stage writes into its own subdirectory of ``output_dir`` together with
a ``manifest.json`` that records the SHA-256 of every input that shaped the
outputs, a hash of the stage parameters, and the hashes of the outputs.
``run_pipeline`` skips a stage whose recorded key still matches.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import shutil
import tempfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import __version__
from .aspects import (AspectModel, DimensionModel, draft_model, load_aspect_model, load_dimension_mapping,
                      map_dimensions, save_aspect_model)
from .config import CLUSTER_PARAMS, DEFAULT, INGEST_PARAMS, SCORE_PARAMS, TEXT_PARAMS, PipelineConfig
from .corpus import (DictionaryTranslator, IdentityTranslator, ReviewCorpus, clean_reviews, load_corpus,
                     standardize_language, write_corpus)
from .embeddings import load_vectors, similarity_matrix
from .entities import build_vocabulary, lemma_frequencies
from .errors import ConfigError, DataError
from .lexnet import build_graph, is_complete, louvain_best_of, modularity, prune_clusters, write_edge_list, write_partition
from .scoring import load_sentiment_lexicon, score_corpus
from .textprep import ProcessedReview, TextPipeline, load_lemma_rules, load_stoplist, load_wordlist, preprocess

log = logging.getLogger(__name__)

INGEST_DIR, CLUSTER_DIR, SCORE_DIR = "ingest", "cluster", "score"
MANIFEST = "manifest.json"
# below this many reviews worker start-up costs more than it saves
PARALLEL_MIN_REVIEWS = 2000


# --- hashing / io -----------------------------------------------------------

def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_json(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def _resource_hash(name: str) -> str:
    return hashlib.sha256(resources.files("aspectscore.data").joinpath(name).read_bytes()).hexdigest()


def _input_hash(path: str | None, default_resource: str | None) -> str | None:
    if path is None or path == DEFAULT:
        return f"builtin:{_resource_hash(default_resource)}" if default_resource else None
    if not os.path.exists(path):
        raise ConfigError(f"input file not found: {path}")
    return sha256_file(path)


def _dump_json(obj, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


@dataclass
class StageResult:
    name: str
    skipped: bool
    outputs: dict[str, str]
    status: str = "ok"


def _stage_key(params: dict, inputs: dict) -> str:
    return sha256_json({"params": params, "inputs": inputs, "version": __version__})


def _up_to_date(stage_dir: Path, key: str) -> bool:
    mpath = stage_dir / MANIFEST
    if not mpath.exists():
        return False
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except ValueError:
        return False
    if manifest.get("key") != key:
        return False
    for name, digest in manifest.get("outputs", {}).items():
        p = stage_dir / name
        if not p.exists() or sha256_file(p) != digest:
            return False
    return True


def _commit(stage_dir: Path, tmp_dir: Path, stage: str, key: str, params: dict, inputs: dict, seed: int) -> dict[str, str]:
    """Hash outputs in ``tmp_dir``, write the manifest, then swap into place."""
    outputs = {p.name: sha256_file(p) for p in sorted(tmp_dir.iterdir())}
    manifest = {
        "stage": stage,
        "version": __version__,
        "seed": seed,
        "key": key,
        "config_hash": sha256_json(params),
        "params": params,
        "inputs": inputs,
        "outputs": outputs,
    }
    _dump_json(manifest, tmp_dir / MANIFEST)
    if stage_dir.exists():
        shutil.rmtree(stage_dir)
    os.replace(tmp_dir, stage_dir)
    return outputs


def _run_stage(cfg: PipelineConfig, stage: str, params: dict, inputs: dict, body: Callable[[Path], str | None],
               force: bool) -> StageResult:
    out_root = Path(cfg.output_dir)
    stage_dir = out_root / stage
    key = _stage_key(params, inputs)
    if not force and _up_to_date(stage_dir, key):
        log.info("%s: up to date, skipped", stage)
        return StageResult(stage, True, {})
    out_root.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{stage}-", dir=out_root))
    try:
        status = body(tmp) or "ok"
        outputs = _commit(stage_dir, tmp, stage, key, params, inputs, cfg.seed)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    log.info("%s: done (%s)", stage, ", ".join(sorted(outputs)))
    return StageResult(stage, False, outputs, status)


# --- shared helpers ---------------------------------------------------------

def text_pipeline(cfg: PipelineConfig) -> TextPipeline:
    return TextPipeline(load_stoplist(cfg.stoplist), load_lemma_rules(cfg.lemma_rules, cfg.lemma_exceptions),
                        lemmatize_first=cfg.lemmatize_first)


def _text_inputs(cfg: PipelineConfig) -> dict:
    return {
        "stoplist": _input_hash(cfg.stoplist, "stoplist.txt"),
        "lemma_rules": _input_hash(cfg.lemma_rules, "lemma_rules.tsv"),
        "lemma_exceptions": _input_hash(cfg.lemma_exceptions, "lemma_exceptions.tsv"),
    }


def _preprocess_chunk(pipeline: TextPipeline, reviews):
    return [preprocess(r, pipeline) for r in reviews]


def preprocess_corpus(corpus: ReviewCorpus, pipeline: TextPipeline, threads: int = 1) -> list[ProcessedReview]:
    """Preprocess every review; with ``threads > 1`` chunks go to worker processes, merged in input order."""
    reviews = list(corpus)
    if threads <= 1 or len(reviews) < PARALLEL_MIN_REVIEWS:
        return _preprocess_chunk(pipeline, reviews)
    size = max(500, len(reviews) // (threads * 4))
    chunks = [reviews[i:i + size] for i in range(0, len(reviews), size)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(partial(_preprocess_chunk, pipeline), chunks)
        return [p for part in parts for p in part]


def _ingested_corpus(cfg: PipelineConfig) -> Path:
    path = Path(cfg.output_dir) / INGEST_DIR / "corpus.jsonl"
    if not path.exists():
        raise ConfigError(f"{path} not found; run the ingest stage first")
    return path


# --- stages -----------------------------------------------------------------

def stage_ingest(cfg: PipelineConfig, force: bool = True) -> StageResult:
    if not cfg.corpus:
        raise ConfigError("config has no corpus path")
    if not os.path.isfile(cfg.corpus):
        raise ConfigError(f"corpus not readable: {cfg.corpus}")
    params = cfg.params(INGEST_PARAMS)
    inputs = {"corpus": sha256_file(cfg.corpus)}
    if cfg.translator == "dictionary":
        inputs["translation_dictionary"] = _input_hash(cfg.translation_dictionary, None)

    def body(out: Path):
        corpus = load_corpus(cfg.corpus, cfg.corpus_format)
        n_in = len(corpus)
        translator = (DictionaryTranslator.from_file(cfg.translation_dictionary)
                      if cfg.translator == "dictionary" else IdentityTranslator())

        def translate(c):
            before = {(r.listing_id, r.review_id): r.text for r in c}
            after = standardize_language(c, translator, cfg.target_language, on_error=cfg.on_translation_error,
                                         ascii_threshold=cfg.ascii_threshold)
            changed = sum(1 for r in after if before[(r.listing_id, r.review_id)] != r.text)
            return after, changed, len(c) - len(after)

        if cfg.translate_first:
            corpus, translated, skipped = translate(corpus)
            corpus, removed = clean_reviews(corpus, cfg.min_alnum)
        else:
            corpus, removed = clean_reviews(corpus, cfg.min_alnum)
            corpus, translated, skipped = translate(corpus)
        if len(corpus) == 0:
            log.warning("ingest: no reviews left")
        histogram = Counter(len(ix) for ix in corpus.listing_index.values())
        write_corpus(corpus, out / "corpus.jsonl", "jsonl")
        _dump_json({
            "input_reviews": n_in,
            "kept": len(corpus),
            "removed": removed,
            "translated": translated,
            "translation_skipped": skipped,
            "listings": len(corpus.listing_index),
            "reviews_per_listing": {str(k): histogram[k] for k in sorted(histogram)},
            "seed": cfg.seed,
        }, out / "stats.json")

    return _run_stage(cfg, INGEST_DIR, params, inputs, body, force)


def stage_cluster(cfg: PipelineConfig, force: bool = True) -> StageResult:
    if not cfg.vectors:
        raise ConfigError("config has no vectors path")
    corpus_path = _ingested_corpus(cfg)
    params = cfg.params(CLUSTER_PARAMS)
    inputs = {"corpus": sha256_file(corpus_path), "vectors": _input_hash(cfg.vectors, None), **_text_inputs(cfg)}
    if cfg.entity_lexicon:
        inputs["entity_lexicon"] = _input_hash(cfg.entity_lexicon, None)

    def body(out: Path):
        pipeline = text_pipeline(cfg)
        processed = preprocess_corpus(load_corpus(corpus_path, "jsonl"), pipeline, cfg.threads)
        lexicon = None
        if cfg.entity_lexicon:
            lexicon = {lem for w in load_wordlist(cfg.entity_lexicon) for lem in pipeline.normalize_term(w)}
        vocab = build_vocabulary(lemma_frequencies(processed), cfg.entity_mode, lexicon, cfg.min_count, cfg.max_vocab)
        store = load_vectors(cfg.vectors, cfg.vectors_limit)
        pairs = similarity_matrix(vocab, store)
        if pairs.oov:
            log.warning("cluster: %d entity lemmas have no vector and are dropped", len(pairs.oov))
        graph = build_graph(pairs, cfg.threshold)
        complete = is_complete(graph)
        if complete:
            log.warning("cluster: the thresholded graph is fully connected; community detection "
                        "cannot separate anything (raise the threshold)")
        found = louvain_best_of(graph, cfg.seed, cfg.restarts, min_gain=cfg.min_gain)
        isolated = graph.isolated
        drop = set(cfg.drop_ids) | {c for c, g in found.communities.items() if g <= isolated}
        pruned = prune_clusters(found, cfg.min_cluster_size, drop)

        _dump_json({"source": vocab.source, "entries": dict(vocab.entries)}, out / "vocabulary.json")
        write_edge_list(graph, out / "edges.txt")
        write_partition(pruned, out / "partition.json")
        _dump_json({"modularity": found.quality, "partition": {t: c for t, c in found.community_of.items()}},
                   out / "raw_partition.json")
        _dump_json({
            "seed": cfg.seed,
            "threshold": cfg.threshold,
            "nodes": len(graph),
            "edges": len(graph.edges),
            "total_weight": graph.total_weight,
            "isolated": len(isolated),
            "complete_graph": complete,
            "oov": list(pairs.oov),
            "modularity": found.quality,
            "communities_found": len(found),
            "communities_kept": len(pruned),
            "unassigned": len(pruned.unassigned),
            "cluster_sizes": {str(c): n for c, n in pruned.sizes.items()},
        }, out / "report.json")
        save_aspect_model(draft_model(pruned), out / "draft_aspects.json")
        if len(pruned) == 0:
            log.warning("cluster: no community survived pruning")

    return _run_stage(cfg, CLUSTER_DIR, params, inputs, body, force)


def load_models(cfg: PipelineConfig, pipeline: TextPipeline, aspect_path: str | None) -> tuple[AspectModel, DimensionModel | None]:
    model = load_aspect_model(None if aspect_path == DEFAULT else aspect_path, pipeline)
    dims = None
    if cfg.dimension_model:
        mapping = load_dimension_mapping(None if cfg.dimension_model == DEFAULT else cfg.dimension_model)
        dims = map_dimensions(model, mapping)
    return model, dims


def stage_score(cfg: PipelineConfig, force: bool = True, aspect_model: str | None = None,
                upstream: dict | None = None) -> StageResult:
    aspect_path = aspect_model or cfg.aspect_model
    if not aspect_path:
        raise ConfigError("no aspect model configured: label the clusters in cluster/draft_aspects.json "
                          "and set 'aspect_model' to that file (or to \"default\" for the shipped model)")
    corpus_path = _ingested_corpus(cfg)
    params = cfg.params(SCORE_PARAMS)
    inputs = {
        "corpus": sha256_file(corpus_path),
        "aspect_model": _input_hash(aspect_path, "aspects.json"),
        "sentiment_lexicon": _input_hash(cfg.sentiment_lexicon, "sentiment_lexicon.tsv"),
        "negators": _input_hash(cfg.negators, "negators.txt"),
        **_text_inputs(cfg),
    }
    if cfg.dimension_model:
        inputs["dimension_model"] = _input_hash(cfg.dimension_model, "dimensions.json")
    vocab_path = Path(cfg.output_dir) / CLUSTER_DIR / "vocabulary.json"
    if cfg.score_entities == "vocabulary":
        if not vocab_path.exists():
            raise ConfigError(f"score_entities='vocabulary' needs {vocab_path}; run the cluster stage first")
        inputs["vocabulary"] = sha256_file(vocab_path)
    if upstream:
        inputs.update(upstream)

    def body(out: Path):
        pipeline = text_pipeline(cfg)
        model, dims = load_models(cfg, pipeline, aspect_path)
        lexicon = load_sentiment_lexicon(cfg.sentiment_lexicon, cfg.negators, cfg.negation_window, pipeline)
        vocab = None
        if cfg.score_entities == "vocabulary":
            vocab = json.loads(vocab_path.read_text(encoding="utf-8"))["entries"]
        processed = preprocess_corpus(load_corpus(corpus_path, "jsonl"), pipeline, cfg.threads)
        table = score_corpus(processed, model, lexicon, dims, vocab=vocab, literal_eq1=cfg.compat_literal_eq1,
                             sum_eq3=cfg.compat_sum_eq3, keep_review_scores=False)
        table.write(out / "scores.json", out / "scores.csv", seed=cfg.seed)
        if not table.listing_scores:
            log.warning("score: no aspect mentions found in any review")

    return _run_stage(cfg, SCORE_DIR, params, inputs, body, force)


def run_pipeline(cfg: PipelineConfig, force: bool = False) -> list[StageResult]:
    """Run enabled stages in order, skipping those whose inputs are unchanged.

    Without an aspect model the run stops after clustering so the draft
    model can be labeled by hand.
    """
    results = []
    stages = cfg.stages
    if stages.get("ingest", True):
        results.append(stage_ingest(cfg, force))
    upstream = None
    if stages.get("cluster", True):
        results.append(stage_cluster(cfg, force))
        manifest = json.loads((Path(cfg.output_dir) / CLUSTER_DIR / MANIFEST).read_text(encoding="utf-8"))
        # score inherits everything cluster consumed, so an upstream change reruns it
        upstream = {f"cluster/{k}": v for k, v in manifest["outputs"].items()}
        upstream.update({f"cluster-input/{k}": v for k, v in manifest["inputs"].items()})
    if stages.get("score", True):
        if not cfg.aspect_model:
            log.warning("no aspect_model configured; edit %s and rerun with aspect_model set",
                        Path(cfg.output_dir) / CLUSTER_DIR / "draft_aspects.json")
            results.append(StageResult(SCORE_DIR, True, {}, "awaiting-labels"))
            return results
        results.append(stage_score(cfg, force, upstream=upstream))
    return results
