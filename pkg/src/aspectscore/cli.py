"""Command-line interface.

Usage:
    aspectscore ingest  --config run.json
    aspectscore cluster --config run.json --seed 7
    aspectscore score   --config run.json --compat-literal-eq1
    aspectscore run     --config run.json --threads 4

Exit codes: 0 success, 2 configuration error, 3 data error,
4 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

from .config import PipelineConfig
from .errors import AspectScoreError, ConfigError, InvariantViolation
from .pipeline import run_pipeline, stage_cluster, stage_ingest, stage_score

log = logging.getLogger("aspectscore")


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON or TOML pipeline config")
    p.add_argument("--seed", type=int, default=S, help="seed recorded in outputs (and used for shuffled restarts)")
    p.add_argument("--threads", type=int, default=S, help="worker processes for preprocessing")
    p.add_argument("--compat-literal-eq1", action="store_true", default=S,
                   help="rescale by the sum of raw polarities instead of the mention count")
    p.add_argument("--compat-sum-eq3", action="store_true", default=S,
                   help="sum review scores per listing instead of averaging")
    p.add_argument("--quiet", action="store_true", default=S, help="only log warnings and errors")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="aspectscore", parents=[common],
                                     description="Aspect-based service quality scoring from listing reviews.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="load, clean and language-standardize the corpus")
    sub.add_parser("cluster", parents=[common], help="build the entity graph and detect word communities")
    score = sub.add_parser("score", parents=[common], help="score listings with a labeled aspect model")
    score.add_argument("--aspect-model", help="aspect model JSON (overrides config; 'default' for the shipped one)")
    run = sub.add_parser("run", parents=[common], help="all stages, skipping those already up to date")
    run.add_argument("--aspect-model", help="aspect model JSON (overrides config)")
    run.add_argument("--force", action="store_true", help="rerun every stage")
    return parser


def _load_config(args) -> PipelineConfig:
    path = getattr(args, "config", None)
    if path is None:
        raise ConfigError("--config is required")
    try:
        cfg = PipelineConfig.load(path)
    except TypeError as e:
        raise ConfigError(f"bad config value: {e}") from None
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "threads", None) is not None:
        cfg.threads = args.threads
    if getattr(args, "compat_literal_eq1", False):
        cfg.compat_literal_eq1 = True
    if getattr(args, "compat_sum_eq3", False):
        cfg.compat_sum_eq3 = True
    if getattr(args, "aspect_model", None):
        cfg.aspect_model = args.aspect_model
    return cfg.validate()


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="%(asctime)s [%(levelname)s] %(message)s", datefmt="%H:%M:%S")
    logging.getLogger().setLevel(logging.WARNING if getattr(args, "quiet", False) else logging.INFO)
    try:
        cfg = _load_config(args)
        if args.command == "ingest":
            results = [stage_ingest(cfg)]
        elif args.command == "cluster":
            results = [stage_cluster(cfg)]
        elif args.command == "score":
            results = [stage_score(cfg)]
        else:
            results = run_pipeline(cfg, force=args.force)
    except InvariantViolation as e:
        log.error("internal invariant violated: %s", e)
        return e.exit_code
    except AspectScoreError as e:
        log.error("%s", e)
        return e.exit_code
    except (ValueError, OSError) as e:
        log.error("%s", e)
        return 3
    summary = {r.name: ("skipped" if r.skipped else "ran") if r.status == "ok" else r.status for r in results}
    if not getattr(args, "quiet", False):
        print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
