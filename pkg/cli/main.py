"""
Command-Line Entry Point
rlie run | evaluate | inspect-cache | make-splits
"""

import argparse
import asyncio
import json
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from cli.commands import cmd_evaluate, cmd_inspect_cache, cmd_make_splits, cmd_run
from cli.config import EvaluationSection, RunConfig
from cli.logging_setup import setup_logging
from core.errors import ConfigError, RLIEError, UsageError

logger = logging.getLogger(__name__)

EXIT_FAILURE = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='rlie',
        description='Learn weighted natural-language rules with an LLM and a logistic combiner',
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    run = subparsers.add_parser('run', help='Learn rules for each seed and evaluate strategies')
    run.add_argument(
        '--config', default='config.yaml', help='Run configuration (default: config.yaml)'
    )
    run.add_argument('--seed', type=int, help='Run a single seed instead of the configured ones')
    run.add_argument('--strategy', action='append', help='Strategy to evaluate (repeatable; E1-E4)')
    run.add_argument('--out-dir', help='Directory for run directories and reports')
    run.add_argument(
        '--dry-run',
        action='store_true',
        help='Render every prompt kind to dry_run_prompts.txt without calling a backend',
    )

    evaluate = subparsers.add_parser('evaluate', help='Evaluate one strategy of a saved checkpoint')
    evaluate.add_argument('checkpoint', help='Path to a checkpoint JSON file')
    evaluate.add_argument('--config', default='config.yaml', help='Run configuration')
    evaluate.add_argument('--strategy', required=True, help='Strategy name or code (E1-E4)')
    evaluate.add_argument('--seed', type=int, help='Seed whose test split is evaluated')
    evaluate.add_argument('--out-dir', help='Report directory (default: next to the checkpoint)')

    inspect = subparsers.add_parser('inspect-cache', help='Summarize a judgment cache')
    inspect.add_argument('cache', help='Path to the judgment cache (JSONL)')

    splits = subparsers.add_parser('make-splits', help='Write a seeded split manifest')
    splits.add_argument('--config', default='config.yaml', help='Run configuration')
    splits.add_argument('--seed', type=int, help='Split seed (default: first configured seed)')
    splits.add_argument(
        '--output', help='Manifest path (default: <output_dir>/splits_seed<seed>.json)'
    )

    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_yaml(args.config)
    if getattr(args, 'strategy', None) and args.command == 'run':
        try:
            evaluation = EvaluationSection(strategies=tuple(args.strategy))
        except ValidationError as e:
            raise UsageError(f"invalid --strategy: {e}") from e
        config = config.model_copy(update={'evaluation': evaluation})
    if getattr(args, 'seed', None) is not None and args.command != 'make-splits':
        config = config.with_seed(args.seed)
    return config


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == 'inspect-cache':
        setup_logging()
        return cmd_inspect_cache(args.cache)

    config = _load_config(args)
    setup_logging(config.logging)

    if args.command == 'run':
        return asyncio.run(cmd_run(config, out_dir=args.out_dir, dry_run=args.dry_run))
    if args.command == 'evaluate':
        return asyncio.run(
            cmd_evaluate(args.checkpoint, args.strategy, config, out_dir=args.out_dir)
        )
    return cmd_make_splits(config, seed=args.seed, output=args.output)


def _report_error(error: Exception):
    record = {'error': type(error).__name__, 'message': str(error)}
    print(json.dumps(record), file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command

    Returns:
        0 on success, 2 on configuration or usage errors, 1 on other pipeline errors
    """
    load_dotenv()
    args = build_parser().parse_args(argv)

    try:
        return _dispatch(args)
    except (ConfigError, UsageError) as e:
        _report_error(e)
        return EXIT_CONFIG
    except RLIEError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        _report_error(e)
        return EXIT_FAILURE
    except KeyboardInterrupt:
        print("\n👋 Interrupted; completed judgments are cached", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
