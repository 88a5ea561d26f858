"""
CLI Commands
run, evaluate, inspect-cache and make-splits
"""

import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional, TextIO, Tuple, Union

from backends.base import CountingBackend, close_quietly
from backends.factory import BackendFactory
from cli.config import RunConfig
from combiner.logistic import CombinerParams
from core.errors import DatasetIntegrityError
from core.types import Example, Rule, RuleOrigin, RuleSet, SplitBundle
from data_quality.validator import DatasetQualityMonitor
from dataset.loader import DatasetManifest, load_jsonl
from dataset.splits import load_split_manifest, make_splits, sample_initial, save_split_manifest
from evaluation.report import EvalReport
from evaluation.strategies import StrategyKind, evaluate_strategy, inference_request
from genesis.generator import GenerationRequest, generation_prompt
from genesis.templates import TemplateSet, load_template_set
from judge.cache import JudgmentCache, summarize_cache
from judge.judge import judge_matrix, judgment_request
from loop.artifacts import Checkpoint, RunDirectory
from loop.rlie import PipelineBackends, run_rlie
from utils.error_tracker import ErrorTracker

logger = logging.getLogger(__name__)

# backend construction is injectable so tests can count calls without a network
BackendBuilder = Callable[[RunConfig, DatasetManifest], object]


def default_backend_builder(config: RunConfig, manifest: DatasetManifest):
    return BackendFactory.create_backend(config.backend, manifest)


def load_inputs(config: RunConfig) -> Tuple[List[Example], DatasetManifest, TemplateSet]:
    """
    Load and quality-check the dataset, and load its templates

    Raises:
        ConfigError: Missing input files
        DatasetIntegrityError: If the dataset fails a quality check
    """
    config.validate_paths()
    manifest = config.dataset.manifest
    examples = load_jsonl(config.dataset.path)
    templates = load_template_set(config.dataset.templates)

    monitor = DatasetQualityMonitor()
    checks = monitor.validate_examples(examples, manifest)
    report = monitor.generate_quality_report(checks)
    failed = [name for name, ok in checks.items() if not ok]
    if failed or checks.get('empty'):
        logger.error(report)
        raise DatasetIntegrityError(
            f"dataset {config.dataset.path} failed checks: {failed or ['empty']}"
        )
    logger.info(report)
    return examples, manifest, templates


def build_splits(config: RunConfig, examples: List[Example], seed: int) -> SplitBundle:
    """Splits from the configured manifest, or freshly drawn under `seed`"""
    if config.dataset.splits_file:
        return load_split_manifest(config.dataset.splits_file, examples)
    bundle = make_splits(examples, config.dataset.split_sizes, seed)
    checks = DatasetQualityMonitor().validate_splits(bundle)
    logger.info(f"Splits for seed {seed}: sizes={bundle.sizes()}, checks={checks}")
    return bundle


def _run_dir_root(config: RunConfig, out_dir: Optional[str]) -> Path:
    return Path(out_dir or config.output_dir)


def _placeholder_checkpoint(count: int = 2) -> Checkpoint:
    rules = tuple(
        Rule(rule_id=f"it01-h{i:02d}", text=f"<placeholder rule {i}>", born_iteration=1)
        for i in range(1, count + 1)
    )
    rule_set = RuleSet(rules=rules, capacity=max(count, 1))
    params = CombinerParams(
        beta=tuple(0.0 for _ in rules), bias=0.0, lam=0.0, alpha=0.0,
        rule_ids=tuple(r.rule_id for r in rules),
    )
    return Checkpoint(
        iteration=0, rule_set=rule_set, params=params, val_accuracy=0.0, val_macro_f1=0.0
    )


def render_dry_run(
    config: RunConfig,
    splits: SplitBundle,
    manifest: DatasetManifest,
    templates: TemplateSet,
) -> str:
    """Every prompt kind rendered once, with placeholder rules, without any backend"""
    sections = []

    def _add(title: str, system: str, user: str):
        sections.append(
            f"===== {title} / system =====\n{system}\n\n===== {title} / user =====\n{user}\n"
        )

    sample = sample_initial(splits.train, config.loop.init_k, config.loop.seed)
    request = GenerationRequest(
        mode=RuleOrigin.INITIAL, observations=tuple(sample),
        num_hypotheses=config.loop.init_h, iteration=1,
    )
    rendered = generation_prompt(request, templates, manifest)
    _add("generation", rendered.system, rendered.user)

    checkpoint = _placeholder_checkpoint()
    example = splits.test[0]
    judged = judgment_request(checkpoint.rule_set.rules[0], example, manifest, templates)
    _add("judgment", judged.system, judged.user)

    for kind in StrategyKind:
        if not kind.uses_backend:
            continue
        rendered = inference_request(kind, checkpoint, example, manifest, templates, linear_label=1)
        _add(f"{kind.code} {kind.value}", rendered.system, rendered.user)

    return "\n".join(sections)


async def run_one_seed(
    config: RunConfig,
    seed: int,
    examples: List[Example],
    manifest: DatasetManifest,
    templates: TemplateSet,
    cache: JudgmentCache,
    root: Path,
    backend_builder: BackendBuilder = default_backend_builder,
    show_progress: bool = False,
) -> EvalReport:
    """Learn rules under one seed and evaluate every configured strategy on its test split"""
    splits = build_splits(config, examples, seed)
    run_dir = RunDirectory(root, config.run_id, seed)
    run_dir.write_config(config.with_seed(seed).to_yaml())
    run_dir.write_splits(splits, config.dataset.split_sizes)
    run_dir.write_templates(templates)

    tracker = ErrorTracker()
    backend = CountingBackend(backend_builder(config, manifest))
    report = EvalReport()
    try:
        loop_config = config.loop.model_copy(update={'seed': seed})
        best, _ = await run_rlie(
            splits, PipelineBackends.single(backend), templates, manifest, cache,
            loop_config, config.combiner, run_dir, tracker, show_progress,
        )

        kinds = config.evaluation.kinds()
        matrix = None
        if any(kind.needs_judgments for kind in kinds):
            matrix = await judge_matrix(
                backend, best.rule_set.rules, splits.test, cache, manifest, templates,
                error_tracker=tracker, show_progress=show_progress,
            )
        for kind in kinds:
            report.add(await evaluate_strategy(
                kind, best, splits.test, matrix, backend, manifest, templates,
                config.combiner.predict(), seed, tracker,
            ))
        off_format = tracker.count('strategy_parse_error')
        if off_format:
            logger.warning(f"⚠️ Seed {seed}: {off_format} inference answers were off-format")
    finally:
        run_dir.write_json(
            'backend_calls.json', {'total': backend.calls, 'by_purpose': dict(backend.counts)}
        )
        run_dir.write_errors(tracker)
        await close_quietly(backend)

    report.write(run_dir.path)
    return report


async def cmd_run(
    config: RunConfig,
    out_dir: Optional[str] = None,
    dry_run: bool = False,
    backend_builder: BackendBuilder = default_backend_builder,
    stdout: Optional[TextIO] = None,
) -> int:
    """
    Learn and evaluate one model per seed, then write the aggregate report

    Raises:
        ConfigError: Before any backend call, when an input is missing
        RLIEError: Any fatal pipeline error
    """
    stdout = stdout or sys.stdout
    examples, manifest, templates = load_inputs(config)
    root = _run_dir_root(config, out_dir)
    root.mkdir(parents=True, exist_ok=True)
    seeds = config.run_seeds()

    if dry_run:
        splits = build_splits(config, examples, seeds[0])
        target = root / 'dry_run_prompts.txt'
        with open(target, 'w', encoding='utf-8') as f:
            f.write(render_dry_run(config.with_seed(seeds[0]), splits, manifest, templates))
        print(f"📝 Prompts written to {target}", file=stdout)
        return 0

    logger.info(
        f"🚀 Run {config.run_id}: seeds {seeds}, "
        f"strategies {list(config.evaluation.strategies)}"
    )
    aggregate = EvalReport()
    with JudgmentCache(config.cache_path) as cache:
        for seed in seeds:
            report = await run_one_seed(
                config, seed, examples, manifest, templates, cache, root, backend_builder,
                show_progress=stdout.isatty(),
            )
            for result in report.results:
                aggregate.add(result)

    aggregate.write(root, stem=f"{config.run_id}_eval")
    print(aggregate.render_table(), file=stdout, end="")
    return 0


async def cmd_evaluate(
    checkpoint_path: Union[str, Path],
    strategy: str,
    config: RunConfig,
    out_dir: Optional[str] = None,
    backend_builder: BackendBuilder = default_backend_builder,
    stdout: Optional[TextIO] = None,
) -> int:
    """
    Evaluate one strategy of a saved checkpoint on the test split of the first seed

    Raises:
        UsageError: Unknown strategy name
        CheckpointIntegrityError: Unreadable checkpoint, missing combiner params, or
            judgments that do not match its rules
    """
    stdout = stdout or sys.stdout
    kind = StrategyKind.parse(strategy)
    checkpoint = Checkpoint.load(checkpoint_path)
    examples, manifest, templates = load_inputs(config)
    seed = config.run_seeds()[0]
    splits = build_splits(config, examples, seed)

    tracker = ErrorTracker()
    backend = None
    report = EvalReport()
    try:
        with JudgmentCache(config.cache_path) as cache:
            backend = CountingBackend(backend_builder(config, manifest))
            matrix = None
            if kind.needs_judgments:
                matrix = await judge_matrix(
                    backend, checkpoint.rule_set.rules, splits.test, cache, manifest, templates,
                    error_tracker=tracker,
                )
            report.add(await evaluate_strategy(
                kind, checkpoint, splits.test, matrix, backend, manifest, templates,
                config.combiner.predict(), seed, tracker,
            ))
    finally:
        await close_quietly(backend)

    target = Path(out_dir) if out_dir else Path(checkpoint_path).parent
    report.write(target, stem=f"eval_{kind.value}")
    print(report.render_table(), file=stdout, end="")
    logger.info(f"{kind.code} backend calls: {dict(backend.counts)}")
    return 0


def cmd_inspect_cache(cache_path: Union[str, Path], stdout: Optional[TextIO] = None) -> int:
    """Print entry count, per-rule coverage, corrupt lines and the last run's hit rate"""
    stdout = stdout or sys.stdout
    summary = summarize_cache(cache_path)
    print(f"{summary['entries']} entries", file=stdout)

    for rule, stats in summary['rule_coverage'].items():
        print(
            f"  coverage {stats['coverage']:.3f} over {stats['judged']} judged: {rule}",
            file=stdout,
        )

    for bad in summary['corrupt']:
        logger.warning(f"Corrupt cache line {bad['line']} (key={bad['key']}): {bad['error']}")
        print(f"⚠️ corrupt line {bad['line']} (key={bad['key']}): {bad['error']}", file=stdout)

    last_run = summary['last_run']
    if last_run:
        print(
            f"last run: hit rate {last_run.get('hit_rate', 0.0):.3f} "
            f"({last_run.get('hits', 0)} hits, {last_run.get('misses', 0)} misses)",
            file=stdout,
        )
    return 0


def cmd_make_splits(
    config: RunConfig,
    seed: Optional[int] = None,
    output: Optional[Union[str, Path]] = None,
    stdout: Optional[TextIO] = None,
) -> int:
    """Draw and save a split manifest under `seed` (default: the first configured seed)"""
    stdout = stdout or sys.stdout
    examples, _, _ = load_inputs(config)
    seed = config.run_seeds()[0] if seed is None else seed
    bundle = make_splits(examples, config.dataset.split_sizes, seed)

    monitor = DatasetQualityMonitor()
    print(monitor.generate_quality_report(monitor.validate_splits(bundle)), file=stdout)

    target = Path(output) if output else _run_dir_root(config, None) / f"splits_seed{seed}.json"
    save_split_manifest(bundle, target, config.dataset.split_sizes)
    print(f"✅ Splits {bundle.sizes()} written to {target}", file=stdout)
    return 0

