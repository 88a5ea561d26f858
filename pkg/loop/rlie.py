"""
Rule Learning Loop
Generate, judge, filter, prune and refit until validation accuracy stops improving
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from backends.base import ChatBackend
from combiner.logistic import (
    CombinerParams,
    PredictConfig,
    SolverConfig,
    objective,
    predict_proba_matrix,
)
from combiner.selection import (
    DEFAULT_ALPHAS,
    DEFAULT_FOLDS,
    DEFAULT_LAMBDAS,
    choose_hyperparams,
    default_grid,
    refit_final,
    score_grid,
)
from core.errors import GenerationError
from core.features import coverage, normalize_rule_text
from core.types import Example, JudgmentMatrix, Rule, RuleOrigin, RuleSet, SplitBundle
from dataset.loader import DatasetManifest
from dataset.splits import sample_initial
from evaluation.metrics import accuracy, macro_f1
from genesis.generator import GenerationRequest, GenerationResult, run_generation
from genesis.templates import TemplateSet
from judge.cache import JudgmentCache
from judge.judge import judge_matrix
from loop.artifacts import Checkpoint, RunDirectory, RunLog
from loop.selection import filter_by_coverage, merge_and_prune, rule_stats, select_hard_examples
from utils.error_tracker import ErrorTracker, get_error_tracker

logger = logging.getLogger(__name__)


class LoopConfig(BaseModel):
    """Loop hyperparameters"""

    model_config = ConfigDict(frozen=True)

    capacity: int = Field(default=10, ge=1)
    hard_k: int = Field(default=20, ge=1)
    init_k: int = Field(default=20, ge=1)
    gen_h: int = Field(default=5, ge=1)
    init_h: int = Field(default=10, ge=1)
    coverage_gamma: float = Field(default=0.2, ge=0.0, le=1.0)
    margin: float = Field(default=0.01, ge=0.0)
    patience: int = Field(default=2, ge=1)
    max_iterations: int = Field(default=10, ge=1)
    seed: int = 0


class CombinerConfig(BaseModel):
    """Hyperparameter grid, solver stopping rule and decision threshold"""

    model_config = ConfigDict(frozen=True)

    lambdas: Tuple[float, ...] = DEFAULT_LAMBDAS
    alphas: Tuple[float, ...] = DEFAULT_ALPHAS
    folds: int = Field(default=DEFAULT_FOLDS, ge=2)
    tol: float = Field(default=1e-8, gt=0.0)
    max_iter: int = Field(default=10000, ge=1)
    tau: float = Field(default=0.5, gt=0.0, lt=1.0)

    def grid(self) -> List[Tuple[float, float]]:
        return default_grid(self.lambdas, self.alphas)

    def solver(self) -> SolverConfig:
        return SolverConfig(tol=self.tol, max_iter=self.max_iter)

    def predict(self) -> PredictConfig:
        return PredictConfig(tau=self.tau)


@dataclass(frozen=True)
class PipelineBackends:
    """Backends for the three kinds of calls; one backend may serve all of them"""

    judge: ChatBackend
    generator: ChatBackend
    inference: Optional[ChatBackend] = None

    @classmethod
    def single(cls, backend: ChatBackend) -> 'PipelineBackends':
        return cls(judge=backend, generator=backend, inference=backend)


def _round(value: Optional[float]) -> Optional[float]:
    return None if value is None else round(float(value), 10)


class _RuleLearner:
    """State of one run: judged columns, current rules and the best checkpoint"""

    def __init__(
        self,
        splits: SplitBundle,
        backends: PipelineBackends,
        templates: TemplateSet,
        manifest: DatasetManifest,
        cache: JudgmentCache,
        config: LoopConfig,
        combiner: CombinerConfig,
        run_dir: Optional[RunDirectory],
        error_tracker: ErrorTracker,
        show_progress: bool,
    ):
        self.splits = splits
        self.backends = backends
        self.templates = templates
        self.manifest = manifest
        self.cache = cache
        self.config = config
        self.combiner = combiner
        self.run_dir = run_dir
        self.error_tracker = error_tracker
        self.show_progress = show_progress

        self.train_ids = [e.id for e in splits.train]
        self.y_train = np.asarray([e.label for e in splits.train])
        self.y_val = np.asarray([e.label for e in splits.validation])
        self.train_columns: Dict[str, np.ndarray] = {}
        self.val_columns: Dict[str, np.ndarray] = {}

        self.rule_set = RuleSet(rules=(), capacity=config.capacity)
        self.params: Optional[CombinerParams] = None
        self.val_accuracy: Optional[float] = None
        self.val_macro_f1: Optional[float] = None

    def _matrix(
        self, columns: Dict[str, np.ndarray], examples: Sequence[Example]
    ) -> JudgmentMatrix:
        return JudgmentMatrix.from_columns(
            [e.id for e in examples], columns, self.rule_set.rule_ids
        )

    def _generation_request(self, iteration: int) -> Tuple[GenerationRequest, Dict[str, Any]]:
        if iteration == 1:
            sample = sample_initial(self.splits.train, self.config.init_k, self.config.seed)
            request = GenerationRequest(
                mode=RuleOrigin.INITIAL,
                observations=tuple(sample),
                num_hypotheses=self.config.init_h,
                iteration=1,
            )
            return request, {'sampled_ids': [e.id for e in sample]}

        train_matrix = self._matrix(self.train_columns, self.splits.train)
        probas = predict_proba_matrix(self.params, train_matrix)
        hard_ids = select_hard_examples(self.train_ids, probas, self.y_train, self.config.hard_k)
        by_id = {e.id: e for e in self.splits.train}
        request = GenerationRequest(
            mode=RuleOrigin.REFINEMENT,
            observations=tuple(by_id[eid] for eid in hard_ids),
            prior_rules=self.rule_set.rules,
            num_hypotheses=self.config.gen_h,
            iteration=iteration,
        )
        return request, {'hard_example_ids': hard_ids}

    async def _generate(
        self, iteration: int, request: GenerationRequest
    ) -> Optional[GenerationResult]:
        try:
            result = await run_generation(
                self.backends.generator, request, self.templates, self.manifest
            )
        except GenerationError as e:
            self.error_tracker.record_error(
                'generation_error', e, context={'iteration': iteration, 'raw': e.raw[:200]}
            )
            if iteration == 1:
                raise
            return None
        if self.run_dir is not None:
            self.run_dir.write_generation(iteration, result)
        return result

    async def _judge_new(self, rules: List[Rule]):
        examples = list(self.splits.train) + list(self.splits.validation)
        matrix = await judge_matrix(
            self.backends.judge, rules, examples, self.cache, self.manifest, self.templates,
            error_tracker=self.error_tracker, show_progress=self.show_progress,
        )
        n_train = len(self.splits.train)
        for rule in rules:
            column = np.asarray(matrix.column(rule.rule_id))
            self.train_columns[rule.rule_id] = column[:n_train]
            self.val_columns[rule.rule_id] = column[n_train:]

    def _refit(self, record: Dict[str, Any]):
        X_train = self._matrix(self.train_columns, self.splits.train)
        X_val = self._matrix(self.val_columns, self.splits.validation)
        scores = score_grid(
            X_train, self.y_train, X_val, self.y_val,
            self.combiner.grid(), self.combiner.folds, self.config.seed, self.combiner.solver(),
        )
        lam, alpha = choose_hyperparams(scores)
        self.params = refit_final(
            X_train, self.y_train, lam, alpha, self.combiner.solver(), self.rule_set.rule_ids
        )

        tau = self.combiner.predict().tau
        preds = (predict_proba_matrix(self.params, X_val) >= tau).astype(int)
        self.val_accuracy = accuracy(preds, self.y_val)
        self.val_macro_f1 = macro_f1(preds, self.y_val)

        record.update({
            'lambda': lam,
            'alpha': alpha,
            'selection_scores': [
                {'lambda': s['lambda'], 'alpha': s['alpha'], 'score': _round(s['score'])}
                for s in scores
            ],
            'objective': _round(objective(self.params, X_train, self.y_train)),
            'weights': {rid: _round(w) for rid, w in self.params.weights().items()},
            'bias': _round(self.params.bias),
        })

    async def step(self, iteration: int) -> Dict[str, Any]:
        """Run one iteration and return its run-log record"""
        request, provenance = self._generation_request(iteration)
        record: Dict[str, Any] = {'iteration': iteration, 'mode': request.mode.value}
        record.update(provenance)

        result = await self._generate(iteration, request)
        generated = result.rules if result is not None else []
        known = self.rule_set.normalized_texts()
        candidates = [r for r in generated if normalize_rule_text(r.text) not in known]
        record['generated'] = [r.rule_id for r in generated]
        record['duplicates_of_current'] = [r.rule_id for r in generated if r not in candidates]

        kept: List[Rule] = []
        if candidates:
            await self._judge_new(candidates)
            kept = filter_by_coverage(candidates, self.train_columns, self.config.coverage_gamma)
        record['train_coverage'] = {
            r.rule_id: _round(coverage(self.train_columns[r.rule_id])) for r in candidates
        }
        record['rejected_low_coverage'] = [r.rule_id for r in candidates if r not in kept]

        if iteration == 1 and not kept:
            error = GenerationError("iteration 1 produced no rule above the coverage threshold")
            self.error_tracker.record_error('generation_error', error, context={'iteration': 1})
            raise error

        before = set(self.rule_set.rule_ids)
        if kept:
            ids = list(self.rule_set.rule_ids) + [r.rule_id for r in kept]
            stats = rule_stats({rid: self.val_columns[rid] for rid in ids}, self.y_val)
            self.rule_set = merge_and_prune(self.rule_set, kept, stats, self.config.capacity)
            record['val_rule_accuracy'] = {rid: _round(stats[rid].accuracy) for rid in ids}
            self._refit(record)
            record['status'] = 'refit'
        else:
            record['status'] = 'no_new_rules'

        after = set(self.rule_set.rule_ids)
        record['added'] = sorted(after - before)
        record['dropped'] = sorted(before - after)
        record['rule_set'] = list(self.rule_set.rule_ids)
        record['validation_accuracy'] = _round(self.val_accuracy)
        record['validation_macro_f1'] = _round(self.val_macro_f1)
        return record

    def checkpoint(self, iteration: int) -> Checkpoint:
        return Checkpoint(
            iteration=iteration,
            rule_set=self.rule_set,
            params=self.params,
            val_accuracy=float(self.val_accuracy),
            val_macro_f1=float(self.val_macro_f1),
            cache_stats=self.cache.get_stats(),
        )


async def run_rlie(
    splits: SplitBundle,
    backends: PipelineBackends,
    templates: TemplateSet,
    manifest: DatasetManifest,
    cache: JudgmentCache,
    config: Optional[LoopConfig] = None,
    combiner: Optional[CombinerConfig] = None,
    run_dir: Optional[RunDirectory] = None,
    error_tracker: Optional[ErrorTracker] = None,
    show_progress: bool = False,
) -> Tuple[Checkpoint, RunLog]:
    """
    Learn a rule set and its combiner

    Iteration 1 generates from a random training sample; later iterations refine
    from the hardest training examples and the current rules. Each iteration judges
    the new rules on train and validation, filters them by training coverage,
    merges and prunes to capacity, reselects (lambda, alpha) and refits. The loop
    stops after `patience` consecutive iterations whose validation accuracy does not
    exceed the best so far by more than `margin`, or at `max_iterations`. The test
    split is never judged here.

    Returns:
        (best checkpoint, run log); the best checkpoint has the maximal validation
        accuracy, the earliest one on ties

    Raises:
        GenerationError: If iteration 1 yields no usable rule
        JudgeMatrixError: If judging fails; completed judgments stay cached
        SelectionError: If the validation split holds a single class
    """
    config = config or LoopConfig()
    combiner = combiner or CombinerConfig()
    tracker = error_tracker or get_error_tracker()
    learner = _RuleLearner(
        splits, backends, templates, manifest, cache, config, combiner,
        run_dir, tracker, show_progress,
    )
    run_log = RunLog()

    best: Optional[Checkpoint] = None
    non_improving = 0
    run_log.stop_reason = 'max_iterations'

    logger.info(
        f"🚀 Rule learning: H={config.capacity}, k={config.hard_k}, h={config.gen_h}, "
        f"gamma={config.coverage_gamma}, margin={config.margin}, patience={config.patience}, "
        f"max_iterations={config.max_iterations}, seed={config.seed}"
    )

    for iteration in range(1, config.max_iterations + 1):
        record = await learner.step(iteration)
        checkpoint = learner.checkpoint(iteration)
        score = checkpoint.val_accuracy

        improved = best is None or score > best.val_accuracy + config.margin
        if best is None or score > best.val_accuracy:
            best = checkpoint
        non_improving = 0 if improved else non_improving + 1

        record['improved'] = improved
        record['best_iteration'] = best.iteration
        record['non_improving_streak'] = non_improving
        run_log.append(record)

        if run_dir is not None:
            run_dir.write_checkpoint(checkpoint)
            run_dir.write_run_log(run_log)

        logger.info(
            f"Iteration {iteration}: {len(learner.rule_set)} rules, "
            f"val acc={score:.4f}, f1={checkpoint.val_macro_f1:.4f}"
            f"{' ✅ improved' if improved else ''}"
        )

        if non_improving >= config.patience:
            run_log.stop_reason = 'early_stopping'
            break

    run_log.best_iteration = best.iteration
    if run_dir is not None:
        run_dir.write_best(best)
        run_dir.write_run_log(run_log)
        run_dir.write_errors(tracker)

    logger.info(
        f"✅ Best checkpoint: iteration {best.iteration} "
        f"(val acc={best.val_accuracy:.4f}, {len(best.rule_set)} rules, stop={run_log.stop_reason})"
    )
    return best, run_log
