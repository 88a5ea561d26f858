"""
Inference Strategies
Linear-only prediction and LLM inference with rules, weights and the linear prediction
"""

import asyncio
import logging
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from backends.base import PURPOSE_INFERENCE, ChatBackend, ChatRequest
from combiner.logistic import PredictConfig, predict_label
from core.errors import CheckpointIntegrityError, ResponseParseError, StrategyError, UsageError
from core.features import feature_row
from core.types import Example, JudgmentMatrix
from dataset.loader import DatasetManifest
from evaluation.metrics import accuracy, macro_f1
from evaluation.report import StrategyResult
from genesis.generator import numbered_list
from genesis.templates import (
    INFER_RULES,
    INFER_WEIGHTS,
    INFER_WEIGHTS_PREDICTION,
    TemplateSet,
    example_binding,
)
from judge.parser import parse_label
from loop.artifacts import Checkpoint
from utils.error_tracker import ErrorTracker, get_error_tracker

logger = logging.getLogger(__name__)


class StrategyKind(str, Enum):
    """Inference strategies E1 to E4"""
    LINEAR_ONLY = "linear_only"
    LLM_RULES = "llm_rules"
    LLM_RULES_WEIGHTS = "llm_rules_weights"
    LLM_RULES_WEIGHTS_PREDICTION = "llm_rules_weights_prediction"

    @property
    def code(self) -> str:
        return _CODES[self]

    @property
    def uses_backend(self) -> bool:
        return self is not StrategyKind.LINEAR_ONLY

    @property
    def needs_judgments(self) -> bool:
        return self in (StrategyKind.LINEAR_ONLY, StrategyKind.LLM_RULES_WEIGHTS_PREDICTION)

    @classmethod
    def parse(cls, name: str) -> 'StrategyKind':
        """
        Look up a strategy by value ("linear_only") or code ("E1"), case-insensitive

        Raises:
            UsageError: Listing the valid names
        """
        key = name.strip().lower()
        for kind in cls:
            if key in (kind.value, kind.code.lower()):
                return kind
        valid = ", ".join(valid_strategy_names())
        raise UsageError(f"unknown strategy {name!r}; valid names: {valid}")


_CODES = {
    StrategyKind.LINEAR_ONLY: "E1",
    StrategyKind.LLM_RULES: "E2",
    StrategyKind.LLM_RULES_WEIGHTS: "E3",
    StrategyKind.LLM_RULES_WEIGHTS_PREDICTION: "E4",
}

_TEMPLATES = {
    StrategyKind.LLM_RULES: INFER_RULES,
    StrategyKind.LLM_RULES_WEIGHTS: INFER_WEIGHTS,
    StrategyKind.LLM_RULES_WEIGHTS_PREDICTION: INFER_WEIGHTS_PREDICTION,
}


def valid_strategy_names() -> List[str]:
    return [f"{kind.code}/{kind.value}" for kind in StrategyKind]


def _aligned_row(checkpoint: Checkpoint, judged_row: Sequence[int]) -> np.ndarray:
    row = np.asarray(judged_row)
    if row.ndim != 1 or row.size != len(checkpoint.rule_set):
        raise UsageError(
            f"judged row of length {row.size} does not match {len(checkpoint.rule_set)} rules"
        )
    return row


def infer_linear(
    checkpoint: Checkpoint,
    example: Example,
    judged_row: Sequence[int],
    config: Optional[PredictConfig] = None,
) -> int:
    """
    E1: the combiner's label for one judged example

    Raises:
        UsageError: If the row is not aligned to the checkpoint's rules
    """
    row = _aligned_row(checkpoint, judged_row)
    label = predict_label(checkpoint.params, row, config)
    logger.debug(f"E1 {example.id}: {label}")
    return label


def weighted_rule_lines(checkpoint: Checkpoint) -> str:
    """Rules in rule-set order, each with its weight to four decimals"""
    weights = checkpoint.params.weights()
    return numbered_list([
        f"{rule.text} (weight: {weights[rule.rule_id]:.4f})" for rule in checkpoint.rule_set
    ])


def inference_request(
    strategy: StrategyKind,
    checkpoint: Checkpoint,
    example: Example,
    manifest: DatasetManifest,
    templates: TemplateSet,
    linear_label: Optional[int] = None,
) -> ChatRequest:
    """
    Render the E2, E3 or E4 prompt for one example

    E2 lists the rules; E3 adds weights, the bias and the label-token explanation;
    E4 adds the combiner's reference label to the E3 prompt.

    Raises:
        UsageError: For E1, or for E4 without a linear label
    """
    if strategy not in _TEMPLATES:
        raise UsageError(f"{strategy.code} does not query a backend")
    if strategy is StrategyKind.LLM_RULES_WEIGHTS_PREDICTION and linear_label is None:
        raise UsageError("E4 needs the linear prediction of the example")

    binding: Dict[str, Any] = dict(example_binding(example, manifest.field_names))
    if strategy is StrategyKind.LLM_RULES:
        binding['hypotheses'] = numbered_list([rule.text for rule in checkpoint.rule_set])
    else:
        binding['weighted_hypotheses'] = weighted_rule_lines(checkpoint)
        binding['bias'] = f"{checkpoint.params.bias:.4f}"
        binding['pos_label'] = manifest.positive_token
        binding['neg_label'] = manifest.negative_token
    if strategy is StrategyKind.LLM_RULES_WEIGHTS_PREDICTION:
        binding['model_prediction'] = manifest.token_for_label(int(linear_label))

    rendered = templates.get(_TEMPLATES[strategy]).render(binding)
    return ChatRequest(
        purpose=PURPOSE_INFERENCE,
        system=rendered['system'],
        user=rendered['user'],
        context={
            'strategy': strategy.value,
            'example': example,
            'rule_texts': [rule.text for rule in checkpoint.rule_set],
            'weights': list(checkpoint.params.beta),
            'bias': checkpoint.params.bias,
            'reference_label': linear_label,
        },
    )


async def infer_llm(
    backend: ChatBackend,
    strategy: StrategyKind,
    checkpoint: Checkpoint,
    example: Example,
    manifest: DatasetManifest,
    templates: TemplateSet,
    linear_label: Optional[int] = None,
    error_tracker: Optional[ErrorTracker] = None,
) -> int:
    """
    E2-E4: ask the backend for the label of one example

    Raises:
        StrategyError: Off-format or abstaining answer; carries the raw response
        BackendError: Propagated from the backend
    """
    request = inference_request(strategy, checkpoint, example, manifest, templates, linear_label)
    response = await backend.complete(request)
    try:
        return parse_label(response, manifest)
    except ResponseParseError as e:
        (error_tracker or get_error_tracker()).record_error(
            error_type='strategy_parse_error',
            error=e,
            context={'strategy': strategy.code, 'example_id': example.id, 'raw': response[:200]},
        )
        raise StrategyError(f"{strategy.code} answer for {example.id}: {e}", raw=response) from e


def _check_matrix(checkpoint: Checkpoint, matrix: Optional[JudgmentMatrix], strategy: StrategyKind):
    if matrix is None:
        raise UsageError(f"{strategy.code} needs the judged test matrix")
    if tuple(matrix.rule_ids) != tuple(checkpoint.rule_set.rule_ids):
        raise CheckpointIntegrityError(
            f"judged rules {list(matrix.rule_ids)} do not match checkpoint rules "
            f"{checkpoint.rule_set.rule_ids}"
        )


async def evaluate_strategy(
    strategy: StrategyKind,
    checkpoint: Checkpoint,
    examples: Sequence[Example],
    matrix: Optional[JudgmentMatrix] = None,
    backend: Optional[ChatBackend] = None,
    manifest: Optional[DatasetManifest] = None,
    templates: Optional[TemplateSet] = None,
    predict_config: Optional[PredictConfig] = None,
    seed: int = 0,
    error_tracker: Optional[ErrorTracker] = None,
) -> StrategyResult:
    """
    Run one strategy over a test split, each example exactly once

    Accuracy and macro-F1 are computed over parsed answers; `parse_coverage` is the
    parsed fraction. E1 makes no backend call.

    Raises:
        UsageError: Duplicate example ids or missing inputs for the strategy
        CheckpointIntegrityError: Judged rules differ from the checkpoint's
        StrategyError: If no answer could be parsed
    """
    ids = [e.id for e in examples]
    if not ids:
        raise UsageError("cannot evaluate on an empty split")
    if len(set(ids)) != len(ids):
        raise UsageError("evaluation examples must have unique ids")

    linear: Dict[str, int] = {}
    if strategy.needs_judgments:
        _check_matrix(checkpoint, matrix, strategy)
        for example in examples:
            linear[example.id] = infer_linear(
                checkpoint, example, feature_row(matrix, example.id), predict_config
            )

    if strategy is StrategyKind.LINEAR_ONLY:
        outcomes: List[Optional[int]] = [linear[e.id] for e in examples]
    else:
        if backend is None or manifest is None or templates is None:
            raise UsageError(f"{strategy.code} needs a backend, a manifest and templates")
        tracker = error_tracker or get_error_tracker()
        semaphore = asyncio.Semaphore(max(1, backend.capabilities.max_in_flight))

        async def _one(example: Example) -> int:
            async with semaphore:
                return await infer_llm(
                    backend, strategy, checkpoint, example, manifest, templates,
                    linear.get(example.id), tracker,
                )

        answers = await asyncio.gather(*(_one(e) for e in examples), return_exceptions=True)
        outcomes = []
        for answer in answers:
            if isinstance(answer, StrategyError):
                outcomes.append(None)
            elif isinstance(answer, BaseException):
                raise answer
            else:
                outcomes.append(int(answer))

    predictions = [
        {'example_id': e.id, 'label': e.label, 'prediction': p, 'strategy': strategy.value}
        for e, p in zip(examples, outcomes)
    ]
    parsed = [(p['prediction'], p['label']) for p in predictions if p['prediction'] is not None]
    if not parsed:
        raise StrategyError(f"{strategy.code} produced no parseable answer")

    preds, labels = zip(*parsed)
    result = StrategyResult(
        strategy=strategy.value,
        seed=seed,
        predictions=predictions,
        accuracy=accuracy(preds, labels),
        macro_f1=macro_f1(preds, labels),
        parse_coverage=len(parsed) / len(predictions),
    )
    logger.info(
        f"{strategy.code} seed {seed}: accuracy={result.accuracy:.4f}, "
        f"macro-F1={result.macro_f1:.4f}, parsed {len(parsed)}/{len(predictions)}"
    )
    return result
