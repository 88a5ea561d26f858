"""
Rule Judge
Applies rules to examples through a chat backend and assembles judgment matrices
"""

import asyncio
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from backends.base import PURPOSE_JUDGMENT, ChatBackend, ChatRequest
from core.errors import JudgeMatrixError, ResponseParseError, UsageError
from core.types import Example, Judgment, JudgmentMatrix, Rule
from dataset.loader import DatasetManifest
from genesis.templates import JUDGMENT, TemplateSet, example_binding
from judge.cache import JudgmentCache, judgment_key
from judge.parser import parse_judgment
from utils.error_tracker import ErrorTracker, get_error_tracker

logger = logging.getLogger(__name__)


def judgment_request(
    rule: Rule,
    example: Example,
    manifest: DatasetManifest,
    templates: TemplateSet,
) -> ChatRequest:
    """Render the single-rule judgment prompt"""
    binding: Dict[str, object] = {'hypothesis': rule.text}
    binding.update(example_binding(example, manifest.field_names))
    rendered = templates.get(JUDGMENT).render(binding)
    return ChatRequest(
        purpose=PURPOSE_JUDGMENT,
        system=rendered['system'],
        user=rendered['user'],
        context={'rule_id': rule.rule_id, 'rule_text': rule.text, 'example': example},
    )


async def judge_one(
    backend: ChatBackend,
    rule: Rule,
    example: Example,
    manifest: DatasetManifest,
    templates: TemplateSet,
    error_tracker: Optional[ErrorTracker] = None,
) -> Judgment:
    """
    Judge one rule on one example

    Raises:
        BackendError: Transport failure after retries
        ResponseParseError: Missing, ambiguous or unknown final answer
    """
    request = judgment_request(rule, example, manifest, templates)
    response = await backend.complete(request)
    try:
        return parse_judgment(response, manifest)
    except ResponseParseError as e:
        (error_tracker or get_error_tracker()).record_error(
            error_type='judgment_parse_error',
            error=e,
            context={'rule_id': rule.rule_id, 'example_id': example.id, 'raw': response[:200]},
        )
        raise


async def judge_matrix(
    backend: ChatBackend,
    rules: Sequence[Rule],
    examples: Sequence[Example],
    cache: JudgmentCache,
    manifest: DatasetManifest,
    templates: TemplateSet,
    error_tracker: Optional[ErrorTracker] = None,
    show_progress: bool = False,
) -> JudgmentMatrix:
    """
    Fill every (example, rule) cell, consulting the cache first

    Up to `backend.capabilities.max_in_flight` requests run concurrently. Each new
    judgment is cached as soon as it arrives, so a failed call leaves every
    completed cell resumable.

    Raises:
        UsageError: If rules or examples are empty
        JudgeMatrixError: If any cell could not be judged, with the missing count
    """
    if not rules or not examples:
        raise UsageError("judge_matrix needs at least one rule and one example")

    version = templates.get(JUDGMENT).version
    model = backend.capabilities.model
    values = np.zeros((len(examples), len(rules)), dtype=np.int8)

    pending: List[Tuple[int, int, str]] = []
    for i, example in enumerate(examples):
        for j, rule in enumerate(rules):
            key = judgment_key(version, model, rule.text, example)
            cached = cache.get(key)
            if cached is None:
                pending.append((i, j, key))
            else:
                values[i, j] = int(cached)

    if pending:
        logger.info(
            f"Judging {len(pending)} of {values.size} cells "
            f"({len(rules)} rules x {len(examples)} examples) with {backend.capabilities.name}"
        )
        semaphore = asyncio.Semaphore(backend.capabilities.max_in_flight)
        progress = tqdm(
            total=len(pending), desc="judging", unit="cell", disable=not show_progress or None
        )

        async def _judge_cell(i: int, j: int, key: str):
            async with semaphore:
                judgment = await judge_one(
                    backend, rules[j], examples[i], manifest, templates, error_tracker
                )
            cache.put(
                key, judgment, rule_text=rules[j].text, example_id=examples[i].id, model=model
            )
            values[i, j] = int(judgment)
            progress.update(1)

        results = await asyncio.gather(
            *(_judge_cell(i, j, key) for i, j, key in pending), return_exceptions=True
        )
        progress.close()

        failures = [r for r in results if isinstance(r, BaseException)]
        if failures:
            done = len(pending) - len(failures)
            logger.error(f"❌ {len(failures)} judgments failed; {done} cached")
            raise JudgeMatrixError(
                f"judgment failed: {failures[0]}", missing_cells=len(failures)
            ) from failures[0]

    return JudgmentMatrix(
        tuple(e.id for e in examples),
        tuple(r.rule_id for r in rules),
        values,
    )
