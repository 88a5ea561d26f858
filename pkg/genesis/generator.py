"""
Rule Generator
Prompts a backend for candidate rules and parses its numbered list into Rule values
"""

import logging
import re
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from backends.base import PURPOSE_GENERATION, ChatBackend, ChatRequest
from core.errors import GenerationError, InvalidRuleError
from core.features import normalize_rule_text
from core.types import Example, Rule, RuleOrigin
from dataset.loader import DatasetManifest
from genesis.templates import GENERATION, OBSERVATION, REFINEMENT, TemplateSet, example_binding

logger = logging.getLogger(__name__)

_NUMBERED = re.compile(r'^\s*(\d+)\.\s*(.*)$')


def format_rule_id(iteration: int, index: int) -> str:
    return f"it{iteration:02d}-h{index:02d}"


def numbered_list(texts: Sequence[str]) -> str:
    """'1. A\\n2. B' rendering used for rule lists inside prompts"""
    return "\n".join(f"{i}. {text}" for i, text in enumerate(texts, start=1))


def render_observations(
    examples: Sequence[Example],
    manifest: DatasetManifest,
    templates: TemplateSet,
) -> str:
    """
    Render labeled examples through the observation template, one block per example

    Raises:
        TemplateError: If an example lacks a field the manifest names
    """
    template = templates.get(OBSERVATION)
    blocks = []
    for example in examples:
        binding = dict(example_binding(example, manifest.field_names))
        binding['label'] = manifest.token_for_label(example.label)
        blocks.append(template.render_user(binding))
    return "\n".join(blocks)


def _strip_brackets(item: str) -> str:
    item = item.strip()
    trimmed = item.rstrip('.').rstrip()
    if trimmed.startswith('[') and trimmed.endswith(']'):
        return trimmed[1:-1].strip()
    return item


def parse_numbered_list(text: str) -> List[str]:
    """
    Items of an "N. item" list, in order

    Lines before the first numbered line are ignored; a non-numbered line continues
    the current item. Surrounding brackets are stripped.

    Example:
        >>> parse_numbered_list("1. A sentence\\nthat wraps\\n2. B")
        ['A sentence that wraps', 'B']
    """
    items: List[List[str]] = []
    for line in (text or "").splitlines():
        match = _NUMBERED.match(line)
        if match:
            items.append([match.group(2).strip()])
        elif items and line.strip():
            items[-1].append(line.strip())

    parsed = []
    for parts in items:
        item = _strip_brackets(" ".join(p for p in parts if p))
        if item:
            parsed.append(item)
    return parsed


class GenerationRequest(BaseModel):
    """
    Inputs of one generation call

    Initial requests carry sampled examples only; refinement requests carry hard
    examples plus the current rules.
    """

    model_config = ConfigDict(frozen=True)

    mode: RuleOrigin
    observations: Tuple[Example, ...]
    prior_rules: Tuple[Rule, ...] = ()
    num_hypotheses: int = Field(ge=1)
    iteration: int = Field(default=1, ge=1)

    @model_validator(mode='after')
    def _mode_matches_rules(self) -> 'GenerationRequest':
        if self.mode == RuleOrigin.REFINEMENT and not self.prior_rules:
            raise ValueError("refinement requests need prior rules")
        if self.mode == RuleOrigin.INITIAL and self.prior_rules:
            raise ValueError("initial requests must not carry prior rules")
        return self


@dataclass(frozen=True)
class GenerationResult:
    """Parsed rules with the prompt and raw response they came from"""

    rules: List[Rule]
    raw: str
    request: ChatRequest


def generation_prompt(
    request: GenerationRequest,
    templates: TemplateSet,
    manifest: DatasetManifest,
) -> ChatRequest:
    """Render the generation or refinement prompt for a request"""
    binding = {
        'num_hypotheses': request.num_hypotheses,
        'observations': render_observations(request.observations, manifest, templates),
    }
    if request.mode == RuleOrigin.REFINEMENT:
        template = templates.get(REFINEMENT)
        binding['hypotheses_text'] = numbered_list([r.text for r in request.prior_rules])
    else:
        template = templates.get(GENERATION)

    rendered = template.render(binding)
    return ChatRequest(
        purpose=PURPOSE_GENERATION,
        system=rendered['system'],
        user=rendered['user'],
        context={
            'mode': request.mode.value,
            'iteration': request.iteration,
            'num_hypotheses': request.num_hypotheses,
        },
    )


async def run_generation(
    backend: ChatBackend,
    request: GenerationRequest,
    templates: TemplateSet,
    manifest: DatasetManifest,
) -> GenerationResult:
    """
    One generation call, keeping the raw response for auditing

    Raises:
        GenerationError: If the response yields no usable rule
        BackendError: Propagated from the backend
    """
    chat_request = generation_prompt(request, templates, manifest)
    raw = await backend.complete(chat_request)

    rules: List[Rule] = []
    seen = set()
    for item in parse_numbered_list(raw):
        try:
            normalized = normalize_rule_text(item)
        except InvalidRuleError:
            continue
        if normalized in seen:
            logger.debug(f"Dropping duplicate hypothesis in batch: {normalized}")
            continue
        seen.add(normalized)
        rules.append(Rule(
            rule_id=format_rule_id(request.iteration, len(rules) + 1),
            text=normalized,
            born_iteration=request.iteration,
            origin=request.mode,
        ))
        if len(rules) == request.num_hypotheses:
            break

    if not rules:
        raise GenerationError(
            f"{request.mode.value} generation in iteration {request.iteration} produced no rules",
            raw=raw,
        )

    logger.info(
        f"Generated {len(rules)} {request.mode.value} rules in iteration {request.iteration}"
    )
    return GenerationResult(rules=rules, raw=raw, request=chat_request)


async def generate_rules(
    backend: ChatBackend,
    request: GenerationRequest,
    templates: TemplateSet,
    manifest: DatasetManifest,
) -> List[Rule]:
    """Generate at most `request.num_hypotheses` distinct rules"""
    result = await run_generation(backend, request, templates, manifest)
    return result.rules
