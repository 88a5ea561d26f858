"""
Synthetic Judge Backend
Deterministic keyword oracle that stands in for a chat model offline
"""

import hashlib
import itertools
import logging
import re
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field

from backends.base import (
    PURPOSE_GENERATION,
    PURPOSE_INFERENCE,
    PURPOSE_JUDGMENT,
    BackendCapabilities,
    ChatRequest,
)
from core.errors import BackendError, ConfigError
from core.features import normalize_rule_text
from core.types import Example, Judgment, Rule
from dataset.loader import DatasetManifest

logger = logging.getLogger(__name__)

_QUOTED = re.compile(r"""['"‘’“”]([^'"‘’“”]+)['"‘’“”]""")
_NEGATION = re.compile(r"\b(?:not|never|no|without|lacks?)\b", re.IGNORECASE)

FILLER_WORDS = (
    "the", "a", "today", "team", "update", "new", "people", "city", "game", "music",
    "coffee", "weekend", "photo", "story", "morning", "project", "launch", "video",
    "friends", "market", "travel", "book", "night", "plan", "design", "school",
)


class KeywordPredicate(BaseModel):
    """
    Keyword test standing in for a natural-language rule

    The predicate holds when any keyword (all, with match="all") occurs as a whole
    word in the chosen fields. `applies_when` restricts the rule: if none of those
    keywords occur the rule abstains.
    """

    model_config = ConfigDict(frozen=True)

    keywords: List[str] = Field(min_length=1)
    polarity: Literal[1, -1] = 1
    match: Literal["any", "all"] = "any"
    fields: Optional[List[str]] = None
    applies_when: Optional[List[str]] = None


class SyntheticJudgeSpec(BaseModel):
    """
    Ground truth for the synthetic backend

    Args:
        rules: Normalized rule text -> predicate
        planted_rules: Rule texts whose disjunction defines the label
        abstain_keywords: Examples mentioning any of these get 0 from every rule
        noise: Probability of flipping a non-abstaining judgment, in [0, 1)
        seed: Seed of the per-(rule, example) flip stream
        generation_script: Generation responses, consumed in order, last one repeats
    """

    model_config = ConfigDict(frozen=True)

    rules: Dict[str, KeywordPredicate] = Field(default_factory=dict)
    planted_rules: List[str] = Field(default_factory=list)
    abstain_keywords: List[str] = Field(default_factory=list)
    noise: float = 0.0
    seed: int = 0
    generation_script: List[str] = Field(default_factory=list)

    def __init__(self, **data):
        noise = data.get('noise', 0.0)
        if not 0.0 <= float(noise) < 1.0:
            raise ConfigError(f"synthetic judge noise must be in [0, 1), got {noise}")
        rules = data.get('rules') or {}
        data['rules'] = {normalize_rule_text(text): p for text, p in rules.items()}
        super().__init__(**data)

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> 'SyntheticJudgeSpec':
        """Load a spec from a YAML file"""
        try:
            with open(path, 'r', encoding='utf-8') as f:
                raw = yaml.safe_load(f) or {}
        except OSError as e:
            raise ConfigError(f"Cannot read synthetic judge spec {path}: {e}") from e
        return cls(**raw)

    def predicate_for(self, rule_text: str) -> Optional[KeywordPredicate]:
        """Registered predicate for a rule, else one extracted from quoted keywords"""
        normalized = normalize_rule_text(rule_text)
        if normalized in self.rules:
            return self.rules[normalized]
        keywords = [k.strip() for k in _QUOTED.findall(normalized) if k.strip()]
        if not keywords:
            return None
        polarity = -1 if _NEGATION.search(_QUOTED.sub('', normalized)) else 1
        return KeywordPredicate(keywords=keywords, polarity=polarity)


def _field_text(example: Example, fields: Optional[Sequence[str]]) -> str:
    names = fields if fields is not None else list(example.fields.keys())
    return " ".join(example.fields.get(name, "") for name in names).lower()


def _mentions(text: str, keyword: str) -> bool:
    return re.search(rf"\b{re.escape(keyword.lower())}\b", text) is not None


def _flip_draw(seed: int, rule_text: str, example_id: str) -> float:
    digest = hashlib.sha256(f"{seed}|{rule_text}|{example_id}".encode('utf-8')).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], 'big'))
    return float(rng.random())


def synthetic_judge(
    spec: SyntheticJudgeSpec,
    rule: Union[Rule, str],
    example: Example,
) -> Judgment:
    """
    Judge one rule on one example with the keyword oracle

    The abstain predicate is checked first. A rule with no registered predicate
    and no quoted keyword abstains.
    """
    rule_text = normalize_rule_text(rule.text if isinstance(rule, Rule) else rule)
    predicate = spec.predicate_for(rule_text)
    if predicate is None:
        return Judgment.ABSTAIN

    text = _field_text(example, predicate.fields)
    if any(_mentions(text, k) for k in spec.abstain_keywords):
        return Judgment.ABSTAIN
    if predicate.applies_when and not any(_mentions(text, k) for k in predicate.applies_when):
        return Judgment.ABSTAIN

    hits = [_mentions(text, k) for k in predicate.keywords]
    holds = all(hits) if predicate.match == "all" else any(hits)
    value = predicate.polarity if holds else -predicate.polarity

    if spec.noise > 0 and _flip_draw(spec.seed, rule_text, example.id) < spec.noise:
        value = -value
    return Judgment(value)


class SyntheticBackend:
    """
    Chat backend answering from a SyntheticJudgeSpec

    - judgment requests: the keyword oracle, rendered through the manifest tokens
    - generation requests: the scripted responses of generation_script, in order
    - inference requests: majority vote (rules only), sign of the weighted sum
      (rules + weights) or the reference label (rules + weights + prediction)
    """

    def __init__(
        self, spec: SyntheticJudgeSpec, manifest: DatasetManifest, max_in_flight: int = 16
    ):
        self.spec = spec
        self.manifest = manifest
        self.capabilities = BackendCapabilities(
            name="synthetic",
            model=f"synthetic-noise{spec.noise:g}-seed{spec.seed}",
            max_in_flight=max_in_flight,
        )
        self._generation_cursor = 0

    async def complete(self, request: ChatRequest) -> str:
        if request.purpose == PURPOSE_JUDGMENT:
            return self._answer_judgment(request)
        if request.purpose == PURPOSE_GENERATION:
            return self._answer_generation()
        if request.purpose == PURPOSE_INFERENCE:
            return self._answer_inference(request)
        raise BackendError(f"synthetic backend cannot answer purpose {request.purpose!r}")

    async def aclose(self) -> None:
        return None

    def _final_answer(self, token: str) -> str:
        return f"Applying the pattern by keyword lookup.\n{{Final answer: {token}}}"

    def _answer_judgment(self, request: ChatRequest) -> str:
        context = request.context
        judgment = synthetic_judge(self.spec, context['rule_text'], context['example'])
        if judgment == Judgment.ABSTAIN:
            return self._final_answer(self.manifest.abstain_token)
        return self._final_answer(self.manifest.token_for_label(int(judgment == Judgment.POSITIVE)))

    def _answer_generation(self) -> str:
        script = self.spec.generation_script
        if not script:
            return "No hypotheses available."
        index = min(self._generation_cursor, len(script) - 1)
        self._generation_cursor += 1
        return script[index]

    def _votes(self, context) -> List[int]:
        example = context['example']
        return [int(synthetic_judge(self.spec, text, example)) for text in context['rule_texts']]

    def _answer_inference(self, request: ChatRequest) -> str:
        context = request.context
        strategy = context['strategy']

        if strategy == "llm_rules_weights_prediction":
            label = int(context['reference_label'])
        elif strategy == "llm_rules_weights":
            votes = self._votes(context)
            score = float(np.dot(context['weights'], votes)) + float(context['bias'])
            label = int(score >= 0)
        else:
            votes = self._votes(context)
            label = int(sum(votes) >= 0)
        return self._final_answer(self.manifest.token_for_label(label))


def build_planted_examples(
    n: int,
    planted_keywords: Sequence[str],
    distractor_keywords: Sequence[str] = (),
    keyword_prob: float = 0.3,
    seed: int = 0,
    field_name: str = "text",
    id_prefix: str = "ex",
) -> List[Example]:
    """
    Draw examples labeled by a planted keyword disjunction

    Each planted and distractor keyword appears independently with probability
    `keyword_prob`; the label is 1 iff at least one planted keyword appears.
    """
    rng = np.random.default_rng(seed)
    examples = []
    for i in range(n):
        words = list(rng.choice(FILLER_WORDS, size=int(rng.integers(4, 9)), replace=True))
        planted_hits = [k for k in planted_keywords if rng.random() < keyword_prob]
        distractor_hits = [k for k in distractor_keywords if rng.random() < keyword_prob]
        words.extend(planted_hits)
        words.extend(distractor_hits)
        rng.shuffle(words)
        examples.append(Example(
            id=f"{id_prefix}{i:04d}",
            fields={field_name: " ".join(str(w) for w in words)},
            label=int(bool(planted_hits)),
        ))
    return examples


def planted_bayes_accuracy(num_planted: int, keyword_prob: float, noise: float) -> float:
    """
    Bayes accuracy of predicting the planted disjunction from noisy rule judgments

    Enumerates every keyword-presence pattern and every observed judgment pattern;
    for each observation the best label is the one with the larger joint mass.
    """
    total = 0.0
    for observed in itertools.product((0, 1), repeat=num_planted):
        mass = [0.0, 0.0]
        for present in itertools.product((0, 1), repeat=num_planted):
            p_present = np.prod([keyword_prob if s else 1 - keyword_prob for s in present])
            p_observed = np.prod(
                [1 - noise if o == s else noise for o, s in zip(observed, present)]
            )
            mass[int(any(present))] += float(p_present * p_observed)
        total += max(mass)
    return total


def keyword_rule_text(keyword: str) -> str:
    """Rule text the synthetic judge maps to +1 when `keyword` occurs and to -1 otherwise"""
    return f'Texts that mention "{keyword}" are positive.'


def planted_generation_script(
    planted_keywords: Sequence[str],
    distractor_keywords: Sequence[str],
    initial_size: int = 10,
) -> List[str]:
    """
    Generation responses for a planted-keyword task

    The first response lists the planted rules among distractor rules; the second
    lists the distractors not yet proposed, so refinement has fresh candidates.
    """
    texts = [keyword_rule_text(k) for k in planted_keywords]
    distractors = [keyword_rule_text(k) for k in distractor_keywords]
    first = distractors[: max(0, initial_size - len(texts))]
    rest = distractors[len(first):] or distractors[:1]
    # planted rules interleaved so they do not always lead the list
    initial = first[:2] + texts[:1] + first[2:4] + texts[1:2] + first[4:] + texts[2:]
    return [
        "\n".join(f"{i}. {t}" for i, t in enumerate(initial, start=1)),
        "\n".join(f"{i}. {t}" for i, t in enumerate(rest, start=1)),
    ]
