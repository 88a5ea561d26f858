"""
Domain Types
Immutable value objects shared by every stage of the rule-learning pipeline
"""

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.errors import UnknownExampleError, UsageError


class Judgment(IntEnum):
    """Ternary judgment of one rule on one example; ABSTAIN means not applicable"""
    NEGATIVE = -1
    ABSTAIN = 0
    POSITIVE = 1


class RuleOrigin(str, Enum):
    """How a rule entered the pipeline"""
    INITIAL = "initial"
    REFINEMENT = "refinement"


class Example(BaseModel):
    """
    One labeled text record

    `fields` is an ordered name -> text map so single-text tasks ("review") and
    paired-text tasks ("first_tweet"/"second_tweet") share one type.
    """

    model_config = ConfigDict(frozen=True)

    id: str
    fields: Dict[str, str]
    label: int

    @field_validator('id')
    @classmethod
    def _id_not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("example id must not be blank")
        return value

    @field_validator('fields')
    @classmethod
    def _fields_not_empty(cls, value: Dict[str, str]) -> Dict[str, str]:
        if not value:
            raise ValueError("example fields must not be empty")
        return value

    @field_validator('label')
    @classmethod
    def _binary_label(cls, value: int) -> int:
        if value not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {value}")
        return value


class Rule(BaseModel):
    """A natural-language rule with its provenance"""

    model_config = ConfigDict(frozen=True)

    rule_id: str
    text: str
    born_iteration: int = Field(ge=1)
    origin: RuleOrigin = RuleOrigin.INITIAL

    @field_validator('text')
    @classmethod
    def _text_not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("rule text must not be blank")
        return value


class RuleSet(BaseModel):
    """Ordered, capacity-bounded collection of rules with no duplicate texts"""

    model_config = ConfigDict(frozen=True)

    rules: Tuple[Rule, ...] = ()
    capacity: int = Field(ge=1)

    @model_validator(mode='after')
    def _check_invariants(self) -> 'RuleSet':
        from core.features import normalize_rule_text

        if len(self.rules) > self.capacity:
            raise ValueError(
                f"rule set holds {len(self.rules)} rules, capacity is {self.capacity}"
            )
        ids = [r.rule_id for r in self.rules]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate rule_id in rule set")
        texts = [normalize_rule_text(r.text) for r in self.rules]
        if len(set(texts)) != len(texts):
            raise ValueError("duplicate rule text in rule set")
        return self

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self) -> Iterator[Rule]:  # type: ignore[override]
        return iter(self.rules)

    @property
    def rule_ids(self) -> List[str]:
        return [r.rule_id for r in self.rules]

    def normalized_texts(self) -> set:
        from core.features import normalize_rule_text
        return {normalize_rule_text(r.text) for r in self.rules}

    def get(self, rule_id: str) -> Rule:
        for rule in self.rules:
            if rule.rule_id == rule_id:
                return rule
        raise KeyError(rule_id)


@dataclass(frozen=True, eq=False)
class JudgmentMatrix:
    """
    Dense examples x rules array of ternary judgments

    Row i holds the judgments for example_ids[i]; column j those of rule_ids[j].
    The stored array is int8 and read-only.
    """

    example_ids: Tuple[str, ...]
    rule_ids: Tuple[str, ...]
    values: np.ndarray
    _row_index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        example_ids = tuple(self.example_ids)
        rule_ids = tuple(self.rule_ids)
        values = np.asarray(self.values)
        if values.size == 0:
            values = values.reshape(len(example_ids), len(rule_ids))
        if values.shape != (len(example_ids), len(rule_ids)):
            raise UsageError(
                f"judgment array shape {values.shape} does not match "
                f"({len(example_ids)}, {len(rule_ids)})"
            )
        if values.size and not np.isin(values, (-1, 0, 1)).all():
            raise UsageError("judgment values must be in {-1, 0, +1}")
        if len(set(example_ids)) != len(example_ids):
            raise UsageError("duplicate example ids in judgment matrix")
        if len(set(rule_ids)) != len(rule_ids):
            raise UsageError("duplicate rule ids in judgment matrix")

        values = values.astype(np.int8, copy=True)
        values.setflags(write=False)
        object.__setattr__(self, 'example_ids', example_ids)
        object.__setattr__(self, 'rule_ids', rule_ids)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, '_row_index', {eid: i for i, eid in enumerate(example_ids)})

    @classmethod
    def from_columns(
        cls,
        example_ids: Sequence[str],
        columns: Mapping[str, Sequence[int]],
        rule_ids: Optional[Sequence[str]] = None,
    ) -> 'JudgmentMatrix':
        """Assemble a matrix from per-rule columns, in `rule_ids` order when given"""
        order = list(rule_ids) if rule_ids is not None else list(columns.keys())
        if order:
            values = np.column_stack([np.asarray(columns[rid], dtype=np.int8) for rid in order])
        else:
            values = np.zeros((len(example_ids), 0), dtype=np.int8)
        return cls(tuple(example_ids), tuple(order), values)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    def row_index(self, example_id: str) -> int:
        try:
            return self._row_index[example_id]
        except KeyError:
            raise UnknownExampleError(example_id) from None

    def column(self, rule_id: str) -> np.ndarray:
        try:
            j = self.rule_ids.index(rule_id)
        except ValueError:
            raise KeyError(rule_id) from None
        return self.values[:, j]


class SplitBundle(BaseModel):
    """Disjoint train / validation / test partitions produced under one seed"""

    model_config = ConfigDict(frozen=True)

    train: Tuple[Example, ...]
    validation: Tuple[Example, ...]
    test: Tuple[Example, ...]
    seed: int

    @model_validator(mode='after')
    def _check_disjoint(self) -> 'SplitBundle':
        seen: Dict[str, str] = {}
        for name in ('train', 'validation', 'test'):
            split = getattr(self, name)
            if not split:
                raise ValueError(f"{name} split is empty")
            for example in split:
                if example.id in seen:
                    raise ValueError(
                        f"example {example.id} appears in both {seen[example.id]} and {name}"
                    )
                seen[example.id] = name
        return self

    def sizes(self) -> Tuple[int, int, int]:
        return len(self.train), len(self.validation), len(self.test)
