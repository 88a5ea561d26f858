"""
JSONL Dataset Loader
Reads labeled text records and the manifest describing how a task is worded
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.errors import DatasetIntegrityError, DatasetParseError
from core.types import Example, Judgment

logger = logging.getLogger(__name__)


class DatasetManifest(BaseModel):
    """
    Task lexicon: the tokens a backend answers with and the fields an example carries

    Example (Retweets):
        positive_token="first", negative_token="second",
        abstain_token="not applicable", field_names=["first_tweet", "second_tweet"]
    """

    model_config = ConfigDict(frozen=True)

    name: str
    positive_token: str = "positive"
    negative_token: str = "negative"
    abstain_token: str = "not applicable"
    field_names: List[str] = Field(default_factory=lambda: ["text"])

    @model_validator(mode='after')
    def _distinct_tokens(self) -> 'DatasetManifest':
        tokens = [
            self.positive_token.strip().lower(),
            self.negative_token.strip().lower(),
            self.abstain_token.strip().lower(),
        ]
        if any(not t for t in tokens):
            raise ValueError("answer tokens must not be blank")
        if len(set(tokens)) != 3:
            raise ValueError(f"answer tokens must be pairwise distinct, got {tokens}")
        return self

    def token_for_label(self, label: int) -> str:
        """Render a binary label through the token lexicon"""
        return self.positive_token if label == 1 else self.negative_token

    def judgment_tokens(self) -> Dict[str, Judgment]:
        """Lower-cased token -> judgment map used by the response parser"""
        return {
            self.positive_token.strip().lower(): Judgment.POSITIVE,
            self.negative_token.strip().lower(): Judgment.NEGATIVE,
            self.abstain_token.strip().lower(): Judgment.ABSTAIN,
        }


def _coerce_label(raw: Any, line_number: int) -> int:
    """Map JSON label representations onto {0, 1}"""
    if isinstance(raw, bool):
        raise DatasetIntegrityError(
            f"line {line_number}: label must be 0 or 1, got boolean {raw!r}"
        )
    if isinstance(raw, (int, float)) and raw in (0, 1):
        return int(raw)
    if isinstance(raw, str) and raw.strip() in ('0', '1'):
        return int(raw.strip())
    raise DatasetIntegrityError(f"line {line_number}: label must be 0 or 1, got {raw!r}")


def load_jsonl(path: Union[str, Path]) -> List[Example]:
    """
    Load labeled examples from a JSONL file

    Each non-blank line is {"id": str, "fields": {str: str}, "label": 0|1}.

    Args:
        path: Path to the JSONL file

    Returns:
        Examples in file order

    Raises:
        DatasetParseError: If a line is not a JSON object with the expected keys, a field
            value is not a string, or the id is blank
        DatasetIntegrityError: On duplicate ids or labels outside {0, 1} (booleans included)
    """
    path = Path(path)
    examples: List[Example] = []
    first_seen: Dict[str, int] = {}

    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue

            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetParseError(f"invalid JSON: {e.msg}", line_number) from e

            if not isinstance(record, dict):
                raise DatasetParseError("expected a JSON object", line_number)
            missing = [k for k in ('id', 'fields', 'label') if k not in record]
            if missing:
                raise DatasetParseError(f"missing keys {missing}", line_number)
            if not isinstance(record['fields'], dict) or not record['fields']:
                raise DatasetParseError("'fields' must be a non-empty object", line_number)

            raw_id = record['id']
            if isinstance(raw_id, bool) or not isinstance(raw_id, (str, int)):
                raise DatasetParseError(f"'id' must be a string, got {raw_id!r}", line_number)
            non_text = sorted(str(k) for k, v in record['fields'].items() if not isinstance(v, str))
            if non_text:
                raise DatasetParseError(f"field values must be strings: {non_text}", line_number)

            example_id = str(raw_id)
            if example_id in first_seen:
                raise DatasetIntegrityError(
                    f"duplicate id {example_id!r} on lines {first_seen[example_id]} "
                    f"and {line_number}"
                )
            first_seen[example_id] = line_number

            label = _coerce_label(record['label'], line_number)
            fields = {str(k): v for k, v in record['fields'].items()}
            try:
                examples.append(Example(id=example_id, fields=fields, label=label))
            except ValidationError as e:
                problems = "; ".join(error['msg'] for error in e.errors())
                raise DatasetParseError(f"invalid example: {problems}", line_number) from e

    logger.info(f"Loaded {len(examples)} examples from {path}")
    return examples


def write_jsonl(path: Union[str, Path], examples: List[Example]):
    """Write examples in the format `load_jsonl` reads"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for example in examples:
            record = {'id': example.id, 'fields': dict(example.fields), 'label': example.label}
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
