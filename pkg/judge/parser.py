"""
Final-Answer Parser
Maps a backend response to exactly one answer token or a parse error
"""

import re

from core.errors import ResponseParseError
from core.types import Judgment
from dataset.loader import DatasetManifest

_MARKER = re.compile(r'final\s+answer\s*:', re.IGNORECASE)
_TOKEN_END = re.compile(r'[}\n]')
_STRIP_CHARS = ' \t\r{}[]()"\'`*'


def extract_final_answer(text: str) -> str:
    """
    Text of the single `Final answer:` clause, cleaned of braces, quotes and trailing periods

    Raises:
        ResponseParseError: If there is no marker or more than one
    """
    markers = list(_MARKER.finditer(text or ""))
    if not markers:
        raise ResponseParseError("response has no final-answer marker", raw=text)
    if len(markers) > 1:
        raise ResponseParseError(
            f"response has {len(markers)} final-answer markers", raw=text
        )

    tail = text[markers[0].end():]
    end = _TOKEN_END.search(tail)
    answer = tail[:end.start()] if end else tail
    answer = answer.strip(_STRIP_CHARS).rstrip('.').strip(_STRIP_CHARS)
    return re.sub(r'\s+', ' ', answer).lower()


def parse_judgment(text: str, manifest: DatasetManifest, allow_abstain: bool = True) -> Judgment:
    """
    Parse a response into a ternary judgment

    Args:
        text: Raw backend response
        manifest: Token lexicon (case-insensitive)
        allow_abstain: When False, the abstain token is a parse error

    Raises:
        ResponseParseError: Missing, ambiguous or unknown answer
    """
    answer = extract_final_answer(text)
    tokens = manifest.judgment_tokens()
    if answer not in tokens:
        raise ResponseParseError(
            f"final answer {answer!r} is not one of {sorted(tokens)}", raw=text
        )
    judgment = tokens[answer]
    if judgment == Judgment.ABSTAIN and not allow_abstain:
        raise ResponseParseError(
            f"abstain token {answer!r} is not a permitted answer here", raw=text
        )
    return judgment


def parse_label(text: str, manifest: DatasetManifest) -> int:
    """Parse a binary answer into a {0, 1} label"""
    return int(parse_judgment(text, manifest, allow_abstain=False) == Judgment.POSITIVE)
