"""
Rule Features
Coverage, feature rows and rule-text normalization over ternary judgments
"""

import re
from typing import Sequence

import numpy as np

from core.errors import InvalidRuleError, UsageError
from core.types import JudgmentMatrix

_ENUMERATION_PREFIX = re.compile(r'^\d+[.)](?:\s+|$)')
_WHITESPACE = re.compile(r'\s+')


def coverage(column: Sequence[int]) -> float:
    """
    Fraction of examples on which a rule does not abstain

    Args:
        column: Judgments of one rule over a split

    Returns:
        (count of nonzero judgments) / (column length)

    Raises:
        UsageError: If the column is empty
    """
    values = np.asarray(column)
    if values.size == 0:
        raise UsageError("coverage of an empty column is undefined")
    return float(np.count_nonzero(values)) / float(values.size)


def feature_row(matrix: JudgmentMatrix, example_id: str) -> np.ndarray:
    """
    Feature vector of one example in rule-column order

    Raises:
        UnknownExampleError: If the example is not in the matrix
    """
    return matrix.values[matrix.row_index(example_id), :].copy()


def normalize_rule_text(text: str) -> str:
    """
    Canonical form of a rule used for duplicate detection

    Trims, collapses whitespace runs and strips a leading "N." enumeration prefix.

    Example:
        >>> normalize_rule_text("  3. Tweets with questions win ")
        'Tweets with questions win'
    """
    collapsed = _WHITESPACE.sub(' ', text).strip()
    collapsed = _ENUMERATION_PREFIX.sub('', collapsed, count=1).strip()
    if not collapsed:
        raise InvalidRuleError(f"rule text is empty after normalization: {text!r}")
    return collapsed
