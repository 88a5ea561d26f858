"""
Core Module
Domain types and pure feature functions for rule learning
"""

from core.types import (
    Example,
    Judgment,
    JudgmentMatrix,
    Rule,
    RuleOrigin,
    RuleSet,
    SplitBundle,
)
from core.features import coverage, feature_row, normalize_rule_text

__all__ = [
    'Example',
    'Judgment',
    'JudgmentMatrix',
    'Rule',
    'RuleOrigin',
    'RuleSet',
    'SplitBundle',
    'coverage',
    'feature_row',
    'normalize_rule_text',
]
