"""
Rule and Example Selection
Coverage filtering, hard-example mining and capacity-bounded rule pruning
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from core.errors import UsageError
from core.features import coverage, normalize_rule_text
from core.types import Rule, RuleSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RuleStats:
    """Per-rule statistics used for ranking"""

    accuracy: Optional[float]
    coverage: float


def filter_by_coverage(
    candidates: Sequence[Rule],
    train_columns: Mapping[str, Sequence[int]],
    gamma: float,
) -> List[Rule]:
    """Rules whose training coverage is at least gamma, in input order"""
    kept = []
    for rule in candidates:
        value = coverage(train_columns[rule.rule_id])
        if value >= gamma:
            kept.append(rule)
        else:
            logger.info(f"Dropping {rule.rule_id}: coverage {value:.3f} < {gamma}")
    return kept


def select_hard_examples(
    example_ids: Sequence[str],
    probas: Sequence[float],
    labels: Sequence[int],
    k: int,
) -> List[str]:
    """
    Ids of the k examples with the largest |p - y|

    Ties are broken by ascending example id; k larger than the input returns all.

    Raises:
        UsageError: On empty or misaligned input, or k < 1
    """
    if not example_ids:
        raise UsageError("cannot select hard examples from an empty split")
    if not len(example_ids) == len(probas) == len(labels):
        raise UsageError("example ids, probabilities and labels must be aligned")
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")

    errors = np.abs(np.asarray(probas, dtype=np.float64) - np.asarray(labels, dtype=np.float64))
    order = sorted(range(len(example_ids)), key=lambda i: (-errors[i], example_ids[i]))
    return [example_ids[i] for i in order[:k]]


def rule_individual_accuracy(column: Sequence[int], labels: Sequence[int]) -> Optional[float]:
    """
    Accuracy of a rule on the examples it covers

    A +1 judgment matches label 1 and a -1 judgment matches label 0. Returns None
    when the rule abstains everywhere.
    """
    z = np.asarray(column)
    y = np.asarray(labels)
    if z.shape != y.shape:
        raise UsageError("rule column and labels must be aligned")
    covered = z != 0
    if not covered.any():
        return None
    matches = ((z == 1) & (y == 1)) | ((z == -1) & (y == 0))
    return float(matches[covered].sum()) / float(covered.sum())


def _rank_key(rule: Rule, stats: RuleStats):
    defined = stats.accuracy is not None
    return (
        0 if defined else 1,
        -(stats.accuracy or 0.0),
        -stats.coverage,
        rule.born_iteration,
        rule.rule_id,
    )


def rank_rules(rules: Sequence[Rule], val_stats: Mapping[str, RuleStats]) -> List[Rule]:
    """
    Rules in pruning order: accuracy desc (undefined last), coverage desc,
    born_iteration asc, rule_id asc
    """
    return sorted(rules, key=lambda r: _rank_key(r, val_stats[r.rule_id]))


def merge_and_prune(
    current: RuleSet,
    new_rules: Sequence[Rule],
    val_stats: Mapping[str, RuleStats],
    capacity: int,
) -> RuleSet:
    """
    Union of current and new rules, pruned to capacity by validation ranking

    Under capacity the union is returned in current-then-new order; over capacity
    the top `capacity` rules by ranking are kept, still in merge order.
    """
    known = current.normalized_texts()
    merged = list(current.rules)
    for rule in new_rules:
        text = normalize_rule_text(rule.text)
        if text in known:
            continue
        known.add(text)
        merged.append(rule)

    if len(merged) <= capacity:
        return RuleSet(rules=tuple(merged), capacity=capacity)

    ranked = rank_rules(merged, val_stats)
    dropped = [r.rule_id for r in ranked[capacity:]]
    logger.info(f"Pruning {len(dropped)} rules to capacity {capacity}: {dropped}")
    survivors = {r.rule_id for r in ranked[:capacity]}
    return RuleSet(rules=tuple(r for r in merged if r.rule_id in survivors), capacity=capacity)


def rule_stats(columns: Mapping[str, Sequence[int]], labels: Sequence[int]) -> Dict[str, RuleStats]:
    """Accuracy and coverage of each judged column"""
    return {
        rule_id: RuleStats(
            accuracy=rule_individual_accuracy(column, labels),
            coverage=coverage(column),
        )
        for rule_id, column in columns.items()
    }
