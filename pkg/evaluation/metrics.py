"""
Evaluation Metrics
Accuracy, macro-F1 and mean/std aggregation over repeated runs
"""

import logging
from typing import Dict, List, Mapping, Sequence

import numpy as np
from sklearn.metrics import f1_score

from core.errors import UsageError

logger = logging.getLogger(__name__)


def _aligned(preds: Sequence[int], labels: Sequence[int]):
    p = np.asarray(preds, dtype=int)
    y = np.asarray(labels, dtype=int)
    if p.shape != y.shape:
        raise UsageError(f"{p.size} predictions for {y.size} labels")
    if p.size == 0:
        raise UsageError("metrics need at least one prediction")
    return p, y


def accuracy(preds: Sequence[int], labels: Sequence[int]) -> float:
    """Fraction of exact matches"""
    p, y = _aligned(preds, labels)
    return float(np.mean(p == y))


def macro_f1(preds: Sequence[int], labels: Sequence[int]) -> float:
    """
    Unweighted mean of the F1 scores of classes 0 and 1

    A class with no predicted and no actual members scores 0.
    """
    p, y = _aligned(preds, labels)
    return float(f1_score(y, p, labels=[0, 1], average='macro', zero_division=0))


def aggregate_runs(runs: Sequence[Mapping[str, float]]) -> Dict[str, Dict[str, float]]:
    """
    Mean and sample standard deviation per metric over runs

    Args:
        runs: One {metric: value} mapping per run

    Returns:
        {metric: {'mean', 'std', 'n', 'std_defined'}}; with a single run std is 0
        and std_defined is False

    Raises:
        UsageError: If no runs are given
    """
    if not runs:
        raise UsageError("cannot aggregate zero runs")

    metrics: List[str] = sorted({name for run in runs for name in run})
    summary = {}
    for name in metrics:
        values = np.asarray([run[name] for run in runs if name in run], dtype=np.float64)
        defined = values.size > 1
        summary[name] = {
            'mean': float(values.mean()),
            'std': float(values.std(ddof=1)) if defined else 0.0,
            'n': int(values.size),
            'std_defined': defined,
        }
        if not defined:
            logger.warning(f"Only one run for {name}; standard deviation reported as 0")
    return summary
