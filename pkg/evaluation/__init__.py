"""
Evaluation Module
Metrics, inference strategies and evaluation reports
"""

from evaluation.metrics import accuracy, aggregate_runs, macro_f1
from evaluation.report import EvalReport, StrategyResult
from evaluation.strategies import (
    StrategyKind,
    evaluate_strategy,
    infer_linear,
    infer_llm,
    inference_request,
    valid_strategy_names,
)

__all__ = [
    'accuracy',
    'aggregate_runs',
    'macro_f1',
    'EvalReport',
    'StrategyResult',
    'StrategyKind',
    'evaluate_strategy',
    'infer_linear',
    'infer_llm',
    'inference_request',
    'valid_strategy_names',
]
