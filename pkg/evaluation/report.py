"""
Evaluation Report
Per-run strategy results, mean/std aggregation and the strategy x metric table
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from evaluation.metrics import aggregate_runs

logger = logging.getLogger(__name__)

STRATEGY_LABELS = {
    'linear_only': "E1 Linear-only",
    'llm_rules': "E2 LLM + Rules",
    'llm_rules_weights': "E3 LLM + Rules + Weights",
    'llm_rules_weights_prediction': "E4 LLM + Rules + Weights + Linear Prediction",
}

TABLE_METRICS = (('accuracy', 'Accuracy'), ('macro_f1', 'Macro-F1'))


@dataclass
class StrategyResult:
    """
    Outcome of one strategy on one run's test split

    `predictions` holds one record per test example; `prediction` is None where the
    response could not be parsed.
    """

    strategy: str
    seed: int
    predictions: List[Dict[str, Any]]
    accuracy: float
    macro_f1: float
    parse_coverage: float

    def metrics(self) -> Dict[str, float]:
        return {
            'accuracy': self.accuracy,
            'macro_f1': self.macro_f1,
            'parse_coverage': self.parse_coverage,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            'strategy': self.strategy,
            'seed': self.seed,
            'accuracy': self.accuracy,
            'macro_f1': self.macro_f1,
            'parse_coverage': self.parse_coverage,
            'predictions': self.predictions,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'StrategyResult':
        return cls(
            strategy=data['strategy'],
            seed=int(data['seed']),
            predictions=list(data.get('predictions', [])),
            accuracy=float(data['accuracy']),
            macro_f1=float(data['macro_f1']),
            parse_coverage=float(data['parse_coverage']),
        )


@dataclass
class EvalReport:
    """Strategy results over one or more runs"""

    results: List[StrategyResult] = field(default_factory=list)

    def add(self, result: StrategyResult):
        self.results.append(result)

    def strategies(self) -> List[str]:
        ordered: List[str] = []
        for result in self.results:
            if result.strategy not in ordered:
                ordered.append(result.strategy)
        return ordered

    def aggregate(self) -> Dict[str, Dict[str, Dict[str, float]]]:
        """{strategy: {metric: {'mean', 'std', 'n', 'std_defined'}}}, recomputed from runs"""
        return {
            strategy: aggregate_runs([r.metrics() for r in self.results if r.strategy == strategy])
            for strategy in self.strategies()
        }

    def to_frame(self) -> pd.DataFrame:
        """Strategy rows x metric columns with "mean ± std" cells in percent"""
        summary = self.aggregate()
        rows = []
        for strategy in self.strategies():
            row: Dict[str, Any] = {'Strategy': STRATEGY_LABELS.get(strategy, strategy)}
            for key, title in TABLE_METRICS:
                stats = summary[strategy][key]
                row[title] = f"{100 * stats['mean']:.2f} ± {100 * stats['std']:.2f}"
            row['Runs'] = summary[strategy]['accuracy']['n']
            rows.append(row)
        columns = ['Strategy'] + [title for _, title in TABLE_METRICS] + ['Runs']
        return pd.DataFrame(rows, columns=columns)

    def render_table(self) -> str:
        if not self.results:
            return "No evaluation results\n"
        return self.to_frame().to_string(index=False) + "\n"

    def to_dict(self) -> Dict[str, Any]:
        return {
            'runs': [r.to_dict() for r in self.results],
            'aggregate': self.aggregate() if self.results else {},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EvalReport':
        return cls(results=[StrategyResult.from_dict(r) for r in data.get('runs', [])])

    def write(self, directory: Union[str, Path], stem: Optional[str] = None) -> Dict[str, Path]:
        """Write `<stem>_report.json` and `<stem>_table.txt` (default stem "eval")"""
        stem = stem or 'eval'
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)

        json_path = directory / f'{stem}_report.json'
        with open(json_path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

        table_path = directory / f'{stem}_table.txt'
        with open(table_path, 'w', encoding='utf-8') as f:
            f.write(self.render_table())

        logger.info(f"📊 Evaluation report written to {json_path}")
        return {'json': json_path, 'table': table_path}
