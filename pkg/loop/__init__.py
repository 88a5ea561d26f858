"""
Loop Module
Iterative rule learning with checkpoints and run logs
"""

from loop.artifacts import Checkpoint, RunDirectory, RunLog
from loop.selection import (
    filter_by_coverage,
    merge_and_prune,
    rule_individual_accuracy,
    rule_stats,
    select_hard_examples,
)
from loop.rlie import CombinerConfig, LoopConfig, PipelineBackends, run_rlie

__all__ = [
    'Checkpoint',
    'RunDirectory',
    'RunLog',
    'filter_by_coverage',
    'merge_and_prune',
    'rule_individual_accuracy',
    'rule_stats',
    'select_hard_examples',
    'CombinerConfig',
    'LoopConfig',
    'PipelineBackends',
    'run_rlie',
]
