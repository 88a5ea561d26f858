"""
Combiner Module
Elastic-net logistic regression over rule judgments
"""

from combiner.logistic import (
    CombinerParams,
    FitReport,
    PredictConfig,
    SolverConfig,
    fit,
    mean_log_loss,
    objective,
    predict_label,
    predict_proba,
    predict_proba_matrix,
)
from combiner.selection import (
    choose_hyperparams,
    default_grid,
    refit_final,
    score_grid,
    select_hyperparams,
)

__all__ = [
    'CombinerParams',
    'FitReport',
    'PredictConfig',
    'SolverConfig',
    'fit',
    'mean_log_loss',
    'objective',
    'predict_label',
    'predict_proba',
    'predict_proba_matrix',
    'choose_hyperparams',
    'default_grid',
    'refit_final',
    'score_grid',
    'select_hyperparams',
]
