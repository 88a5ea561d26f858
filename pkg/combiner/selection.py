"""
Hyperparameter Selection
Grid search over (lambda, alpha) scored by log-loss on stratified validation folds
"""

import itertools
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.model_selection import StratifiedKFold

from combiner.logistic import (
    CombinerParams,
    MatrixLike,
    SolverConfig,
    as_design,
    as_labels,
    fit,
    mean_log_loss,
)
from core.errors import SelectionError, UsageError

logger = logging.getLogger(__name__)

DEFAULT_LAMBDAS = (0.001, 0.01, 0.1, 1.0)
DEFAULT_ALPHAS = (0.0, 0.5, 1.0)
DEFAULT_FOLDS = 5
TIE_TOLERANCE = 1e-12


def default_grid(
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
) -> List[Tuple[float, float]]:
    return [(float(lam), float(alpha)) for lam, alpha in itertools.product(lambdas, alphas)]


def _validation_folds(y_val: np.ndarray, folds: int, seed: int) -> List[np.ndarray]:
    """Index sets of the stratified validation folds"""
    counts = np.bincount(y_val.astype(int), minlength=2)
    n_splits = min(folds, int(counts.max()))
    if n_splits < 2:
        return [np.arange(len(y_val))]
    splitter = StratifiedKFold(n_splits=n_splits, shuffle=True, random_state=seed)
    with warnings.catch_warnings():
        # the minority class may have fewer members than folds
        warnings.simplefilter("ignore", UserWarning)
        return [test for _, test in splitter.split(np.zeros(len(y_val)), y_val)]


def score_grid(
    matrix_train: MatrixLike,
    labels_train: Sequence[int],
    matrix_val: MatrixLike,
    labels_val: Sequence[int],
    grid: Sequence[Tuple[float, float]],
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    solver_config: Optional[SolverConfig] = None,
    max_workers: Optional[int] = None,
) -> List[Dict[str, float]]:
    """
    Fit every grid point on the training matrix and score it on validation folds

    Returns:
        One {'lambda', 'alpha', 'score'} record per grid point, in grid order;
        score is the mean fold log-loss

    Raises:
        UsageError: Empty grid or folds < 2
        SelectionError: Validation labels hold a single class
    """
    if not grid:
        raise UsageError("hyperparameter grid is empty")
    if folds < 2:
        raise UsageError(f"folds must be >= 2, got {folds}")

    X_tr = as_design(matrix_train)
    y_tr = as_labels(labels_train, X_tr.shape[0])
    X_val = as_design(matrix_val)
    y_val = as_labels(labels_val, X_val.shape[0])
    if len(np.unique(y_val)) < 2:
        raise SelectionError("validation labels hold a single class; cannot select hyperparameters")

    fold_indices = _validation_folds(y_val, folds, seed)

    def _score(point: Tuple[float, float]) -> Dict[str, float]:
        lam, alpha = point
        params, _ = fit(X_tr, y_tr, lam, alpha, solver_config)
        fold_scores = [mean_log_loss(params, X_val[idx], y_val[idx]) for idx in fold_indices]
        return {'lambda': float(lam), 'alpha': float(alpha), 'score': float(np.mean(fold_scores))}

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        scores = list(pool.map(_score, grid))

    logger.debug(f"Scored {len(scores)} grid points over {len(fold_indices)} validation folds")
    return scores


def choose_hyperparams(scores: Sequence[Dict[str, float]]) -> Tuple[float, float]:
    """
    Grid point with the lowest score

    Scores within 1e-12 of the minimum tie; ties go to the larger lambda, then the
    larger alpha.
    """
    if not scores:
        raise UsageError("no grid scores to choose from")
    best = min(s['score'] for s in scores)
    tied = [s for s in scores if s['score'] <= best + TIE_TOLERANCE]
    winner = max(tied, key=lambda s: (s['lambda'], s['alpha']))
    return winner['lambda'], winner['alpha']


def select_hyperparams(
    matrix_train: MatrixLike,
    labels_train: Sequence[int],
    matrix_val: MatrixLike,
    labels_val: Sequence[int],
    grid: Optional[Sequence[Tuple[float, float]]] = None,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    solver_config: Optional[SolverConfig] = None,
) -> Tuple[float, float]:
    """Selected (lambda, alpha); see `score_grid` and `choose_hyperparams`"""
    scores = score_grid(
        matrix_train, labels_train, matrix_val, labels_val,
        grid if grid is not None else default_grid(), folds, seed, solver_config,
    )
    return choose_hyperparams(scores)


def refit_final(
    matrix_train: MatrixLike,
    labels_train: Sequence[int],
    lam: float,
    alpha: float,
    solver_config: Optional[SolverConfig] = None,
    rule_ids: Optional[Sequence[str]] = None,
) -> CombinerParams:
    """Fit on the whole training split with the selected pair"""
    params, report = fit(matrix_train, labels_train, lam, alpha, solver_config, rule_ids)
    logger.info(
        f"Refit lambda={lam:g} alpha={alpha:g}: objective={report.objective:.6f}, "
        f"{report.iterations} iterations"
    )
    return params
