"""
Elastic-Net Logistic Combiner
Log-odds model over ternary rule judgments, fitted by accelerated proximal gradient
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.errors import CheckpointIntegrityError, SolverError, UsageError
from core.types import JudgmentMatrix

logger = logging.getLogger(__name__)

PRIOR_CLIP = 1e-6
LOG_LOSS_CLIP = 1e-12

MatrixLike = Union[JudgmentMatrix, np.ndarray, Sequence[Sequence[float]]]


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule of the proximal-gradient solver"""

    tol: float = 1e-8
    max_iter: int = 10000

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1:
            raise UsageError(f"invalid solver config: tol={self.tol}, max_iter={self.max_iter}")


@dataclass(frozen=True)
class PredictConfig:
    """Decision threshold; label is 1 iff probability >= tau"""

    tau: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise UsageError(f"tau must be in (0, 1), got {self.tau}")


class CombinerParams(BaseModel):
    """
    Fitted combiner: weights aligned to `rule_ids`, unpenalized bias, and the
    regularization it was fitted with
    """

    model_config = ConfigDict(frozen=True)

    beta: Tuple[float, ...]
    bias: float
    lam: float = Field(ge=0.0)
    alpha: float = Field(ge=0.0, le=1.0)
    rule_ids: Tuple[str, ...]

    @model_validator(mode='after')
    def _aligned_and_finite(self) -> 'CombinerParams':
        if len(self.beta) != len(self.rule_ids):
            raise ValueError(
                f"{len(self.beta)} weights for {len(self.rule_ids)} rules"
            )
        if not all(math.isfinite(w) for w in self.beta) or not math.isfinite(self.bias):
            raise ValueError("combiner parameters must be finite")
        return self

    @property
    def beta_array(self) -> np.ndarray:
        return np.asarray(self.beta, dtype=np.float64)

    def weights(self) -> Dict[str, float]:
        """Rule id -> weight"""
        return dict(zip(self.rule_ids, self.beta))

    def aligned_to(self, rule_ids: Sequence[str]) -> 'CombinerParams':
        """
        Same model with weights in `rule_ids` order

        Raises:
            CheckpointIntegrityError: If the rule ids are not exactly this model's rules
        """
        weights = self.weights()
        if sorted(rule_ids) != sorted(weights):
            raise CheckpointIntegrityError(
                f"combiner rules {sorted(weights)} do not match {sorted(rule_ids)}"
            )
        return CombinerParams(
            beta=tuple(weights[rid] for rid in rule_ids),
            bias=self.bias,
            lam=self.lam,
            alpha=self.alpha,
            rule_ids=tuple(rule_ids),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'weights': self.weights(),
            'rule_order': list(self.rule_ids),
            'bias': self.bias,
            'lambda': self.lam,
            'alpha': self.alpha,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'CombinerParams':
        try:
            weights = dict(data['weights'])
            order = list(data.get('rule_order') or weights.keys())
            if sorted(order) != sorted(weights):
                raise CheckpointIntegrityError("rule_order does not match weight keys")
            return cls(
                beta=tuple(float(weights[rid]) for rid in order),
                bias=float(data['bias']),
                lam=float(data['lambda']),
                alpha=float(data['alpha']),
                rule_ids=tuple(order),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise CheckpointIntegrityError(f"invalid combiner params: {e}") from e


@dataclass
class FitReport:
    """Outcome of one fit, plus the grid scores that led to its hyperparameters"""

    objective: float
    iterations: int
    converged: bool
    history: List[float] = field(default_factory=list)
    selection_scores: List[Dict[str, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'objective': self.objective,
            'iterations': self.iterations,
            'converged': self.converged,
            'selection_scores': self.selection_scores,
        }


def as_design(matrix: MatrixLike) -> np.ndarray:
    """Float design matrix from a JudgmentMatrix or array"""
    values = matrix.values if isinstance(matrix, JudgmentMatrix) else matrix
    X = np.asarray(values, dtype=np.float64)
    if X.ndim != 2:
        raise UsageError(f"design matrix must be 2-D, got shape {X.shape}")
    return X


def as_labels(labels: Sequence[int], n: int) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != (n,):
        raise UsageError(f"expected {n} labels, got shape {y.shape}")
    if not np.isin(y, (0.0, 1.0)).all():
        raise UsageError("labels must be 0 or 1")
    return y


def sigmoid(u: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Logistic function, branching on sign so no exp overflows"""
    arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    e = np.exp(arr[~pos])
    out[~pos] = e / (1.0 + e)
    if np.ndim(u) == 0:
        return float(out[0])
    return out


def logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def prior_bias(y: np.ndarray) -> float:
    """Bias-only MLE: logit of the positive rate, clipped to [1e-6, 1 - 1e-6]"""
    prior = float(np.clip(y.mean(), PRIOR_CLIP, 1.0 - PRIOR_CLIP))
    return logit(prior)


def _check_features(params: CombinerParams, features: np.ndarray):
    if features.shape[-1] != len(params.beta):
        raise UsageError(
            f"feature length {features.shape[-1]} does not match {len(params.beta)} weights"
        )


def predict_proba(params: CombinerParams, features: Sequence[float]) -> float:
    """
    sigma(features . beta + bias)

    Raises:
        UsageError: On dimension mismatch
    """
    z = np.asarray(features, dtype=np.float64).reshape(-1)
    _check_features(params, z)
    return float(sigmoid(float(z @ params.beta_array) + params.bias))


def predict_proba_matrix(params: CombinerParams, matrix: MatrixLike) -> np.ndarray:
    """Row-wise predict_proba"""
    X = as_design(matrix)
    _check_features(params, X)
    return np.atleast_1d(sigmoid(X @ params.beta_array + params.bias))


def predict_label(
    params: CombinerParams,
    features: Sequence[float],
    config: Optional[PredictConfig] = None,
) -> int:
    """1 iff predict_proba >= tau (boundary inclusive)"""
    tau = (config or PredictConfig()).tau
    return int(predict_proba(params, features) >= tau)


def elastic_net_penalty(beta: np.ndarray, lam: float, alpha: float) -> float:
    return lam * (alpha * float(np.abs(beta).sum()) + 0.5 * (1.0 - alpha) * float(beta @ beta))


def _cross_entropy(u: np.ndarray, y: np.ndarray) -> float:
    # log(1 + e^u) - y*u is the exact binary cross-entropy of sigma(u)
    return float(np.mean(np.logaddexp(0.0, u) - y * u))


def objective(params: CombinerParams, matrix: MatrixLike, labels: Sequence[int]) -> float:
    """
    Mean cross-entropy plus lambda * (alpha * |beta|_1 + (1 - alpha) / 2 * |beta|_2^2)

    The bias is not penalized.

    Raises:
        UsageError: On label values outside {0, 1} or misaligned inputs
    """
    X = as_design(matrix)
    y = as_labels(labels, X.shape[0])
    _check_features(params, X)
    beta = params.beta_array
    u = X @ beta + params.bias
    return _cross_entropy(u, y) + elastic_net_penalty(beta, params.lam, params.alpha)


def smooth_objective(
    beta: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, lam: float, alpha: float
) -> float:
    """Differentiable part: cross-entropy plus the L2 share of the penalty"""
    u = X @ beta + bias
    return _cross_entropy(u, y) + 0.5 * lam * (1.0 - alpha) * float(beta @ beta)


def smooth_gradient(
    beta: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, lam: float, alpha: float
) -> Tuple[np.ndarray, float]:
    """Gradient of `smooth_objective` with respect to (beta, bias)"""
    residual = sigmoid(X @ beta + bias) - y
    n = X.shape[0]
    grad_beta = X.T @ residual / n + lam * (1.0 - alpha) * beta
    return grad_beta, float(np.mean(residual))


def soft_threshold(v: np.ndarray, threshold: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - threshold, 0.0)


def mean_log_loss(params: CombinerParams, matrix: MatrixLike, labels: Sequence[int]) -> float:
    """Validation log-loss with probabilities clipped to [1e-12, 1 - 1e-12]"""
    X = as_design(matrix)
    y = as_labels(labels, X.shape[0])
    p = np.clip(predict_proba_matrix(params, X), LOG_LOSS_CLIP, 1.0 - LOG_LOSS_CLIP)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def fit(
    matrix: MatrixLike,
    labels: Sequence[int],
    lam: float,
    alpha: float,
    solver_config: Optional[SolverConfig] = None,
    rule_ids: Optional[Sequence[str]] = None,
) -> Tuple[CombinerParams, FitReport]:
    """
    Minimize the elastic-net logistic objective

    Accelerated proximal gradient with a fixed step 1/L, where
    L = sigma_max([X, 1])^2 / (4n) + lambda * (1 - alpha). A momentum step that
    raises the objective is replaced by a plain proximal step from the last
    iterate, so the objective never increases. Starts from beta = 0 and the
    bias-only MLE. Stops when the largest parameter change falls below `tol`.

    Args:
        matrix: Judgment matrix (examples x rules)
        labels: Binary labels aligned to the matrix rows
        lam: Overall penalty strength, >= 0
        alpha: L1 share of the penalty, in [0, 1]
        solver_config: Tolerance and iteration cap
        rule_ids: Column ids; taken from the matrix when it is a JudgmentMatrix

    Returns:
        (CombinerParams, FitReport)

    Raises:
        UsageError: On empty or misaligned inputs, or invalid lam/alpha
        SolverError: If an iterate becomes non-finite
    """
    config = solver_config or SolverConfig()
    X = as_design(matrix)
    n, p = X.shape
    if n == 0:
        raise UsageError("cannot fit on zero examples")
    y = as_labels(labels, n)
    if lam < 0 or not 0.0 <= alpha <= 1.0:
        raise UsageError(f"invalid regularization lambda={lam}, alpha={alpha}")
    if rule_ids is None:
        if isinstance(matrix, JudgmentMatrix):
            rule_ids = matrix.rule_ids
        else:
            rule_ids = [f"r{j}" for j in range(p)]
    rule_ids = tuple(rule_ids)
    if len(rule_ids) != p:
        raise UsageError(f"{len(rule_ids)} rule ids for {p} columns")

    bias0 = prior_bias(y)

    def _pack(theta: np.ndarray) -> CombinerParams:
        return CombinerParams(
            beta=tuple(float(v) for v in theta[:p]),
            bias=float(theta[p]),
            lam=float(lam),
            alpha=float(alpha),
            rule_ids=rule_ids,
        )

    if p == 0:
        params = _pack(np.array([bias0]))
        value = _cross_entropy(np.full(n, bias0), y)
        return params, FitReport(objective=value, iterations=0, converged=True, history=[value])

    X_aug = np.hstack([X, np.ones((n, 1))])
    lipschitz = np.linalg.norm(X_aug, 2) ** 2 / (4.0 * n) + lam * (1.0 - alpha)
    step = 1.0 / lipschitz
    l1_threshold = step * lam * alpha

    def _full(theta: np.ndarray) -> float:
        beta = theta[:p]
        smooth = smooth_objective(beta, float(theta[p]), X, y, lam, alpha)
        return smooth + lam * alpha * float(np.abs(beta).sum())

    def _prox_step(theta: np.ndarray) -> np.ndarray:
        grad_beta, grad_bias = smooth_gradient(theta[:p], float(theta[p]), X, y, lam, alpha)
        moved = theta - step * np.append(grad_beta, grad_bias)
        moved[:p] = soft_threshold(moved[:p], l1_threshold)
        return moved

    x_prev = np.zeros(p + 1)
    x_prev[p] = bias0
    f_prev = _full(x_prev)
    y_k = x_prev.copy()
    t = 1.0
    history = [f_prev]
    converged = False
    iterations = 0

    for iterations in range(1, config.max_iter + 1):
        x_new = _prox_step(y_k)
        f_new = _full(x_new)

        if not f_new <= f_prev:
            # Momentum overshot (or went non-finite): restart from the last iterate
            x_new = _prox_step(x_prev)
            f_new = _full(x_new)
            t = 1.0

        if not (np.all(np.isfinite(x_new)) and math.isfinite(f_new)):
            raise SolverError(
                f"non-finite iterate at iteration {iterations}",
                diagnostics={
                    'iteration': iterations,
                    'objective': f_new,
                    'last_finite_objective': f_prev,
                    'lambda': lam,
                    'alpha': alpha,
                    'step': step,
                },
            )

        delta = float(np.max(np.abs(x_new - x_prev)))
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        y_k = x_new + ((t - 1.0) / t_next) * (x_new - x_prev)
        t = t_next
        x_prev, f_prev = x_new, f_new
        history.append(f_new)

        if delta < config.tol:
            converged = True
            break

    if not converged:
        logger.warning(
            f"Solver hit max_iter={config.max_iter} (lambda={lam}, alpha={alpha}); "
            f"objective={f_prev:.6g}"
        )

    return _pack(x_prev), FitReport(
        objective=f_prev, iterations=iterations, converged=converged, history=history
    )
