"""Linear soft-margin SVM trained by monotone full-batch subgradient descent."""

from __future__ import annotations

import numpy as np

from ..errors import TrainingError
from .base import ClassifierConfig, TrainedModel

_INITIAL_STEP = 0.1
_MAX_BACKTRACKS = 40


def linear_kernel(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """The only kernel that ships; extension point for others."""
    return u @ v


def svm_objective(w: np.ndarray, b: float, x: np.ndarray, y_pm: np.ndarray,
                  c: float) -> float:
    """Primal objective: (1/2)||w||^2 + C * sum of hinge losses."""
    margins = y_pm * (x @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins)
    return float(0.5 * w @ w + c * hinge.sum())


def _train_binary(x: np.ndarray, y_pm: np.ndarray,
                  config: ClassifierConfig) -> tuple[np.ndarray, float, list[float], bool]:
    """Full-batch subgradient descent with backtracking; objective never rises.

    Sample order is fixed, so the trace is hardware independent. Returns
    (w, b, objective trace, converged flag).
    """
    n, d = x.shape
    w = np.zeros(d)
    b = 0.0
    step = _INITIAL_STEP
    trace = [svm_objective(w, b, x, y_pm, config.C)]
    converged = False
    for _ in range(config.max_iters):
        margins = y_pm * (x @ w + b)
        violating = margins < 1.0
        grad_w = w - config.C * (y_pm[violating, None] * x[violating]).sum(axis=0)
        grad_b = -config.C * y_pm[violating].sum()

        current = trace[-1]
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            w_new = w - step * grad_w
            b_new = b - step * grad_b
            candidate = svm_objective(w_new, b_new, x, y_pm, config.C)
            if candidate <= current:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            break
        w, b = w_new, b_new
        trace.append(candidate)
        if current - candidate < config.tolerance:
            converged = True
            break
        step *= 1.1  # cautious growth so progress does not stall
    return w, b, trace, converged


class SvmModel(TrainedModel):
    """One weight vector per decision: a single (w, b) for binary tasks,
    one-vs-rest stack for multi-class. Scores are signed margins."""

    kind = "svm"

    def __init__(self, config, classes, n_features, weights, biases, traces,
                 converged):
        super().__init__(config, classes, n_features)
        self.weights = np.asarray(weights, dtype=float)   # (n_chains, F)
        self.biases = np.asarray(biases, dtype=float)     # (n_chains,)
        self.objective_traces = traces
        if not converged:
            self.flags["non_converged"] = True

    def decision(self, x: np.ndarray) -> np.ndarray:
        """Raw margins w.x + b, one column per chain."""
        x = self._check_features(x)
        return x @ self.weights.T + self.biases

    def score(self, x: np.ndarray) -> np.ndarray:
        if len(self.classes) == 1:
            return np.ones((len(self._check_features(x)), 1))
        margins = self.decision(x)
        if len(self.classes) == 2:
            # single chain scores the higher class; mirror for the lower one
            return np.column_stack([-margins[:, 0], margins[:, 0]])
        return margins

    def params_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "biases": self.biases.tolist(),
            "objective_traces": [list(t) for t in self.objective_traces],
        }


def fit_svm(x: np.ndarray, y: np.ndarray, config: ClassifierConfig) -> SvmModel:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise TrainingError("cannot train on an empty dataset")
    classes = np.unique(y)
    if len(classes) == 1:
        model = SvmModel(config, classes, x.shape[1],
                         np.zeros((1, x.shape[1])), np.zeros(1), [[0.0]], True)
        model.flags["degenerate"] = True
        return model
    if len(classes) == 2:
        y_pm = np.where(y == classes[1], 1.0, -1.0)
        w, b, trace, ok = _train_binary(x, y_pm, config)
        return SvmModel(config, classes, x.shape[1], [w], [b], [trace], ok)
    weights, biases, traces = [], [], []
    all_ok = True
    for c in classes:
        y_pm = np.where(y == c, 1.0, -1.0)
        w, b, trace, ok = _train_binary(x, y_pm, config)
        weights.append(w)
        biases.append(b)
        traces.append(trace)
        all_ok = all_ok and ok
    return SvmModel(config, classes, x.shape[1], weights, biases, traces, all_ok)
