"""Closed-form linear readout and its evaluation metrics.

Class scores are an affine map of the node embedding, fit by ridge
regression against one-hot targets. Test accuracy is summarized by a
percentile bootstrap over the test index set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "ReadoutModel",
    "BootstrapResult",
    "RidgeSolveError",
    "fit_ridge",
    "predict",
    "accuracy",
    "bootstrap_ci",
]

logger = logging.getLogger(__name__)


class RidgeSolveError(ValueError):
    """The readout normal equations could not be factorized."""


@dataclass(frozen=True)
class ReadoutModel:
    """Affine readout: scores = w_out @ embedding + b_out."""

    w_out: np.ndarray  # (num_classes, units)
    b_out: np.ndarray  # (num_classes,)
    lam: float

    def __post_init__(self):
        if not (np.isfinite(self.w_out).all() and np.isfinite(self.b_out).all()):
            raise ValueError("readout weights must be finite")
        if self.w_out.shape[0] != self.b_out.shape[0]:
            raise ValueError("w_out and b_out disagree on the class count")
        if self.w_out.shape[0] < 2:
            raise ValueError("a readout needs at least two classes")


@dataclass(frozen=True)
class BootstrapResult:
    """Mean accuracy and percentile interval over resampled test sets."""

    mean_accuracy: float
    ci_low: float
    ci_high: float
    num_resamples: int
    confidence: float
    seed: int

    def __post_init__(self):
        if not self.ci_low <= self.mean_accuracy <= self.ci_high:
            raise ValueError("bootstrap interval must bracket the mean")


def fit_ridge(
    embeddings: np.ndarray,
    labels: np.ndarray,
    num_classes: int,
    lam: float,
) -> ReadoutModel:
    """Ridge regression of one-hot class targets on embeddings.

    ``embeddings`` is (units, num_train). Solves the (units+1)-dimensional
    normal equations with a Cholesky factorization; the penalty ``lam``
    applies to the weights only, never the bias. One-hot targets use {0, 1}
    coding. If the factorization fails at lam > 0 a jitter proportional to
    the Gram trace is added once (logged); at lam = 0 failure means the
    system is genuinely singular and the caller should regularize.
    """
    embeddings = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels)
    if embeddings.ndim != 2:
        raise ValueError("embeddings must be a 2-D (units, num_train) array")
    h, n = embeddings.shape
    if n < 1:
        raise ValueError("at least one training node is required")
    if labels.shape != (n,):
        raise ValueError(f"labels must have length {n}")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if not np.isfinite(embeddings).all():
        raise ValueError("embeddings contain non-finite values")

    z = np.vstack([embeddings, np.ones((1, n))])  # (h+1, n), bias row last
    gram = z @ z.T
    gram[np.arange(h), np.arange(h)] += lam  # bias diagonal stays unpenalized

    targets = np.zeros((num_classes, n))
    targets[labels, np.arange(n)] = 1.0
    rhs = z @ targets.T  # (h+1, num_classes)

    try:
        coef = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram), rhs)
    except np.linalg.LinAlgError:
        if lam == 0:
            raise RidgeSolveError(
                "normal equations are singular at lam=0; use lam > 0"
            ) from None
        jitter = 1e-10 * np.trace(gram) / gram.shape[0]
        logger.warning(
            "ridge normal matrix failed to factorize at lam=%g; "
            "retrying with jitter %g", lam, jitter,
        )
        gram[np.arange(h + 1), np.arange(h + 1)] += jitter
        try:
            coef = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram), rhs)
        except np.linalg.LinAlgError:
            raise RidgeSolveError(
                "normal equations are not positive definite even after jitter"
            ) from None

    return ReadoutModel(
        w_out=np.ascontiguousarray(coef[:h].T),
        b_out=coef[h].copy(),
        lam=float(lam),
    )


def predict(model: ReadoutModel, embeddings: np.ndarray) -> np.ndarray:
    """Argmax class per embedding column; ties go to the lowest class id."""
    embeddings = np.asarray(embeddings)
    if embeddings.ndim != 2 or embeddings.shape[0] != model.w_out.shape[1]:
        raise ValueError(
            f"embeddings must be ({model.w_out.shape[1]}, M), got {embeddings.shape}"
        )
    scores = model.w_out @ embeddings + model.b_out[:, None]
    return np.argmax(scores, axis=0)


def accuracy(pred: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of matching entries."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("prediction and truth lengths differ")
    if pred.size == 0:
        raise ValueError("accuracy of an empty prediction set is undefined")
    return float(np.mean(pred == truth))


def bootstrap_ci(
    pred: np.ndarray,
    truth: np.ndarray,
    num_resamples: int = 1000,
    confidence: float = 0.95,
    seed: int = 0,
) -> BootstrapResult:
    """Percentile bootstrap of accuracy over the test index set.

    Each resample draws the index set with replacement and scores accuracy;
    the result is the mean of resampled accuracies with the symmetric
    percentile interval. Resample r uses its own generator seeded
    ``seed + r``, so a parallel evaluation would reproduce the serial one.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.size == 0:
        raise ValueError("pred and truth must be equal-length, non-empty")
    if num_resamples < 1:
        raise ValueError("num_resamples must be at least 1")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie strictly between 0 and 1")

    correct = (pred == truth).astype(np.float64)
    n = correct.size
    accs = np.empty(num_resamples)
    for r in range(num_resamples):
        idx = np.random.default_rng(seed + r).integers(0, n, size=n)
        accs[r] = correct[idx].mean()

    tail = 100.0 * (1.0 - confidence) / 2.0
    low, high = np.percentile(accs, [tail, 100.0 - tail])
    return BootstrapResult(
        mean_accuracy=float(accs.mean()),
        ci_low=float(low),
        ci_high=float(high),
        num_resamples=num_resamples,
        confidence=confidence,
        seed=seed,
    )
