"""Sample statistics, closed-form least squares, and prediction error metrics.

All moments use the sample (n-1) normalization. Variance and covariance
share the convention, so the Pearson coefficient is independent of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ._validation import as_matrix, as_vector, check_same_length
from .errors import DataError, NumericError

__all__ = [
    "SampleStats",
    "LinearModel",
    "MultilinearModel",
    "MetricReport",
    "TwoClusterFit",
    "sample_stats",
    "pearson",
    "linear_fit",
    "multilinear_fit",
    "mse",
    "mape",
    "wrapped_mse",
    "two_cluster_fit",
]

# Normal-equation systems with condition estimates beyond this are treated
# as rank deficient rather than silently solved.
_MAX_CONDITION = 1e12


class SampleStats(NamedTuple):
    mean: float
    variance: float
    std: float


@dataclass(frozen=True)
class LinearModel:
    slope: float
    intercept: float

    def predict(self, x) -> np.ndarray:
        return self.slope * as_vector(x) + self.intercept


@dataclass(frozen=True)
class MultilinearModel:
    beta: np.ndarray
    intercept: float

    def predict(self, X) -> np.ndarray:
        return as_matrix(X) @ self.beta + self.intercept


@dataclass(frozen=True)
class MetricReport:
    """Test errors of one model. mape is None iff the target contains a zero."""

    mse: float
    mape: Optional[float] = None
    relative_mse: Optional[float] = None


def sample_stats(x) -> SampleStats:
    x = as_vector(x)
    n = len(x)
    if n == 0:
        raise DataError("sample_stats needs at least one value")
    mean = float(np.mean(x))
    if n < 2:
        raise DataError("variance needs at least two values")
    variance = float(np.sum((x - mean) ** 2) / (n - 1))
    return SampleStats(mean, variance, math.sqrt(variance))


def pearson(x, y) -> float:
    """Sample Pearson correlation, clamped into [-1, 1] against rounding."""
    x, y = as_vector(x), as_vector(y, "y")
    check_same_length(x, y)
    if len(x) < 2:
        raise DataError("pearson needs at least two points")
    sx, sy = sample_stats(x), sample_stats(y)
    if sx.std == 0 or sy.std == 0:
        raise DataError("pearson undefined: an input has zero standard deviation")
    cov = float(np.sum((x - sx.mean) * (y - sy.mean)) / (len(x) - 1))
    return max(-1.0, min(1.0, cov / (sx.std * sy.std)))


def linear_fit(x, y) -> tuple[LinearModel, float]:
    """Closed-form least squares line; returns (model, training MSE)."""
    x, y = as_vector(x), as_vector(y, "y")
    check_same_length(x, y)
    if len(x) < 2:
        raise DataError("linear_fit needs at least two points")
    sx = sample_stats(x)
    if sx.variance == 0:
        raise DataError("linear_fit undefined for constant x")
    ybar = float(np.mean(y))
    cov = float(np.sum((x - sx.mean) * (y - ybar)) / (len(x) - 1))
    slope = cov / sx.variance
    intercept = ybar - slope * sx.mean
    model = LinearModel(slope, intercept)
    return model, mse(model.predict(x), y)


def multilinear_fit(X, y) -> MultilinearModel:
    """Least squares with intercept via the normal equations.

    Solved by a direct dense factorization with partial pivoting; a
    condition estimate above 1e12 raises NumericError naming it.
    """
    X, y = as_matrix(X), as_vector(y, "y")
    check_same_length(X, y)
    n, m = X.shape
    if n < m + 1:
        raise DataError(f"need at least {m + 1} rows to fit {m} coefficients, got {n}")
    A = np.hstack([X, np.ones((n, 1))])
    G = A.T @ A
    cond = float(np.linalg.cond(G))
    if not math.isfinite(cond) or cond > _MAX_CONDITION:
        raise NumericError(f"singular normal equations (condition estimate {cond:.3e})")
    theta = np.linalg.solve(G, A.T @ y)
    return MultilinearModel(beta=theta[:-1], intercept=float(theta[-1]))


def mse(pred, y) -> float:
    pred, y = as_vector(pred, "pred"), as_vector(y, "y")
    check_same_length(pred, y)
    if len(y) == 0:
        raise DataError("mse needs at least one value")
    return float(np.mean((y - pred) ** 2))


def mape(pred, y) -> float:
    """Mean absolute percentage error, in percent; zero targets are an error."""
    pred, y = as_vector(pred, "pred"), as_vector(y, "y")
    check_same_length(pred, y)
    if len(y) == 0:
        raise DataError("mape needs at least one value")
    if np.any(y == 0):
        raise DataError("mape undefined: target contains zeros")
    return float(100.0 * np.mean(np.abs(y - pred) / np.abs(y)))


def wrapped_mse(pred, y, period: float = 0.5) -> float:
    """MSE with distances measured on a circle of the given period.

    Supplementary metric for the Chern-Simons invariant, which lives in
    R modulo 1/2; never used in the reproduction tables, which keep the
    plain Euclidean metric.
    """
    pred, y = as_vector(pred, "pred"), as_vector(y, "y")
    check_same_length(pred, y)
    if period <= 0:
        raise ValueError("period must be positive")
    r = np.abs(y - pred) % period
    d = np.minimum(r, period - r)
    return float(np.mean(d**2))


# ---------------------------------------------------------------------------
# two-cluster piecewise linear fit


@dataclass(frozen=True)
class TwoClusterFit:
    """Per-cluster lines and correlations; clusters ordered by centroid x."""

    models: tuple[LinearModel, LinearModel]
    pearsons: tuple[float, float]
    assignment: np.ndarray  # 0/1 per input point, aligned with the ordering
    centroids_x: tuple[float, float]


def two_cluster_fit(x, y, seed: int, max_iter: int = 100, n_init: int = 4) -> TwoClusterFit:
    """Split (x, y) into two clusters and fit a line inside each.

    Points are standardized to zero mean and unit variance and clustered
    by seeded 2-means (k-means++ seeding, Lloyd iterations, best inertia
    over n_init restarts); the per-cluster fits are done on the original
    coordinates. A cluster with fewer than two points is an error.
    """
    x, y = as_vector(x), as_vector(y, "y")
    check_same_length(x, y)
    n = len(x)
    if n < 4:
        raise DataError("two_cluster_fit needs at least four points")

    pts = np.column_stack([_standardize(x), _standardize(y)])
    rng = np.random.default_rng(seed)
    labels, _ = min(
        (_lloyd_two_means(pts, rng, max_iter) for _ in range(n_init)),
        key=lambda pair: pair[1],
    )

    # order clusters by ascending centroid x (standardization is monotone)
    if pts[labels == 0, 0].mean() > pts[labels == 1, 0].mean():
        labels = 1 - labels

    models = []
    correlations = []
    xbar = []
    for c in (0, 1):
        mask = labels == c
        if mask.sum() < 2:
            raise DataError(f"degenerate cluster: cluster {c} has {mask.sum()} point(s)")
        model, _ = linear_fit(x[mask], y[mask])
        models.append(model)
        correlations.append(pearson(x[mask], y[mask]))
        xbar.append(float(np.mean(x[mask])))
    return TwoClusterFit(
        models=(models[0], models[1]),
        pearsons=(correlations[0], correlations[1]),
        assignment=labels,
        centroids_x=(xbar[0], xbar[1]),
    )


def _standardize(v: np.ndarray) -> np.ndarray:
    std = float(np.std(v))
    return (v - np.mean(v)) / (std if std > 0 else 1.0)


def _lloyd_two_means(pts: np.ndarray, rng, max_iter: int) -> tuple[np.ndarray, float]:
    """One seeded k-means++ run with k=2; returns (labels, inertia)."""
    n = len(pts)
    first = int(rng.integers(n))
    d2 = np.sum((pts - pts[first]) ** 2, axis=1)
    if d2.sum() > 0:
        second = int(rng.choice(n, p=d2 / d2.sum()))
    else:
        second = (first + 1) % n
    centroids = pts[[first, second]].astype(float)

    labels = np.full(n, -1)
    for _ in range(max_iter):
        dists = np.linalg.norm(pts[:, None, :] - centroids[None, :, :], axis=2)
        new_labels = np.argmin(dists, axis=1)
        for c in (0, 1):
            if not np.any(new_labels == c):
                # reseed an emptied cluster at the point farthest from the other
                far = int(np.argmax(dists[:, 1 - c]))
                new_labels[far] = c
            centroids[c] = pts[new_labels == c].mean(axis=0)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    inertia = float(
        np.sum((pts - centroids[labels]) ** 2)
    )
    return labels, inertia
