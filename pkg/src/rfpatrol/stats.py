"""Campaign statistics: logistic regression, error summaries, failure grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import MapBounds


@dataclass
class LogisticFit:
    """Maximum-likelihood logistic fit with Wald inference.

    ``coef[0]`` is the intercept when one was added. ``separated`` marks data
    the model cannot identify (single-class outcomes or perfectly separable
    classes); such fits are reported as non-converged.
    """

    coef: np.ndarray
    std_err: np.ndarray
    z_values: np.ndarray
    p_values: np.ndarray
    converged: bool
    separated: bool
    n_iter: int


def _sigmoid(eta):
    return 1.0 / (1.0 + np.exp(-np.clip(eta, -500.0, 500.0)))


def fit_logistic(
    features,
    outcomes,
    add_intercept: bool = True,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> LogisticFit:
    """Fit P(success) = sigmoid(X beta) by iteratively reweighted least squares.

    Iterates Newton steps on the log-likelihood until the gradient norm drops
    below ``tol``. Wald standard errors come from the inverse observed
    information; two-sided p-values use the normal approximation.
    """
    x_mat = np.atleast_2d(np.asarray(features, dtype=float))
    y = np.asarray(outcomes, dtype=float).ravel()
    if x_mat.shape[0] != len(y):
        raise ValueError("features and outcomes disagree in length")
    if add_intercept:
        x_mat = np.column_stack((np.ones(len(y)), x_mat))
    k = x_mat.shape[1]
    nan_stats = np.full(k, np.nan)

    if len(np.unique(y)) < 2:
        return LogisticFit(np.zeros(k), nan_stats, nan_stats, nan_stats, False, True, 0)

    beta = np.zeros(k)
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        mu = _sigmoid(x_mat @ beta)
        grad = x_mat.T @ (y - mu)
        if float(np.linalg.norm(grad)) < tol:
            converged = True
            break
        weights = mu * (1.0 - mu)
        hessian = x_mat.T @ (x_mat * weights[:, None])
        try:
            step = np.linalg.solve(hessian, grad)
        except np.linalg.LinAlgError:
            break
        beta = beta + step

    mu = _sigmoid(x_mat @ beta)
    # Saturated fitted probabilities mean the classes are (quasi-)separable
    # and the true maximum-likelihood coefficients sit at infinity; the
    # numeric "optimum" is meaningless even when the gradient vanished.
    if bool(np.max(np.abs(y - mu)) < 1e-6):
        return LogisticFit(beta, nan_stats, nan_stats, nan_stats, False, True, n_iter)
    if not converged:
        return LogisticFit(beta, nan_stats, nan_stats, nan_stats, False, False, n_iter)

    weights = mu * (1.0 - mu)
    hessian = x_mat.T @ (x_mat * weights[:, None])
    cov = np.linalg.inv(hessian)
    std_err = np.sqrt(np.diag(cov))
    z_values = beta / std_err
    p_values = np.array([math.erfc(abs(z) / math.sqrt(2.0)) for z in z_values])
    return LogisticFit(beta, std_err, z_values, p_values, True, False, n_iter)


def error_summary(errors) -> dict:
    """Mean, median, and interquartile range of localization errors (m)."""
    arr = np.asarray(errors, dtype=float)
    if len(arr) == 0:
        return {"mean_m": None, "median_m": None, "iqr_m": None}
    q25, q75 = np.percentile(arr, [25.0, 75.0])
    return {
        "mean_m": float(arr.mean()),
        "median_m": float(np.median(arr)),
        "iqr_m": float(q75 - q25),
    }


def failure_heatmap(failed_positions, bounds: MapBounds, bins: int = 20) -> np.ndarray:
    """Failure counts on a bins x bins grid over the map.

    ``grid[iy, ix]`` counts failures with x in bin ix and y in bin iy, both
    ascending from the origin.
    """
    pts = np.asarray(failed_positions, dtype=float).reshape(-1, 2)
    grid, _, _ = np.histogram2d(
        pts[:, 1],
        pts[:, 0],
        bins=bins,
        range=[[0.0, bounds.height], [0.0, bounds.width]],
    )
    return grid.astype(int)
