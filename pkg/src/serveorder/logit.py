"""Univariate logistic regression fitted by iteratively reweighted least squares."""

from __future__ import annotations

from dataclasses import dataclass
from math import erfc, exp, sqrt

import numpy as np

MAX_ITER = 100
COEF_TOL = 1e-10
DIVERGENCE_BOUND = 50.0
Z_95 = 1.96


class SeparationError(RuntimeError):
    """Raised when the likelihood diverges (quasi-complete separation)."""


@dataclass(frozen=True)
class LogitFit:
    """Fitted model logit P(Y=1) = beta0 + beta1 * x with Wald inference."""

    beta0: float
    beta1: float
    se0: float
    se1: float
    odds_ratio: float
    ci_low: float
    ci_high: float
    p_value: float
    n: int
    converged: bool
    n_iter: int


def fit_logit(data) -> LogitFit:
    """Maximum-likelihood fit on (y, x) pairs with y in {0, 1}.

    Newton/IRLS updates until the largest coefficient change drops below
    1e-10 (at most 100 iterations). Standard errors come from the inverse
    observed information; the p-value is the two-sided normal (Wald)
    approximation for beta1 and the CI uses the 1.96 critical value.
    Coefficients exceeding 50 in magnitude abort with SeparationError.
    """
    pairs = np.asarray(list(data), dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("data must be pairs (y, x)")
    y = pairs[:, 0]
    x = pairs[:, 1]
    n = len(y)
    if n < 10:
        raise ValueError(f"need at least 10 observations, got {n}")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("responses must be 0 or 1")
    if y.min() == y.max():
        raise ValueError("both response classes must be present")
    if not np.all(np.isfinite(x)):
        raise ValueError("covariate contains non-finite values")

    design = np.column_stack([np.ones(n), x])
    beta = np.zeros(2)
    converged = False
    iterations = 0
    for iterations in range(1, MAX_ITER + 1):
        eta = design @ beta
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = mu * (1.0 - mu)
        info = design.T @ (design * w[:, None])
        try:
            step = np.linalg.solve(info, design.T @ (y - mu))
        except np.linalg.LinAlgError as err:
            raise SeparationError(f"singular information matrix: {err}") from err
        beta = beta + step
        if np.max(np.abs(beta)) > DIVERGENCE_BOUND:
            raise SeparationError(
                f"coefficients diverged beyond {DIVERGENCE_BOUND} "
                "(quasi-complete separation)")
        if np.max(np.abs(step)) < COEF_TOL:
            converged = True
            break

    eta = design @ beta
    mu = 1.0 / (1.0 + np.exp(-eta))
    w = mu * (1.0 - mu)
    info = design.T @ (design * w[:, None])
    cov = np.linalg.inv(info)
    se0, se1 = sqrt(cov[0, 0]), sqrt(cov[1, 1])
    z = beta[1] / se1 if se1 > 0 else float("inf")
    return LogitFit(
        beta0=float(beta[0]),
        beta1=float(beta[1]),
        se0=se0,
        se1=se1,
        odds_ratio=exp(beta[1]),
        ci_low=exp(beta[1] - Z_95 * se1),
        ci_high=exp(beta[1] + Z_95 * se1),
        p_value=erfc(abs(z) / sqrt(2.0)),
        n=n,
        converged=converged,
        n_iter=iterations,
    )


def log_likelihood_gradient(fit: LogitFit, data) -> float:
    """Max-norm of the score equations at the fitted coefficients."""
    pairs = np.asarray(list(data), dtype=float)
    y = pairs[:, 0]
    x = pairs[:, 1]
    design = np.column_stack([np.ones(len(y)), x])
    mu = 1.0 / (1.0 + np.exp(-(design @ np.array([fit.beta0, fit.beta1]))))
    return float(np.max(np.abs(design.T @ (y - mu))))
