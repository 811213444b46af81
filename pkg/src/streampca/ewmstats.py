"""Exponentially weighted moving mean/covariance and ML fitting of the decay.

For p-dimensional observations x_1, x_2, ... and a decay 0 < alpha < 1:

    m_1 = x_1        m_t = (1 - alpha) x_t + alpha m_{t-1}
    S_1 = 0          S_t = (1 - alpha)(x_t - m_t)(x_t - m_t)^T + alpha S_{t-1}

The covariance recursion centres on the freshly updated mean (m_t, not
m_{t-1}).  Cf. Tsay, Analysis of Financial Time Series, 3rd ed., ch. 10,
where alpha ~ 0.9305 is quoted as typical of practice.

For Gaussian data the decay can be fitted by maximizing the prediction-error
log-likelihood

    ln L(alpha) = -1/2 sum_t [ ln det S_{t-1}
                               + (x_t - m_{t-1})^T S_{t-1}^{-1} (x_t - m_{t-1}) ]

with the first ``burn_in`` terms dropped: S has rank at most t - 1, so the
early terms are singular by construction.  ``estimate_alpha`` grid-searches
this likelihood; it is cheap, one-dimensional, and fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .linalg import as_matrix, as_vector

__all__ = [
    "EwmState",
    "SingularCovarianceError",
    "ewm_init",
    "ewm_update",
    "ewm_loglik",
    "estimate_alpha",
    "default_alpha_grid",
]


class SingularCovarianceError(RuntimeError):
    """The moving covariance could not be factorized at some observation."""

    def __init__(self, t: int):
        self.t = t
        super().__init__(f"moving covariance matrix is singular at observation t={t}")


@dataclass(frozen=True)
class EwmState:
    """Running exponentially weighted moments after ``count`` observations."""

    alpha: float
    mean: np.ndarray
    cov: np.ndarray
    count: int


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha


def ewm_init(x1, alpha: float) -> EwmState:
    """State after the first observation: mean = x1, covariance = 0."""
    alpha = _check_alpha(alpha)
    x = as_vector(x1, "x1")
    p = x.shape[0]
    return EwmState(alpha=alpha, mean=x.copy(), cov=np.zeros((p, p)), count=1)


def ewm_update(state: EwmState, x) -> EwmState:
    """Fold one observation into the running moments.

    The mean moves first; the covariance's rank-one term is centred on the
    updated mean.  Both recursions preserve exact symmetry of S (outer
    products are bit-symmetric).
    """
    x = as_vector(x, "x")
    if x.shape != state.mean.shape:
        raise ValueError(
            f"observation has dimension {x.shape[0]}, state has {state.mean.shape[0]}"
        )
    a = state.alpha
    mean = (1.0 - a) * x + a * state.mean
    d = x - mean
    cov = (1.0 - a) * np.outer(d, d) + a * state.cov
    return EwmState(alpha=a, mean=mean, cov=cov, count=state.count + 1)


def ewm_loglik(x, alpha: float, burn_in: int | None = None) -> float:
    """Gaussian log-likelihood of the decay, up to an additive constant.

    Prediction-error decomposition: observation t is scored against the
    moments accumulated from observations 1..t-1,

        -1/2 sum_{t > burn_in} [ ln det S_{t-1}
                                 + (x_t - m_{t-1})^T S_{t-1}^{-1} (x_t - m_{t-1}) ],

    which is the standard evaluation for recursively estimated Gaussian
    covariances (cf. Tsay, ch. 10).  Scoring x_t against the same-step S_t
    would let the covariance explain the very observation being scored and
    drives the maximizer to the smallest decay on any data.

    Terms with t <= burn_in are dropped (default burn_in: 10 p): the moving
    covariance has rank at most t - 1, so early terms are singular by
    construction.  Factorizations are symmetric (Cholesky) and a failure
    raises SingularCovarianceError rather than regularizing silently: a ridge
    term would bias the fitted decay.
    """
    mat = as_matrix(x, "X")
    n, p = mat.shape
    if burn_in is None:
        burn_in = 10 * p
    burn_in = int(burn_in)
    if burn_in < p + 1:
        raise ValueError(
            f"burn_in must be at least p + 1 = {p + 1} (S_t has rank < p before "
            f"that), got {burn_in}"
        )
    state = ewm_init(mat[0], alpha)
    total = 0.0
    for t in range(2, n + 1):
        x_t = mat[t - 1]
        if t > burn_in:
            try:
                factor = cho_factor(state.cov, lower=True, check_finite=False)
            except np.linalg.LinAlgError as err:
                raise SingularCovarianceError(t) from err
            e = x_t - state.mean
            logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
            quad = float(e @ cho_solve(factor, e, check_finite=False))
            total += logdet + quad
        state = ewm_update(state, x_t)
    return -0.5 * total


def default_alpha_grid() -> np.ndarray:
    """0.500, 0.501, ..., 0.999."""
    return np.arange(500, 1000) / 1000.0


def estimate_alpha(
    x, grid=None, burn_in: int | None = None
) -> tuple[float, np.ndarray]:
    """Grid-search ML estimate of the decay.

    Returns the argmax (lowest index wins exact ties, per np.argmax) and the
    full likelihood curve in grid order.
    """
    mat = as_matrix(x, "X")
    grid = default_alpha_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.shape[0] < 1:
        raise ValueError("grid must be a non-empty 1-d array of decay values")
    if np.any(grid <= 0.0) or np.any(grid >= 1.0):
        raise ValueError("grid values must lie strictly between 0 and 1")
    if np.any(np.diff(grid) < 0.0):
        raise ValueError("grid must be sorted in ascending order")
    curve = np.array([ewm_loglik(mat, a, burn_in) for a in grid])
    best = int(np.argmax(curve))
    return float(grid[best]), curve
