"""Closed-form quantities for the corrected likelihood-ratio identity test.

Distance measures between a covariance matrix and the identity, the
finite-ratio correction term, null centering and scale for the
standardized statistic, and the asymptotic power approximations (general
and rank-one-spiked alternatives).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import linalg, models
from .exceptions import InvalidRegimeError

_SQRT2 = math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    """Standard normal CDF, computed via erfc (absolute error < 1e-14)."""
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_quantile(q: float) -> float:
    """Standard normal quantile; inverse of :func:`normal_cdf`."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile argument must lie in (0, 1), got {q}")
    return float(ndtri(q))


def d_correction(y: float) -> float:
    """The correction term 1 + (1/y - 1) log(1 - y), for y in (0, 1).

    Behaves like y/2 + y^2/6 + ... near zero and stays positive on (0, 1).
    """
    if not 0.0 < y < 1.0:
        raise ValueError(f"ratio y must lie in (0, 1), got {y}")
    return 1.0 + (1.0 / y - 1.0) * math.log1p(-y)


def sigma_scale(y: float) -> float:
    """Asymptotic scale sqrt(-2y - 2 log(1 - y)) of the standardized statistic."""
    if not 0.0 < y < 1.0:
        raise ValueError(f"ratio y must lie in (0, 1), got {y}")
    return math.sqrt(-2.0 * y - 2.0 * math.log1p(-y))


@dataclass(frozen=True)
class NullCalibration:
    """Centering and scale of p * L_n under the null.

    mu_n = y_n (delta/2 - 1) - (3/2) log(1 - y_n) and
    sigma_n^2 = -2 y_n - 2 log(1 - y_n), with y_n = p/n.
    """

    y_n: float
    delta: float
    mu_n: float
    sigma_n: float


def null_calibration(n: int, p: int, delta: float) -> NullCalibration:
    """Null centering/scale for sample size n, dimension p, excess kurtosis delta.

    Raises
    ------
    InvalidRegimeError
        Unless 2 <= p < n.
    """
    if p < 2 or p >= n:
        raise InvalidRegimeError(
            f"calibration requires 2 <= p < n so that y = p/n lies in (0, 1); "
            f"got p={p}, n={n}"
        )
    y = p / n
    mu = y * (delta / 2.0 - 1.0) - 1.5 * math.log1p(-y)
    return NullCalibration(y_n=y, delta=delta, mu_n=mu, sigma_n=sigma_scale(y))


def likelihood_distance(sigma: np.ndarray) -> float:
    """Likelihood distance tr(S) - log|S| - p; zero iff S is the identity.

    Raises
    ------
    NotPositiveDefiniteError
        If the matrix is not positive definite.
    """
    S = linalg.symmetrize(sigma)
    p = S.shape[0]
    return float(np.trace(S)) - linalg.logdet_spd(S) - p


def quadratic_distance(sigma: np.ndarray) -> float:
    """Quadratic distance tr((S - I)^2), the squared Frobenius gap to the identity."""
    S = linalg.symmetrize(sigma)
    D = S - np.eye(S.shape[0])
    return float((D * D).sum())


def model_likelihood_distance(cov: models.CovarianceModel) -> float:
    """Likelihood distance of a covariance model, via the analytic eigenvalues.

    Diagonal and rank-one models reduce to a single scalar term; only
    Explicit models fall back to the dense matrix path.
    """
    if isinstance(cov, models.Identity):
        return 0.0
    if isinstance(cov, models.DiagonalSpike):
        return cov.rho - math.log(cov.rho) - 1.0
    if isinstance(cov, models.RankOneSpike):
        a = cov.amplitude
        return a - math.log1p(a)
    if isinstance(cov, models.Explicit):
        return likelihood_distance(cov.matrix)
    raise TypeError(f"not a covariance model: {cov!r}")


def model_quadratic_distance(cov: models.CovarianceModel) -> float:
    """Quadratic distance of a covariance model, via the analytic eigenvalues."""
    if isinstance(cov, models.Identity):
        return 0.0
    if isinstance(cov, models.DiagonalSpike):
        return (cov.rho - 1.0) ** 2
    if isinstance(cov, models.RankOneSpike):
        return cov.amplitude**2
    if isinstance(cov, models.Explicit):
        return quadratic_distance(cov.matrix)
    raise TypeError(f"not a covariance model: {cov!r}")


def lrt_power(b: float, y: float, alpha: float) -> float:
    """Asymptotic power of the level-alpha test when the likelihood distance is b.

    Equals ``1 - Phi(z_{1-alpha} - b / sigma(y))``; alpha exactly at b = 0,
    strictly increasing in b.
    """
    if b < -1e-12:
        raise ValueError(f"likelihood distance b must be nonnegative, got {b}")
    b = max(b, 0.0)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    shift = b / sigma_scale(y)
    return normal_cdf(shift - normal_quantile(1.0 - alpha))


def lrt_spiked_power(h: float, y: float, alpha: float) -> float:
    """Power against the rank-one spike I + h sqrt(y) v v'.

    The spike contributes likelihood distance b = h sqrt(y) - log(1 + h sqrt(y)),
    so this is ``lrt_power(b, y, alpha)``.  Power tends to 1 as
    ``h sqrt(y)`` approaches -1 (an eigenvalue collapsing to zero).
    """
    if not 0.0 < y < 1.0:
        raise ValueError(f"ratio y must lie in (0, 1), got {y}")
    a = h * math.sqrt(y)
    if 1.0 + a <= 0.0:
        raise ValueError(f"1 + h*sqrt(y) must be positive, got {1.0 + a:.6g}")
    return lrt_power(a - math.log1p(a), y, alpha)


def quadratic_spiked_power(h: float, alpha: float) -> float:
    """Asymptotic power of the quadratic-distance tests against the same spike.

    ``1 - Phi(z_{1-alpha} - h^2 / 2)``: symmetric in h, so those tests gain
    nothing from a small eigenvalue (h < 0) relative to a large one.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return normal_cdf(0.5 * h * h - normal_quantile(1.0 - alpha))


def alternative_shift(sigma: np.ndarray, n: int) -> float:
    """Predicted mean of the standardized statistic under covariance ``sigma``.

    The standardized statistic shifts by likelihood_distance(sigma) / sigma_n
    when the population covariance is ``sigma`` instead of the identity.
    """
    sigma = np.asarray(sigma, dtype=float)
    p = sigma.shape[0]
    if p < 2 or p >= n:
        raise InvalidRegimeError(
            f"shift requires 2 <= p < n; got p={p}, n={n}"
        )
    return likelihood_distance(sigma) / sigma_scale(p / n)
