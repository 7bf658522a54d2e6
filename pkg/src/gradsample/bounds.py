"""Computable error bound for importance-sampled least squares.

For sampling probabilities ``pi`` the subsample estimate satisfies, with
probability at least ``1 - delta``,

    ||beta_tilde - beta_full|| <= C / sqrt(r),   C = 3 * sigma_b / (lambda_min * delta)

provided ``r`` exceeds :func:`min_subsample_size`.  The constants are

    sigma_sq_gram = n^-2 * sum_i ||x_i||^4 / pi_i
    sigma_sq_b    = n^-2 * sum_i ||x_i||^2 e_i^2 / pi_i
    max_sq_norm   = max_i ||x_i||^2
    lambda_min    = smallest eigenvalue of X^T X / n

with ``e`` the full-data residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike, NDArray

from gradsample.errors import DegenerateGradients, DivisionByZeroProb
from gradsample.linalg import Dataset, gram_min_eigenvalue
from gradsample.probabilities import ProbabilityVector


@dataclass(frozen=True)
class BoundReport:
    sigma_sq_gram: float
    sigma_sq_b: float
    max_sq_norm: float
    lambda_min: float
    delta: float = 0.1
    n: int | None = None
    d: int | None = None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        for name in ("sigma_sq_gram", "sigma_sq_b", "max_sq_norm", "lambda_min"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def error_constant(self) -> float:
        """``C = 3 sigma_b / (lambda_min delta)``."""
        if self.lambda_min <= 0:
            return math.inf
        return 3.0 * math.sqrt(self.sigma_sq_b) / (self.lambda_min * self.delta)

    @property
    def first_order_constant(self) -> float:
        """``C1 = 2 sigma_b / (lambda_min delta)`` of the two-term bound."""
        return 2.0 / 3.0 * self.error_constant

    @property
    def r_min(self) -> float | None:
        """Minimum admissible ``r``, or ``None`` if ``delta`` is infeasible."""
        if self.n is None or self.d is None:
            raise ValueError("report lacks n and d; use min_subsample_size")
        return min_subsample_size(self, self.d, self.n)

    def with_delta(self, delta: float) -> BoundReport:
        return replace(self, delta=delta)


def _row_sq_norms(x: NDArray) -> NDArray:
    return np.einsum("ij,ij->i", x, x)


def _inverse_pi_sum(pi: NDArray, num: NDArray) -> float:
    """``sum_i num_i / pi_i`` with ``0 / 0 = 0``."""
    live = num != 0
    if np.any(pi[live] == 0):
        raise DivisionByZeroProb("a row with nonzero contribution has pi_i = 0")
    return float(np.sum(num[live] / pi[live]))


def sigma_sq_b(data: Dataset, beta_full: ArrayLike, pi: ProbabilityVector | ArrayLike) -> float:
    pi = pi.pi if isinstance(pi, ProbabilityVector) else np.asarray(pi, dtype=np.float64)
    e = data.residuals(beta_full)
    return _inverse_pi_sum(pi, _row_sq_norms(data.x) * e**2) / data.n**2


def bound_constants(
    data: Dataset,
    beta_full: ArrayLike,
    pi: ProbabilityVector | ArrayLike,
    delta: float = 0.1,
    lambda_min: float | None = None,
) -> BoundReport:
    """Bound constants for ``pi`` on ``data``.

    ``lambda_min`` may be passed in when already known (it depends on the
    design only) to skip an SVD of ``X``.

    Raises
    ------
    DivisionByZeroProb
        If ``pi_i = 0`` for a row with ``||x_i|| > 0``.
    """
    pi_arr = pi.pi if isinstance(pi, ProbabilityVector) else np.asarray(pi, dtype=np.float64)
    sq = _row_sq_norms(data.x)
    if np.any(pi_arr[sq > 0] == 0):
        raise DivisionByZeroProb("a row with nonzero norm has pi_i = 0")
    n = data.n
    e = data.residuals(beta_full)
    if lambda_min is None:
        lambda_min = gram_min_eigenvalue(data.x)
    return BoundReport(
        sigma_sq_gram=_inverse_pi_sum(pi_arr, sq**2) / n**2,
        sigma_sq_b=_inverse_pi_sum(pi_arr, sq * e**2) / n**2,
        max_sq_norm=float(sq.max()),
        lambda_min=float(lambda_min),
        delta=delta,
        n=n,
        d=data.d,
    )


def min_subsample_size(report: BoundReport, d: int, n: int) -> float | None:
    """Smallest ``r`` for which the bound holds at confidence ``1 - delta``.

    Returns ``None`` when ``delta`` is too small for any ``r`` to work,
    i.e. when ``lambda_min / 2 <= max_sq_norm * log d / (3 n delta)``.  At
    ``d = 1`` the requirement is vacuous and 0 is returned.
    """
    if d <= 1:
        return 0.0
    log_d = math.log(d)
    slack = report.lambda_min / 2.0 - report.max_sq_norm * log_d / (3.0 * n * report.delta)
    if slack <= 0:
        return None
    return 2.0 * report.sigma_sq_gram * log_d / (report.delta**2 * slack**2)


def error_bound(report: BoundReport, r: float) -> float:
    """``C / sqrt(r)``."""
    if not r > 0:
        raise ValueError("r must be positive")
    return report.error_constant / math.sqrt(r)


def two_term_bound(report: BoundReport, r: float, d: int) -> float:
    """``C1 / sqrt(r) + C2 / r``, the sharper intermediate form of the bound.

    ``C2 = 2 sqrt(2 log d) sigma_gram sigma_b / (lambda_min^2 delta^2)``.
    Whenever ``r`` exceeds :func:`min_subsample_size` this is below
    ``1.5 * C1 / sqrt(r) = error_bound(report, r)``.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    lam, delta = report.lambda_min, report.delta
    c1 = report.first_order_constant
    log_d = math.log(d) if d > 1 else 0.0
    c2 = (
        2.0 * math.sqrt(2.0 * log_d) * math.sqrt(report.sigma_sq_gram * report.sigma_sq_b)
        / (lam**2 * delta**2)
    )
    return c1 / math.sqrt(r) + c2 / r


def bernstein_expectation_bound(report: BoundReport, r: float, n: int, d: float) -> float:
    """Upper bound on ``E lambda_max(Sigma_n - Sigma_s)`` under Poisson sampling.

    ``sigma_gram * sqrt(2 log d / r) + max_sq_norm * log d / (3 n)``; zero for
    ``d <= 1``.
    """
    if d <= 1:
        return 0.0
    log_d = math.log(d)
    return (
        math.sqrt(report.sigma_sq_gram) * math.sqrt(2.0 * log_d) / math.sqrt(r)
        + report.max_sq_norm * log_d / (3.0 * n)
    )


def prediction_error(data: Dataset, beta_tilde: ArrayLike, beta_full: ArrayLike) -> float:
    """``||X (beta_tilde - beta_full)|| / n``."""
    diff = np.asarray(beta_tilde, dtype=np.float64) - np.asarray(beta_full, dtype=np.float64)
    return float(np.linalg.norm(data.x @ diff)) / data.n


def prediction_bound(report: BoundReport, r: float, lambda_max: float) -> float:
    """``C r^{-1/2} sqrt(lambda_max)``, the stated bound for :func:`prediction_error`."""
    return error_bound(report, r) * math.sqrt(lambda_max)


def oracle_sigma_sq_b(data: Dataset, beta_full: ArrayLike) -> float:
    """Minimum of ``sigma_sq_b`` over all distributions: ``(mean_i ||e_i x_i||)^2``."""
    e = data.residuals(beta_full)
    norms = np.sqrt(_row_sq_norms(data.x)) * np.abs(e)
    return float(norms.mean()) ** 2


def pilot_sigma_sq_b(data: Dataset, beta_full: ArrayLike, beta0: ArrayLike) -> float:
    """``sigma_sq_b`` of gradient probabilities built from the pilot ``beta0``.

    Equals ``(mean ||e0_i x_i||) * (mean ||x_i|| e_i^2 / |e0_i|)`` with pilot
    residuals ``e0``.  Rows where ``e0_i = 0`` but ``||x_i|| e_i != 0`` have
    zero probability yet carry signal, and make the value infinite.
    """
    e = np.abs(data.residuals(beta_full))
    e0 = np.abs(data.residuals(beta0))
    xn = np.sqrt(_row_sq_norms(data.x))
    first = float(np.mean(xn * e0))
    if first == 0:
        raise DegenerateGradients("pilot residuals vanish on every row")
    # ||x_i|| e_i^2 / |e0_i| written as (||x_i|| |e_i|) * (|e_i| / |e0_i|) so that
    # e0 == e reproduces the oracle value exactly
    w = xn * e
    live = w != 0
    if np.any(e0[live] == 0):
        return math.inf
    ratio = np.zeros_like(e)
    ratio[live] = e[live] / e0[live]
    second = float(np.mean(w * ratio))
    return first * second


def corollary_gap(
    data: Dataset,
    beta_full: ArrayLike,
    beta0: ArrayLike,
    delta: float = 0.1,
    lambda_min: float | None = None,
) -> float:
    """Excess of the error constant under pilot-gradient sampling over its minimum.

    The minimum over all distributions is attained by
    :func:`~gradsample.probabilities.residual_oracle_probs`; the gap
    shrinks as the pilot ``beta0`` approaches ``beta_full``.
    """
    if not np.any(data.residuals(beta_full) != 0):
        raise DegenerateGradients("full-data residuals vanish; the bound is trivially zero")
    if lambda_min is None:
        lambda_min = gram_min_eigenvalue(data.x)
    scale = 3.0 / (lambda_min * delta)
    pilot = pilot_sigma_sq_b(data, beta_full, beta0)
    best = oracle_sigma_sq_b(data, beta_full)
    if math.isinf(pilot):
        return math.inf
    return max(scale * (math.sqrt(pilot) - math.sqrt(best)), 0.0)
