"""Row sampling distributions for subsampled least squares.

Every constructor returns a :class:`ProbabilityVector` summing to one.
:func:`to_inclusion` turns a distribution and an expected subsample size
``r`` into per-row Bernoulli inclusion probabilities for Poisson sampling.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import solve_triangular

from gradsample.errors import DegenerateGradients, DimensionMismatch, SingularGram
from gradsample.linalg import RCOND, Dataset, as_design


class Method(str, enum.Enum):
    UNIFORM = "uniform"
    LEVERAGE = "leverage"
    APPROX_LEVERAGE = "approx_leverage"
    GRADIENT = "gradient"
    RESIDUAL_ORACLE = "residual_oracle"


@dataclass(frozen=True)
class ProbabilityVector:
    pi: NDArray[np.float64]
    method: Method
    capped_indices: NDArray[np.intp] = field(
        default_factory=lambda: np.empty(0, dtype=np.intp)
    )

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.float64)
        if pi.ndim != 1 or pi.size == 0:
            raise DimensionMismatch("probabilities must be a nonempty vector")
        if np.any(pi < 0) or not np.all(np.isfinite(pi)):
            raise ValueError("probabilities must be finite and nonnegative")
        if abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {pi.sum()!r}, not 1")
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "method", Method(self.method))

    @property
    def n(self) -> int:
        return self.pi.size


@dataclass(frozen=True)
class InclusionProbabilities:
    """Per-row Bernoulli inclusion probabilities ``p`` at expected size ``r``."""

    p: NDArray[np.float64]
    r: float
    capped_indices: NDArray[np.intp]

    @property
    def expected_size(self) -> float:
        return float(self.p.sum())


def _normalize(scores: NDArray[np.float64]) -> NDArray[np.float64]:
    pi = scores / scores.sum()
    # absorb the rounding residue into the largest entry so the sum is 1 to ~1 ulp
    k = int(np.argmax(pi))
    pi[k] += 1.0 - pi.sum()
    return pi


def uniform_probs(n: int) -> ProbabilityVector:
    if n < 1:
        raise ValueError("n must be at least 1")
    return ProbabilityVector(np.full(n, 1.0 / n), Method.UNIFORM)


def leverage_scores(x: ArrayLike) -> NDArray[np.float64]:
    """Diagonal of the hat matrix ``X (X^T X)^{-1} X^T``.

    Computed as squared row norms of the thin-QR factor Q.
    """
    x = as_design(x)
    q, r = np.linalg.qr(x, mode="reduced")
    sv = np.linalg.svd(r, compute_uv=False)
    if x.shape[0] < x.shape[1] or sv[-1] ** 2 <= RCOND * sv[0] ** 2:
        raise SingularGram("X^T X is singular; leverage scores undefined")
    return np.einsum("ij,ij->i", q, q)


def leverage_probs(x: ArrayLike) -> ProbabilityVector:
    h = leverage_scores(x)
    return ProbabilityVector(_normalize(h), Method.LEVERAGE)


def approx_leverage_probs(
    x: ArrayLike,
    sketch_rows: int,
    seed: int | np.random.SeedSequence | None = None,
    *,
    sketch: ArrayLike | None = None,
    kind: str = "gaussian",
) -> ProbabilityVector:
    """Leverage-score probabilities from a random sketch of ``X``.

    The triangular factor ``R`` of ``S @ X`` stands in for that of ``X``,
    and ``pi_i`` is proportional to ``||x_i^T R^{-1}||^2``.

    Parameters
    ----------
    x : (n, d) array
    sketch_rows : int
        Rows of the sketching matrix ``S``; must be at least ``d``.
    seed : int or SeedSequence
        Seeds the sketch.  Ignored when ``sketch`` is given.
    sketch : (k, n) array, optional
        Explicit sketching matrix, e.g. the identity for an exact check.
    kind : {"gaussian", "countsketch"}
        Dense Gaussian projection scaled by ``1/sqrt(k)``, or a sparse
        sign embedding that hashes each row into one of ``k`` buckets.
    """
    x = as_design(x)
    n, d = x.shape
    if sketch is not None:
        sx = np.asarray(sketch, dtype=np.float64) @ x
    else:
        if sketch_rows < d:
            raise ValueError(f"sketch_rows={sketch_rows} is smaller than d={d}")
        rng = np.random.default_rng(seed)
        if kind == "gaussian":
            s = rng.standard_normal((sketch_rows, n)) / np.sqrt(sketch_rows)
            sx = s @ x
        elif kind == "countsketch":
            buckets = rng.integers(0, sketch_rows, size=n)
            signs = rng.choice([-1.0, 1.0], size=n)
            sx = np.zeros((sketch_rows, d))
            np.add.at(sx, buckets, x * signs[:, None])
        else:
            raise ValueError(f"unknown sketch kind {kind!r}")
    if sx.shape[0] < d:
        raise SingularGram("sketch has fewer rows than columns")
    r = np.linalg.qr(sx, mode="r")
    diag = np.abs(np.diag(r))
    if diag.min() <= np.sqrt(RCOND) * diag.max():
        raise SingularGram("sketched design is rank deficient; increase sketch_rows")
    # rows of X R^{-1}, obtained by solving R^T z_i = x_i for all i at once
    z = solve_triangular(r, x.T, trans="T", lower=False)
    scores = np.einsum("ij,ij->j", z, z)
    return ProbabilityVector(_normalize(scores), Method.APPROX_LEVERAGE)


def gradient_norms(data: Dataset, beta0: ArrayLike) -> NDArray[np.float64]:
    """``||g_i|| = ||x_i|| * |y_i - x_i^T beta0|`` for every row."""
    beta0 = np.asarray(beta0, dtype=np.float64).reshape(-1)
    if beta0.size != data.d:
        raise DimensionMismatch(f"beta0 has length {beta0.size}, expected {data.d}")
    row_norms = np.sqrt(np.einsum("ij,ij->i", data.x, data.x))
    return row_norms * np.abs(data.residuals(beta0))


def gradient_probs(data: Dataset, beta0: ArrayLike) -> ProbabilityVector:
    """Sampling probabilities proportional to per-row gradient norms at ``beta0``.

    Raises
    ------
    DegenerateGradients
        If every gradient is zero, i.e. ``beta0`` fits all rows exactly.
    """
    g = gradient_norms(data, beta0)
    if not g.sum() > 0:
        raise DegenerateGradients("all gradients vanish at the pilot estimate")
    return ProbabilityVector(_normalize(g), Method.GRADIENT)


def residual_oracle_probs(data: Dataset, beta_full: ArrayLike) -> ProbabilityVector:
    """Probabilities proportional to ``||e_i x_i||`` with full-data residuals.

    These minimize the response-noise term of the subsampling error bound.
    ``beta_full`` should be the full-data least-squares solution.
    """
    g = gradient_norms(data, beta_full)
    if not g.sum() > 0:
        raise DegenerateGradients("all full-data residuals vanish")
    return ProbabilityVector(_normalize(g), Method.RESIDUAL_ORACLE)


def to_inclusion(
    pi: ProbabilityVector, r: float, redistribute: bool = False
) -> InclusionProbabilities:
    """Bernoulli inclusion probabilities ``p_i = r * pi_i`` capped at one.

    With ``redistribute`` off, capped rows simply lose their excess mass
    and the expected size drops below ``r``.  With it on, the excess is
    spread over the uncapped rows in proportion to ``pi`` until the
    expected size equals ``min(r, n)``.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    p = r * pi.pi
    if not redistribute:
        capped = np.flatnonzero(p >= 1.0)
        p = np.minimum(p, 1.0)
        return InclusionProbabilities(p, float(r), capped)

    n = pi.n
    if r >= n:
        return InclusionProbabilities(np.ones(n), float(r), np.arange(n))
    capped = np.zeros(n, dtype=bool)
    while True:
        new = (p >= 1.0) & ~capped
        if not new.any():
            break
        capped |= new
        free = ~capped
        mass = pi.pi[free].sum()
        budget = r - capped.sum()
        p = np.where(capped, 1.0, 0.0)
        if mass > 0 and budget > 0:
            p[free] = pi.pi[free] * (budget / mass)
    return InclusionProbabilities(np.minimum(p, 1.0), float(r), np.flatnonzero(capped))
