"""Dense least-squares solvers for the full data and for weighted subsamples.

Both solvers factor the (row-scaled) design with a thin QR decomposition
rather than forming and inverting the Gram matrix.  The Gram matrix is
only ever used implicitly, through the singular values of the triangular
factor, to report its smallest eigenvalue and to detect rank deficiency.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import solve_triangular

from gradsample.errors import DimensionMismatch, EmptyDraw, SingularGram

if TYPE_CHECKING:
    from gradsample.sampling import SubsampleDraw

# smallest Gram eigenvalue below RCOND * largest eigenvalue is treated as singular
RCOND = 1e-12


def as_design(x: ArrayLike) -> NDArray[np.float64]:
    """Validate and return an ``(n, d)`` float64 design matrix.

    One-dimensional input is read as a single column.
    """
    x = np.array(x, dtype=np.float64, order="C")
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DimensionMismatch(f"design must be 2-D, got shape {x.shape}")
    if x.shape[0] < 1 or x.shape[1] < 1:
        raise DimensionMismatch(f"design must be nonempty, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("design contains NaN or infinite entries")
    x.setflags(write=False)
    return x


@dataclass(frozen=True)
class Dataset:
    """A design matrix ``x`` (n x d) with its response vector ``y`` (n,)."""

    x: NDArray[np.float64]
    y: NDArray[np.float64]

    def __post_init__(self):
        x = as_design(self.x)
        y = np.array(self.y, dtype=np.float64).reshape(-1)
        if y.shape[0] != x.shape[0]:
            raise DimensionMismatch(
                f"response has length {y.shape[0]} but design has {x.shape[0]} rows"
            )
        if not np.all(np.isfinite(y)):
            raise ValueError("response contains NaN or infinite entries")
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def residuals(self, beta: ArrayLike) -> NDArray[np.float64]:
        return self.y - self.x @ np.asarray(beta, dtype=np.float64)


@dataclass(frozen=True)
class LsSolution:
    """Coefficients of a least-squares fit plus solve diagnostics.

    ``gram_min_eigenvalue`` is the smallest eigenvalue of the (weighted)
    Gram matrix scaled by ``1/n``; ``residual_norm`` is measured on the rows
    used for the fit, with weights applied.
    """

    beta: NDArray[np.float64]
    gram_min_eigenvalue: float
    residual_norm: float
    effective_sample_size: int


def _qr_solve(a: NDArray, b: NDArray, n: int, size: int) -> LsSolution:
    if a.shape[0] < a.shape[1]:
        raise SingularGram(
            f"{a.shape[0]} rows cannot determine {a.shape[1]} coefficients"
        )
    q, r = np.linalg.qr(a, mode="reduced")
    sv = np.linalg.svd(r, compute_uv=False)
    eig = sv**2 / n
    if eig[-1] <= RCOND * eig[0]:
        raise SingularGram(
            f"Gram matrix is singular (eigenvalue ratio {eig[-1] / eig[0]:.3g})"
        )
    beta = solve_triangular(r, q.T @ b, lower=False)
    resid = b - a @ beta
    return LsSolution(
        beta=beta,
        gram_min_eigenvalue=float(eig[-1]),
        residual_norm=float(np.linalg.norm(resid)),
        effective_sample_size=size,
    )


def solve_full(data: Dataset) -> LsSolution:
    """Ordinary least squares on every row of ``data``.

    Raises
    ------
    SingularGram
        If ``X^T X / n`` is numerically singular.
    """
    return _qr_solve(data.x, data.y, data.n, data.n)


def solve_weighted(data: Dataset, draw: SubsampleDraw) -> LsSolution:
    """Weighted least squares on the rows selected by ``draw``.

    Row ``indices[k]`` enters the loss with weight ``weights[k]``, which
    for an importance sample is ``1 / (r * pi_i)``.  Repeated indices (from
    sampling with replacement) contribute once per occurrence.
    """
    idx = np.asarray(draw.indices, dtype=np.intp)
    w = np.asarray(draw.weights, dtype=np.float64)
    if idx.size == 0:
        raise EmptyDraw("subsample is empty")
    if idx.shape != w.shape:
        raise DimensionMismatch("indices and weights differ in length")
    if idx.min() < 0 or idx.max() >= data.n:
        raise IndexError("subsample index out of range")
    if not np.all(w > 0):
        raise ValueError("subsample weights must be strictly positive")
    sw = np.sqrt(w)
    a = data.x[idx] * sw[:, None]
    b = data.y[idx] * sw
    return _qr_solve(a, b, data.n, int(idx.size))


def gram_min_eigenvalue(x: ArrayLike) -> float:
    """Smallest eigenvalue of ``X^T X / n``, computed from the singular values of X."""
    x = as_design(x)
    sv = np.linalg.svd(x, compute_uv=False)
    return float(sv[-1] ** 2 / x.shape[0]) if sv.size == x.shape[1] else 0.0


def gram_max_eigenvalue(x: ArrayLike) -> float:
    x = as_design(x)
    sv = np.linalg.svd(x, compute_uv=False)
    return float(sv[0] ** 2 / x.shape[0])
