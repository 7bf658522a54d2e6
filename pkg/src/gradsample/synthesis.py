"""Synthetic designs and responses for the simulation studies.

Design entries are i.i.d. draws from the two-component mixture

    0.5 * N(-mu, sigma_x^2) + 0.5 * N(mu, (theta * sigma_x)^2)

with presets GA, MG1, MG2 and MG3.  Responses follow ``y = X beta + eps``
with Gaussian noise, optionally replaced by one of three misspecified
error models.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.signal import lfilter

from gradsample.linalg import as_design
from gradsample.seeding import SeedLike, derive_seed


@dataclass(frozen=True)
class MixtureSpec:
    mu: float = 0.0
    theta: float = 1.0
    sigma_x: float = 1.0

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")
        if not self.sigma_x > 0:
            raise ValueError("sigma_x must be positive")

    def raw_moment(self, k: int) -> float:
        """``E[x^k]`` of one design entry, for ``k`` in 1..4."""
        def gauss(m, s):
            return {1: m, 2: m**2 + s**2, 3: m**3 + 3 * m * s**2,
                    4: m**4 + 6 * m**2 * s**2 + 3 * s**4}[k]

        s = self.sigma_x
        return 0.5 * gauss(-self.mu, s) + 0.5 * gauss(self.mu, self.theta * s)

    @property
    def mean(self) -> float:
        return self.raw_moment(1)

    @property
    def variance(self) -> float:
        return self.raw_moment(2) - self.mean**2

    @property
    def kurtosis(self) -> float:
        """Non-excess kurtosis ``E[(x - m)^4] / var^2``."""
        m = self.mean
        m2, m3, m4 = (self.raw_moment(k) for k in (2, 3, 4))
        central4 = m4 - 4 * m * m3 + 6 * m**2 * m2 - 3 * m**4
        return central4 / self.variance**2


PRESETS: dict[str, MixtureSpec] = {
    "GA": MixtureSpec(mu=0.0, theta=1.0),
    "MG1": MixtureSpec(mu=0.0, theta=2.0),
    "MG2": MixtureSpec(mu=0.0, theta=5.0),
    "MG3": MixtureSpec(mu=5.0, theta=1.0),
}


def preset(name: str, sigma_x: float = 1.0) -> MixtureSpec:
    try:
        base = PRESETS[name.upper()]
    except KeyError:
        raise ValueError(f"unknown design preset {name!r}; choose from {sorted(PRESETS)}") from None
    return MixtureSpec(base.mu, base.theta, sigma_x)


class Misspec(str, enum.Enum):
    NONE = "none"
    HIDDEN_PREDICTOR = "hidden_predictor"  # Type I
    AR_ERRORS = "ar_errors"  # Type II
    ERROR_PREDICTOR_CORR = "error_predictor_corr"  # Type III


@dataclass(frozen=True)
class ResponseSpec:
    """Noise model for :func:`generate_response`.

    ``rho`` is the misspecification strength: the hidden-column coefficient
    (Type I), the AR(1) coefficient (Type II, in ``[0, 1)``), or the
    noise-scale slope on the first predictor (Type III).
    """

    sigma_eps: float = 10.0
    misspec: Misspec = Misspec.NONE
    rho: float = 0.0
    hidden_design: MixtureSpec = MixtureSpec()

    def __post_init__(self):
        object.__setattr__(self, "misspec", Misspec(self.misspec))
        if not self.sigma_eps > 0:
            raise ValueError("sigma_eps must be positive")
        if self.misspec is Misspec.AR_ERRORS and not 0 <= self.rho < 1:
            raise ValueError("AR coefficient must lie in [0, 1)")


def _mixture(rng: np.random.Generator, shape, spec: MixtureSpec) -> NDArray[np.float64]:
    upper = rng.random(shape) < 0.5
    z = rng.standard_normal(shape)
    loc = np.where(upper, spec.mu, -spec.mu)
    scale = np.where(upper, spec.theta * spec.sigma_x, spec.sigma_x)
    return loc + scale * z


def generate_design(n: int, d: int, spec: MixtureSpec | str, seed: SeedLike) -> NDArray[np.float64]:
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    if isinstance(spec, str):
        spec = preset(spec)
    return _mixture(np.random.default_rng(seed), (n, d), spec)


def draw_coefficients(d: int, seed: SeedLike) -> NDArray[np.float64]:
    if d < 1:
        raise ValueError("d must be at least 1")
    return np.random.default_rng(seed).standard_normal(d)


def generate_response(
    x: ArrayLike, beta: ArrayLike, spec: ResponseSpec, seed: SeedLike
) -> NDArray[np.float64]:
    """Responses ``X beta + eps`` under the noise model in ``spec``.

    The base noise stream is the same for every misspecification type, so
    any type at ``rho = 0`` reproduces the well-specified response exactly.
    Type I draws its hidden column from a second, independent stream.
    """
    x = as_design(x)
    beta = np.asarray(beta, dtype=np.float64).reshape(-1)
    n = x.shape[0]
    noise_seq, hidden_seq = derive_seed(seed, 0), derive_seed(seed, 1)
    z = np.random.default_rng(noise_seq).standard_normal(n)
    sigma, rho = spec.sigma_eps, spec.rho

    if spec.misspec is Misspec.NONE:
        eps = sigma * z
    elif spec.misspec is Misspec.HIDDEN_PREDICTOR:
        hidden = _mixture(np.random.default_rng(hidden_seq), n, spec.hidden_design)
        eps = sigma * z + rho * hidden
    elif spec.misspec is Misspec.AR_ERRORS:
        innovations = (math.sqrt(1.0 - rho**2) * sigma) * z
        # eps_i = rho * eps_{i-1} + innovation_i, starting from eps_0 = 0
        eps = lfilter([1.0], [1.0, -rho], innovations) if rho else innovations
    else:
        eps = (sigma * z) * (1.0 + rho * x[:, 0])
    return x @ beta + eps

