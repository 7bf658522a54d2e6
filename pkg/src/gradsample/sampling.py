"""Subsample draws (Poisson and with replacement) and uniform pilot estimates."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from gradsample.errors import EmptyDraw
from gradsample.linalg import Dataset, LsSolution, solve_weighted
from gradsample.probabilities import (
    InclusionProbabilities,
    ProbabilityVector,
    to_inclusion,
    uniform_probs,
)
from gradsample.seeding import SeedLike, derive_seed  # noqa: F401


class Scheme(str, enum.Enum):
    POISSON = "poisson"
    WITH_REPLACEMENT = "with_replacement"


@dataclass(frozen=True)
class SubsampleDraw:
    """Selected row indices and their importance weights.

    For Poisson draws the indices are distinct and increasing; draws with
    replacement may repeat an index, once per occurrence.
    """

    indices: NDArray[np.intp]
    weights: NDArray[np.float64]
    scheme: Scheme

    @property
    def realized_size(self) -> int:
        return int(self.indices.size)


def poisson_sample(inclusion: InclusionProbabilities, seed: SeedLike) -> SubsampleDraw:
    """Include row ``i`` independently with probability ``p_i``.

    Each selected row is weighted by ``1 / p_i``.  When ``p`` comes from
    :func:`to_inclusion` without redistribution this is ``1 / (r * pi_i)``
    for uncapped rows and 1 for capped ones.

    Raises
    ------
    EmptyDraw
        If no row is selected.
    """
    p = inclusion.p
    u = np.random.default_rng(seed).random(p.size)
    idx = np.flatnonzero(u < p)
    if idx.size == 0:
        raise EmptyDraw(f"Poisson draw selected no rows (expected {p.sum():.3g})")
    return SubsampleDraw(idx, 1.0 / p[idx], Scheme.POISSON)


def replacement_sample(pi: ProbabilityVector, r: int, seed: SeedLike) -> SubsampleDraw:
    """Exactly ``r`` independent draws from ``pi``, each weighted ``1 / (r * pi_i)``."""
    r = int(r)
    if r < 1:
        raise ValueError("r must be at least 1")
    rng = np.random.default_rng(seed)
    # inverse-CDF lookup; rng.choice would renormalize pi on its own terms
    cdf = np.cumsum(pi.pi)
    idx = np.searchsorted(cdf, rng.random(r) * cdf[-1], side="right")
    # u * total can round up to total; clamp onto the last row with mass
    idx = np.minimum(idx, np.flatnonzero(pi.pi)[-1])
    idx.sort()
    return SubsampleDraw(idx, 1.0 / (r * pi.pi[idx]), Scheme.WITH_REPLACEMENT)


def draw(
    pi: ProbabilityVector,
    r: float,
    scheme: Scheme | str,
    seed: SeedLike,
    redistribute: bool = False,
) -> SubsampleDraw:
    """Draw a subsample of expected (Poisson) or exact (replacement) size ``r``."""
    scheme = Scheme(scheme)
    if scheme is Scheme.POISSON:
        return poisson_sample(to_inclusion(pi, r, redistribute), seed)
    return replacement_sample(pi, int(round(r)), seed)


def pilot_estimate(data: Dataset, r0: float, seed: SeedLike) -> LsSolution:
    """Weighted fit on a uniform Poisson subsample of expected size ``r0``.

    Raises SingularGram when the draw cannot determine all ``d``
    coefficients, and EmptyDraw when nothing is selected.
    """
    if r0 < data.d:
        raise ValueError(f"pilot size r0={r0} is below the dimension d={data.d}")
    inc = to_inclusion(uniform_probs(data.n), r0)
    return solve_weighted(data, poisson_sample(inc, seed))
