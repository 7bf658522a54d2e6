"""Summaries of sampling distributions and stage-timing benchmarks."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from gradsample.linalg import Dataset, solve_weighted
from gradsample.probabilities import (
    Method,
    ProbabilityVector,
    approx_leverage_probs,
    gradient_probs,
    leverage_probs,
    uniform_probs,
)
from gradsample.sampling import draw, pilot_estimate
from gradsample.seeding import derive_seed
from gradsample.synthesis import draw_coefficients, generate_design


@dataclass(frozen=True)
class Dispersion:
    """Five-number summary and variance of ``log pi`` over the positive entries."""

    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    variance: float
    zeros: int


def probability_dispersion(pi: ProbabilityVector) -> Dispersion:
    positive = pi.pi[pi.pi > 0]
    logs = np.log(positive)
    q = np.quantile(logs, [0.0, 0.25, 0.5, 0.75, 1.0])
    return Dispersion(*map(float, q), variance=float(logs.var()),
                      zeros=int(pi.n - positive.size))


@dataclass(frozen=True)
class TimingRow:
    n: int
    d: int
    method: str
    d1_s: float
    d1_pilot_s: float
    d2_s: float


def _probabilities(method: Method, data: Dataset, beta0, sketch_rows: int, seed):
    if method is Method.UNIFORM:
        return uniform_probs(data.n)
    if method is Method.LEVERAGE:
        return leverage_probs(data.x)
    if method is Method.APPROX_LEVERAGE:
        return approx_leverage_probs(data.x, sketch_rows, seed)
    if method is Method.GRADIENT:
        return gradient_probs(data, beta0)
    raise ValueError(f"cannot benchmark {method.value}")


def timing_benchmark(
    n_values: list[int],
    d: int,
    method: Method | str,
    seed: int = 0,
    r: float = 1000,
    repeats: int = 3,
) -> list[TimingRow]:
    """Best-of-``repeats`` wall-clock time of the weight and solve stages per ``n``.

    The weight stage (D1) computes the sampling probabilities; for the
    gradient method the pilot fit is timed separately and excluded from
    D1.  The solve stage (D2) draws a Poisson subsample of expected size
    ``r`` and solves it.  Runs serially on GA data.
    """
    method = Method(method)
    if len(n_values) < 2:
        raise ValueError("need at least two values of n")
    beta = draw_coefficients(d, derive_seed(seed, 1))
    rows = []
    for n in n_values:
        x = generate_design(n, d, "GA", derive_seed(seed, 0, n))
        noise = np.random.default_rng(derive_seed(seed, 2, n)).standard_normal(n)
        data = Dataset(x, x @ beta + 10.0 * noise)
        del x, noise
        beta0 = None
        pilot_s = 0.0
        if method is Method.GRADIENT:
            t0 = time.perf_counter()
            beta0 = pilot_estimate(data, min(r, n), derive_seed(seed, 3, n)).beta
            pilot_s = time.perf_counter() - t0
        d1 = d2 = np.inf
        for k in range(repeats):
            t0 = time.perf_counter()
            pi = _probabilities(method, data, beta0, 20 * d, derive_seed(seed, 4, n, k))
            t1 = time.perf_counter()
            solve_weighted(data, draw(pi, min(r, n), "poisson", derive_seed(seed, 5, n, k)))
            t2 = time.perf_counter()
            d1, d2 = min(d1, t1 - t0), min(d2, t2 - t1)
        rows.append(TimingRow(n, d, method.value, d1, pilot_s, d2))
        del data
    return rows
