"""Monte Carlo comparison of sampling methods against the full-data fit.

For every subsample size ``r`` and every (method, scheme) pair the
engine draws ``B`` independent subsamples, solves each weighted
problem, and reports

    MSE = mean_b ||beta_tilde_b - beta_full||^2

together with its standard error, the mean realized subsample size, the
fraction of replications inside the error bound, and stage timings.

Replication ``b`` draws from the seed stream ``(seed, b)`` whatever the
method, subsample size or thread count, so reports are reproducible and
methods are compared on common random numbers.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from gradsample.bounds import sigma_sq_b
from gradsample.errors import (
    DegenerateGradients,
    DivisionByZeroProb,
    EmptyDraw,
    ExcessiveFailures,
    SingularGram,
)
from gradsample.harness.config import ExperimentConfig, MethodSpec
from gradsample.harness.io import load_csv
from gradsample.linalg import Dataset, LsSolution, solve_full, solve_weighted
from gradsample.probabilities import (
    Method,
    ProbabilityVector,
    approx_leverage_probs,
    gradient_probs,
    leverage_probs,
    residual_oracle_probs,
    uniform_probs,
)
from gradsample.sampling import draw, pilot_estimate
from gradsample.seeding import derive_seed
from gradsample.synthesis import (
    ResponseSpec,
    draw_coefficients,
    generate_design,
    generate_response,
    preset,
)

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 10
MAX_FAILURE_RATE = 0.5
_RECOVERABLE = (EmptyDraw, SingularGram, DegenerateGradients)

# top-level keys of the seed tree
_DATA_STREAM, _REPLICATION_STREAM, _SKETCH_STREAM = 0, 1, 2


@dataclass
class ResultRecord:
    method: str
    scheme: str
    r: float
    r0: float | None
    replications: int
    failures: int
    mean_size: float
    mse: float
    mse_se: float
    coverage: float
    d1_ms: float
    d1_pilot_ms: float
    d2_ms: float


@dataclass
class ExperimentReport:
    n: int
    d: int
    seed: int
    source: str
    records: list[ResultRecord] = field(default_factory=list)

    def record(self, method: str, scheme: str = "poisson", r: float | None = None) -> ResultRecord:
        for rec in self.records:
            if rec.method == method and rec.scheme == scheme and (r is None or rec.r == r):
                return rec
        raise KeyError((method, scheme, r))


@dataclass
class _Replicate:
    err_sq: float
    size: int
    covered: float
    d1: float
    pilot: float
    d2: float


def empirical_mse(beta_hats: ArrayLike, beta_full: ArrayLike) -> float:
    """Mean squared Euclidean distance of each estimate from ``beta_full``."""
    beta_hats = np.atleast_2d(np.asarray(beta_hats, dtype=np.float64))
    if beta_hats.shape[0] == 0:
        raise ValueError("need at least one estimate")
    diff = beta_hats - np.asarray(beta_full, dtype=np.float64)
    return float(np.mean(np.einsum("ij,ij->i", diff, diff)))


def build_dataset(config: ExperimentConfig) -> Dataset:
    """The dataset described by ``config``: a CSV file or a seeded synthetic design."""
    if config.csv is not None:
        return load_csv(config.csv, config.y_column, config.header)
    data_seed = config.seed if config.data_seed is None else config.data_seed
    x = generate_design(
        config.n, config.d, preset(config.preset, config.sigma_x),
        derive_seed(data_seed, _DATA_STREAM, 0),
    )
    beta = draw_coefficients(config.d, derive_seed(data_seed, _DATA_STREAM, 1))
    spec = ResponseSpec(sigma_eps=config.sigma_eps, misspec=config.misspec, rho=config.rho,
                        hidden_design=preset(config.preset, config.sigma_x))
    y = generate_response(x, beta, spec, derive_seed(data_seed, _DATA_STREAM, 2))
    return Dataset(x, y)


class _Runner:
    def __init__(self, config: ExperimentConfig, data: Dataset, full: LsSolution):
        self.config = config
        self.data = data
        self.full = full
        self.lambda_min = full.gram_min_eigenvalue
        self._static: dict[Method, tuple[ProbabilityVector, float, float]] = {}

    def static_probs(self, method: Method) -> tuple[ProbabilityVector, float, float]:
        """Data-only probabilities, computed once: (pi, sigma_sq_b, seconds)."""
        if method not in self._static:
            t0 = time.perf_counter()
            if method is Method.UNIFORM:
                pi = uniform_probs(self.data.n)
            elif method is Method.LEVERAGE:
                pi = leverage_probs(self.data.x)
            elif method is Method.APPROX_LEVERAGE:
                rows = self.config.sketch_rows or 20 * self.data.d
                pi = approx_leverage_probs(
                    self.data.x, rows, derive_seed(self.config.seed, _SKETCH_STREAM)
                )
            elif method is Method.RESIDUAL_ORACLE:
                pi = residual_oracle_probs(self.data, self.full.beta)
            else:
                raise ValueError(f"{method} is not a static method")
            elapsed = time.perf_counter() - t0
            self._static[method] = (pi, self._sigma_sq_b(pi), elapsed)
        return self._static[method]

    def _sigma_sq_b(self, pi: ProbabilityVector) -> float:
        try:
            return sigma_sq_b(self.data, self.full.beta, pi)
        except DivisionByZeroProb:
            return math.inf

    def bound(self, sig_b: float, r: float) -> float:
        return 3.0 * math.sqrt(sig_b) / (self.lambda_min * self.config.delta * math.sqrt(r))

    def replicate(self, spec: MethodSpec, r: float, r0: float, b: int) -> _Replicate | None:
        cfg = self.config
        for attempt in range(MAX_ATTEMPTS):
            stream = derive_seed(cfg.seed, _REPLICATION_STREAM, b, attempt)
            try:
                pilot_t = 0.0
                t0 = time.perf_counter()
                if spec.method is Method.GRADIENT:
                    pilot = pilot_estimate(self.data, r0, derive_seed(stream, 0))
                    pilot_t = time.perf_counter() - t0
                    pi = gradient_probs(self.data, pilot.beta)
                    sig_b = self._sigma_sq_b(pi)
                    d1 = time.perf_counter() - t0
                else:
                    pi, sig_b, d1 = self.static_probs(spec.method)
                t1 = time.perf_counter()
                sub = draw(pi, r, spec.scheme, derive_seed(stream, 1), cfg.redistribute)
                sol = solve_weighted(self.data, sub)
                d2 = time.perf_counter() - t1
            except _RECOVERABLE as exc:
                log.debug("replication %d attempt %d failed: %s", b, attempt, exc)
                continue
            diff = sol.beta - self.full.beta
            err_sq = float(diff @ diff)
            covered = float(math.sqrt(err_sq) <= self.bound(sig_b, r))
            return _Replicate(err_sq, sub.realized_size, covered, d1, pilot_t, d2)
        return None


def run_experiment(config: ExperimentConfig, data: Dataset | None = None,
                   threads: int | None = None) -> ExperimentReport:
    """Run every (method, scheme, r) cell of ``config``.

    Raises
    ------
    SingularGram
        If the full-data problem itself is singular.
    ExcessiveFailures
        If more than half the replications of any cell fail after retries.
    """
    if data is None:
        data = build_dataset(config)
    full = solve_full(data)
    runner = _Runner(config, data, full)
    threads = threads or config.resolved_threads()
    source = config.csv if config.csv is not None else (
        f"{config.preset.upper()} n={config.n} d={config.d} misspec={config.misspec} rho={config.rho}"
    )
    report = ExperimentReport(n=data.n, d=data.d, seed=config.seed, source=source)
    B = config.replications

    with ThreadPoolExecutor(max_workers=threads) as pool:
        for r in config.subsample_sizes(data.n):
            r0 = config.pilot_size(r)
            for spec in config.method_specs():
                uses_pilot = spec.method is Method.GRADIENT
                if not uses_pilot:
                    # fill the cache before fanning out so it is computed once
                    runner.static_probs(spec.method)
                if threads > 1:
                    reps = list(pool.map(lambda b: runner.replicate(spec, r, r0, b), range(B)))
                else:
                    reps = [runner.replicate(spec, r, r0, b) for b in range(B)]
                ok = [rep for rep in reps if rep is not None]
                failures = B - len(ok)
                if failures > MAX_FAILURE_RATE * B:
                    raise ExcessiveFailures(
                        f"{spec} at r={r:g}: {failures} of {B} replications failed"
                    )
                report.records.append(_summarize(spec, r, r0 if uses_pilot else None,
                                                 B, ok, runner))
                log.info("%s r=%g mse=%.4g", spec, r, report.records[-1].mse)
    return report


def _summarize(spec: MethodSpec, r: float, r0: float | None, B: int,
               ok: list[_Replicate], runner: _Runner) -> ResultRecord:
    err = np.array([rep.err_sq for rep in ok])
    k = err.size
    if spec.method is Method.GRADIENT:
        d1 = float(np.mean([rep.d1 for rep in ok])) if k else math.nan
        pilot = float(np.mean([rep.pilot for rep in ok])) if k else math.nan
    else:
        d1, pilot = runner.static_probs(spec.method)[2], 0.0
    return ResultRecord(
        method=spec.method.value,
        scheme=spec.scheme.value,
        r=float(r),
        r0=None if r0 is None else float(r0),
        replications=B,
        failures=B - k,
        mean_size=float(np.mean([rep.size for rep in ok])) if k else math.nan,
        mse=float(err.mean()) if k else math.nan,
        mse_se=float(err.std(ddof=1) / math.sqrt(k)) if k > 1 else math.nan,
        coverage=float(np.mean([rep.covered for rep in ok])) if k else math.nan,
        d1_ms=1e3 * d1,
        d1_pilot_ms=1e3 * pilot,
        d2_ms=1e3 * (float(np.mean([rep.d2 for rep in ok])) if k else math.nan),
    )
