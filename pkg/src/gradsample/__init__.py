"""Fast approximate least squares by randomized row subsampling.

Typical use::

    from gradsample import Dataset, solve_full, pilot_estimate, gradient_probs, draw, solve_weighted

    pilot = pilot_estimate(data, r0=1000, seed=1)
    pi = gradient_probs(data, pilot.beta)
    beta_tilde = solve_weighted(data, draw(pi, r=1000, scheme="poisson", seed=2)).beta
"""

from gradsample.bounds import (
    BoundReport,
    bernstein_expectation_bound,
    bound_constants,
    corollary_gap,
    error_bound,
    min_subsample_size,
)
from gradsample.errors import (
    DegenerateGradients,
    DimensionMismatch,
    DivisionByZeroProb,
    EmptyDraw,
    ExcessiveFailures,
    ParseError,
    SingularGram,
)
from gradsample.linalg import Dataset, LsSolution, gram_min_eigenvalue, solve_full, solve_weighted
from gradsample.probabilities import (
    InclusionProbabilities,
    Method,
    ProbabilityVector,
    approx_leverage_probs,
    gradient_probs,
    leverage_probs,
    residual_oracle_probs,
    to_inclusion,
    uniform_probs,
)
from gradsample.sampling import (
    Scheme,
    SubsampleDraw,
    draw,
    pilot_estimate,
    poisson_sample,
    replacement_sample,
)
from gradsample.seeding import derive_seed

__version__ = "0.1.0"
