from fractions import Fraction

import numpy as np
import pytest

from gradsample.linalg import Dataset


def random_dataset(n, d, seed, noise=1.0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    beta = rng.standard_normal(d)
    y = x @ beta + noise * rng.standard_normal(n)
    return Dataset(x, y)


def exact_normal_equations(x, y, w=None):
    """Solve (X^T W X) b = X^T W y in exact rational arithmetic.

    Independent of the QR path: forms the Gram matrix from exact
    products of the float inputs and runs Gauss-Jordan elimination.
    """
    n, d = x.shape
    if w is None:
        w = np.ones(n)
    X = [[Fraction(float(v)) for v in row] for row in x]
    Y = [Fraction(float(v)) for v in y]
    W = [Fraction(float(v)) for v in w]
    a = [[sum(W[k] * X[k][i] * X[k][j] for k in range(n)) for j in range(d)] for i in range(d)]
    rhs = [sum(W[k] * X[k][i] * Y[k] for k in range(n)) for i in range(d)]
    for col in range(d):
        piv = next(r for r in range(col, d) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        rhs[col] *= inv
        for r in range(d):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
                rhs[r] -= f * rhs[col]
    return np.array([float(v) for v in rhs])


@pytest.fixture
def data_100x3():
    return random_dataset(100, 3, seed=7)
