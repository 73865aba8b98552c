"""Shared fixtures and randomized-input helpers.

Every randomized test draws from one seeded generator; set KFORGE_TEST_SEED
to reproduce a failure, the active seed is echoed into the test output.
"""

import os
import random
from fractions import Fraction

import pytest

from kforge.dgla import GradedElement
from kforge.hodge import make_metric
from kforge.linalg import Matrix
from kforge.scalars import qi
from kforge.series import GradedSeries

SEED = int(os.environ.get("KFORGE_TEST_SEED", "20250809"))


@pytest.fixture
def rng():
    print(f"seed: {SEED}")
    return random.Random(SEED)


def random_fraction(rng, span=4, max_denominator=3):
    return Fraction(rng.randint(-span, span), rng.randint(1, max_denominator))


def random_scalar(rng, span=4, max_denominator=3):
    return qi(random_fraction(rng, span, max_denominator), random_fraction(rng, span, max_denominator))


def random_nonzero_scalar(rng, span=4):
    while True:
        s = random_scalar(rng, span)
        if s:
            return s


def random_matrix(rng, rows, cols, density=0.7):
    out = Matrix.zeros(rows, cols)
    for i in range(rows):
        for j in range(cols):
            if rng.random() < density:
                s = random_scalar(rng, 3, 2)
                if s:
                    out.rowdata[i][j] = s
    return out


def random_metric(space, rng):
    """A random admissible metric: g = A . A^dagger for a sparse invertible
    lower-triangular A, validated exactly on construction."""
    grams = {}
    for q in space.degrees():
        n = space.dim(q)
        A = Matrix.zeros(n, n)
        for i in range(n):
            A.rowdata[i][i] = qi(rng.randint(1, 3))
            if i and rng.random() < 0.4:
                j = rng.randrange(i)
                s = random_scalar(rng, 2, 2)
                if s:
                    A.rowdata[i][j] = s
        grams[q] = A @ A.conjugate_transpose()
    return make_metric(space, grams)


def random_element(space, rng, degree=None, density=0.6):
    degrees = [degree] if degree is not None else list(space.degrees())
    components = {}
    for q in degrees:
        vec = [
            random_scalar(rng, 3, 2) if rng.random() < density else qi(0)
            for _ in range(space.dim(q))
        ]
        components[q] = vec
    return GradedElement(space, components)


def random_exponent(rng, nparams, max_total):
    total = rng.randint(1, max_total)
    exp = [0] * nparams
    for _ in range(total):
        exp[rng.randrange(nparams)] += 1
    return tuple(exp)


def random_series(space, parameters, order, rng, degree, terms=3, max_total=None):
    """A random series with coefficients homogeneous in the given degree."""
    max_total = max_total if max_total is not None else order
    acc = {}
    for _ in range(terms):
        exp = random_exponent(rng, len(parameters), max_total)
        coeff = random_element(space, rng, degree=degree)
        acc[exp] = acc[exp] + coeff if exp in acc else coeff
    return GradedSeries(space, parameters, order, acc)
