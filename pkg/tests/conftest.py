"""Shared generators for randomized tests; every test seeds its own RNG."""

import math

import numpy as np
import pytest

from aobkit import schur


def random_blaschke(rng, max_zeros=4, im_range=(0.2, 2.0), re_range=(-3.0, 3.0),
                    min_zeros=0):
    n = int(rng.integers(min_zeros, max_zeros + 1))
    zeros = tuple(complex(rng.uniform(*re_range), rng.uniform(*im_range))
                  for _ in range(n))
    phases = tuple(rng.uniform(0.0, 2.0 * math.pi, size=n))
    return schur.BlaschkeProduct(zeros=zeros, phases=phases)


def random_meromorphic_inner(rng, max_zeros=4, a_range=(0.3, 2.5)):
    return schur.Product((random_blaschke(rng, max_zeros=max_zeros),
                          schur.SingularInner(a=float(rng.uniform(*a_range)))))


def random_outer(rng, max_knots=5):
    k = int(rng.integers(2, max_knots + 1))
    knots = np.sort(rng.uniform(-3.0, 3.0, size=k))
    while np.any(np.diff(knots) <= 1e-6):
        knots = np.sort(rng.uniform(-3.0, 3.0, size=k))
    values = -rng.uniform(0.0, 2.0, size=k)
    return schur.Outer(knots=tuple(knots), values=tuple(values))


def random_schur(rng):
    """A random product mixing all variants (not necessarily inner)."""
    factors = [random_blaschke(rng, max_zeros=3)]
    if rng.random() < 0.7:
        factors.append(schur.SingularInner(a=float(rng.uniform(0.0, 2.0))))
    if rng.random() < 0.5:
        factors.append(random_outer(rng))
    if rng.random() < 0.3:
        r = rng.uniform(0.3, 1.0)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        factors.append(schur.Constant(r * complex(math.cos(phi), math.sin(phi))))
    return schur.Product(tuple(factors))


def random_upper_half_points(rng, n, im_range=(0.2, 2.5), re_range=(-3.0, 3.0)):
    return [complex(rng.uniform(*re_range), rng.uniform(*im_range))
            for _ in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(0)
