"""Shared generators for the test suites."""

import random
from fractions import Fraction

from stokes_gate.formal import ExponentialPart, FormalData
from stokes_gate.gaussian import GaussianRational


def random_gaussian(rng, nonzero=False):
    while True:
        g = GaussianRational(Fraction(rng.randint(-9, 9), rng.randint(1, 6)),
                             Fraction(rng.randint(-9, 9), rng.randint(1, 6)))
        if g or not nonzero:
            return g


def random_formal_data(rng, max_m=6, max_n=5, max_l=4, zero_prob=0.1):
    """Formal data with m <= max_m parts, leading orders n_j <= max_n, ramification <= max_l."""
    l = rng.randint(1, max_l)
    m = rng.randint(1, max_m)
    parts = []
    for _ in range(m):
        if parts and rng.random() < zero_prob:
            parts.append(ExponentialPart.zero(l))
            continue
        n = rng.randint(1, max_n)
        coeffs = [random_gaussian(rng) if rng.random() < 0.6 else 0 for _ in range(n - 1)]
        coeffs.append(random_gaussian(rng, nonzero=True))
        parts.append(ExponentialPart(l, tuple(coeffs)))
    return FormalData(l, tuple(parts))


def random_suite(count=200, seed=2024):
    rng = random.Random(seed)
    return [random_formal_data(rng) for _ in range(count)]
