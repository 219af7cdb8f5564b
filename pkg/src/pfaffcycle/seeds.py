"""Deterministic randomness for genericity choices.

Every generic object (deformation constants, constant one-forms dH,
Rolle constants, slice planes, combination matrices, linear functionals)
is drawn from a stream keyed by the campaign seed and a structural label,
so identical seeds reproduce identical draws bit for bit, independent of
evaluation order.
"""

from __future__ import annotations

import random
from fractions import Fraction

RATIONAL_BOUND = 10**4


def stream(*labels) -> random.Random:
    """A fresh deterministic generator for the given label path."""
    return random.Random(":".join(str(label) for label in labels))


def draw_rational(rng: random.Random, nonzero: bool = True) -> Fraction:
    """Random rational with numerator and denominator bounded by 10^4."""
    num = rng.randint(0, RATIONAL_BOUND)
    if nonzero:
        num = rng.randint(1, RATIONAL_BOUND)
    if rng.random() < 0.5:
        num = -num
    return Fraction(num, rng.randint(1, RATIONAL_BOUND))


def draw_vector(rng: random.Random, length: int, nonzero: bool = True):
    return tuple(draw_rational(rng, nonzero) for _ in range(length))
