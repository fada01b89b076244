"""Standard example maps used in tests, demos and the command line."""

from fractions import Fraction

import numpy as np

from .measure import RMeasure
from .transform import (
    LinearSegment,
    NumericSegment,
    PwMap,
    QuantileSegment,
    identity_map,
    interval_exchange,
)

HALF = Fraction(1, 2)


def identity():
    return identity_map()


def g0():
    """Slope 1/2 on [0, 1/2], slope 3/2 on [1/2, 1]."""
    return PwMap([
        LinearSegment(0, HALF, 0, Fraction(1, 4), HALF),
        LinearSegment(HALF, 1, Fraction(1, 4), 1, Fraction(3, 2)),
    ])


def uniform_law():
    """Uniform law on (1/2, 3/2]: mass 1 and first moment 1."""
    return RMeasure.uniform(HALF, Fraction(3, 2))


def psi_u():
    """``x -> x**2/2 + x/2``, the convex map whose derivative is uniform on (1/2, 3/2]."""
    return PwMap([QuantileSegment(0, 1, 0, 1, uniform_law(), 0)])


def h2():
    """``psi_u`` rescaled into each half of [0, 1]."""
    base = RMeasure.uniform(HALF, Fraction(3, 2), HALF)
    return PwMap([
        QuantileSegment(0, HALF, 0, HALF, base, 0),
        QuantileSegment(HALF, 1, HALF, 1, base, 0),
    ])


def swap():
    return interval_exchange([HALF, HALF], [1, 0])


def oscillation(j):
    """``x -> x + sin(2 pi j x) / (2 pi j)``."""
    if j < 1:
        raise ValueError("j must be a positive integer")
    w = 2 * np.pi * j

    def fwd(x):
        return x + np.sin(w * x) / w

    def der(x):
        # 1 + cos(wx), written to keep relative accuracy near its zeros
        return 2 * np.cos(0.5 * w * x) ** 2

    return PwMap([NumericSegment(0.0, 1.0, 0.0, 1.0, fwd, der, None, 16 * j)])


def doubling_order(n):
    half = 2 ** (n - 1)
    return [2 * k if k < half else 2 * (k - half) + 1 for k in range(2 ** n)]


def doubling(n):
    """Exchange of the 2**n dyadic blocks interleaving the two halves of [0, 1]."""
    m = 2 ** n
    return interval_exchange([Fraction(1, m)] * m, doubling_order(n))
