"""Random generators shared by the test modules."""

import random
from fractions import Fraction

from quasiinv.measure import RMeasure
from quasiinv.transform import (
    IntervalSet,
    LinearSegment,
    PwMap,
    QuantileSegment,
    compose,
    convex_section,
    random_interval_exchange,
)


def normalize_law(rho):
    """Rescale mass, then dilate, so that mass and first moment are both 1."""
    rho = rho.scale(1 / Fraction(rho.mass))
    return rho.dilate(1 / Fraction(rho.moment))


def random_law(rng, atoms=None, pieces=None, linear=True):
    na = rng.randint(0, 3) if atoms is None else atoms
    npc = rng.randint(0 if na else 1, 3) if pieces is None else pieces
    at = [(Fraction(rng.randint(1, 40), 10), Fraction(rng.randint(1, 9), 10)) for _ in range(na)]
    pc = []
    for _ in range(npc):
        lo = Fraction(rng.randint(1, 30), 10)
        hi = lo + Fraction(rng.randint(1, 10), 10)
        c = (Fraction(rng.randint(1, 9), 10),)
        if linear and rng.random() < 0.5:
            c = c + (Fraction(rng.randint(0, 5), 10),)
        pc.append((lo, hi, c))
    return normalize_law(RMeasure(tuple(at), tuple(pc)))


def random_continuous_law(rng):
    return random_law(rng, atoms=0, pieces=rng.randint(1, 3))


def random_atomic_law(rng):
    return random_law(rng, atoms=rng.randint(1, 5), pieces=0)


def random_pl_map(rng, n=None):
    """Random slopes and lengths with total image 1; image blocks in random order."""
    n = n or rng.randint(1, 6)
    lengths = [Fraction(rng.randint(1, 20)) for _ in range(n)]
    tot = sum(lengths)
    lengths = [x / tot for x in lengths]
    slopes = [Fraction(rng.randint(1, 30), 10) for _ in range(n)]
    img = sum(s * l for s, l in zip(slopes, lengths))
    slopes = [s / img for s in slopes]
    order = list(range(n))
    rng.shuffle(order)
    ypos = {}
    y = 0
    for i in sorted(range(n), key=lambda i: order[i]):
        ypos[i] = y
        y += slopes[i] * lengths[i]
    segs = []
    x = 0
    for i in range(n):
        segs.append(LinearSegment(x, x + lengths[i], ypos[i], ypos[i] + slopes[i] * lengths[i], slopes[i]))
        x += lengths[i]
    return PwMap(segs)


def random_exact_map(rng):
    """``u o section(nu) o v`` for random interval exchanges and a random law."""
    psi = convex_section(random_law(rng))
    u = random_interval_exchange(rng.randrange(10 ** 6), rng.randint(1, 5))
    v = random_interval_exchange(rng.randrange(10 ** 6), rng.randint(1, 5))
    return compose(u, compose(psi, v))


def random_convex_map(rng):
    """A convex map built directly from segments (no call to ``convex_section``)."""
    if rng.random() < 0.5:
        n = rng.randint(1, 5)
        slopes = sorted({Fraction(rng.randint(1, 40), 10) for _ in range(n)})
        lengths = [Fraction(rng.randint(1, 10)) for _ in slopes]
        tot = sum(lengths)
        lengths = [l / tot for l in lengths]
        img = sum(s * l for s, l in zip(slopes, lengths))
        slopes = [s / img for s in slopes]
        segs, x, y = [], 0, 0
        for s, l in zip(slopes, lengths):
            segs.append(LinearSegment(x, x + l, y, y + s * l, s))
            x, y = x + l, y + s * l
        return PwMap(segs)
    nu = random_continuous_law(rng)
    return PwMap([QuantileSegment(0, 1, 0, 1, nu, 0)])


def random_dyadic_set(rng, max_level=4):
    level = rng.randint(1, max_level)
    m = 2 ** level
    ks = sorted(rng.sample(range(m), rng.randint(1, m)))
    return IntervalSet(tuple((Fraction(k, m), Fraction(k + 1, m)) for k in ks))


def make_rng(seed):
    return random.Random(seed)
