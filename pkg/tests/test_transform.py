from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _gen import make_rng, random_dyadic_set, random_exact_map, random_law, random_pl_map
from quasiinv import fixtures
from quasiinv.errors import PreconditionError, ValidationError
from quasiinv.measure import RMeasure, measure_distance
from quasiinv.transform import (
    IntervalSet,
    LinearSegment,
    PwMap,
    compose,
    convex_section,
    derivative,
    distribution_matrix,
    evaluate,
    evaluate_array,
    identity_map,
    interval_exchange,
    invert,
    is_measure_preserving,
    kappa_full,
    random_interval_exchange,
    rn_distribution,
    sup_distance,
)

F = Fraction
HALF = F(1, 2)
M = IntervalSet.full()


def test_evaluate_examples():
    ident = identity_map()
    assert evaluate(ident, F(1, 3)) == F(1, 3) and derivative(ident, F(1, 3)) == 1
    assert evaluate(fixtures.g0(), F(3, 4)) == F(5, 8)
    psi = fixtures.psi_u()
    for x in (F(1, 5), HALF, F(7, 8)):
        assert evaluate(psi, x) == x * x / 2 + x / 2
        assert derivative(psi, x) == x + HALF


def test_evaluate_outside_domain():
    with pytest.raises(PreconditionError):
        evaluate(fixtures.g0(), F(3, 2))


def test_invert_g0():
    inv = invert(fixtures.g0())
    assert [(s.x0, s.x1, s.slope) for s in inv.segments] == [(0, F(1, 4), 2), (F(1, 4), 1, F(2, 3))]


def test_group_law_on_fixtures():
    for g in (fixtures.g0(), fixtures.psi_u(), fixtures.h2(), fixtures.oscillation(2)):
        assert sup_distance(compose(g, invert(g)), identity_map()) <= 1e-10
    for g in (fixtures.g0(), fixtures.psi_u(), fixtures.h2()):
        assert sup_distance(compose(invert(g), g), identity_map()) <= 1e-10


def test_inverse_of_oscillation_is_cube_root_conditioned():
    # g is cubic near the zeros of g', so inverting g(x) loses x to eps**(1/3)
    g = fixtures.oscillation(2)
    assert sup_distance(compose(invert(g), g), identity_map()) <= 1e-5


def _bruteforce_law(f, n=2 ** 18):
    """Slopes of a piecewise linear float map sampled on cell midpoints."""
    h = 1.0 / n
    xs = (np.arange(n) + 0.5) * h
    slopes = (f(xs + h / 4) - f(xs - h / 4)) / (h / 2)
    vals, counts = np.unique(np.round(slopes, 9), return_counts=True)
    # cells straddling a breakpoint give mixed slopes of negligible mass
    return {v: c / n for v, c in zip(vals.tolist(), counts.tolist()) if c / n > 1e-4}


def test_compose_g0_g0_against_bruteforce():
    def g0f(x):
        return np.where(x <= 0.5, x / 2, 0.25 + 1.5 * (x - 0.5))

    oracle = _bruteforce_law(lambda x: g0f(g0f(x)))
    law = kappa_full(compose(fixtures.g0(), fixtures.g0()))
    got = {float(t): float(m) for t, m in law.atoms}
    assert set(got) == set(oracle)
    for t in got:
        assert abs(got[t] - oracle[t]) <= 1e-4
    assert law == RMeasure(atoms=((F(1, 4), HALF), (F(3, 4), F(1, 6)), (F(9, 4), F(1, 3))))
    assert law.moment == 1


def test_kappa_examples():
    A = IntervalSet.of(F(1, 8), F(5, 8))
    B = IntervalSet.of(F(1, 4), F(7, 8))
    assert rn_distribution(identity_map(), A, B) == RMeasure.atom(1, F(3, 8))
    g0 = fixtures.g0()
    k = rn_distribution(g0, M, M)
    assert k == RMeasure(atoms=((HALF, HALF), (F(3, 2), HALF)))
    assert k.mass == 1 and k.moment == 1
    assert rn_distribution(g0, IntervalSet.of(0, HALF), IntervalSet.of(0, F(1, 4))) == RMeasure.atom(HALF, HALF)


def test_psi_u_law_monte_carlo():
    law = rn_distribution(fixtures.psi_u(), M, M)
    assert law == fixtures.uniform_law()
    rng = np.random.default_rng(0)
    samples = np.sort(rng.random(10 ** 6) + 0.5)
    ys = np.linspace(0.5, 1.5, 41)
    emp = np.searchsorted(samples, ys, side="right") / samples.size
    assert np.max(np.abs(emp - law.cdf_array(ys))) <= 3e-3


def test_distribution_matrix_g0():
    parts = [IntervalSet.of(0, HALF), IntervalSet.of(HALF, 1)]
    dm = distribution_matrix(fixtures.g0(), parts)
    assert dm[0, 0] == RMeasure.atom(HALF, HALF)
    assert dm[0, 1].is_zero
    assert dm[1, 0] == RMeasure.atom(F(3, 2), F(1, 6))
    assert dm[1, 1] == RMeasure.atom(F(3, 2), F(1, 3))
    assert dm.constraint_residual() <= 1e-12


def test_distribution_matrix_identity_is_diagonal():
    parts = [IntervalSet.of(0, F(1, 3)), IntervalSet.of(F(1, 3), F(3, 4)), IntervalSet.of(F(3, 4), 1)]
    dm = distribution_matrix(identity_map(), parts)
    for a in range(3):
        for b in range(3):
            want = RMeasure.atom(1, parts[a].measure) if a == b else RMeasure()
            assert (dm[a, b] if (a, b) in dm.entries else RMeasure()) == want


def test_distribution_matrix_row_sums_random():
    rng = make_rng(11)
    parts = [IntervalSet.dyadic(2, k) for k in range(4)]
    for _ in range(20):
        dm = distribution_matrix(random_exact_map(rng), parts)
        assert dm.constraint_residual() <= 1e-12


def test_overlapping_partition_rejected():
    with pytest.raises(ValidationError):
        distribution_matrix(identity_map(), [IntervalSet.of(0, F(2, 3)), IntervalSet.of(HALF, 1)])


def test_convex_section_examples():
    assert sup_distance(convex_section(RMeasure.atom(1)), identity_map()) == 0
    step = RMeasure(atoms=((F(2), F(1, 4)), (F(2, 3), F(3, 4))))
    segs = convex_section(step).segments
    assert [(s.x0, s.x1, s.y0, s.y1, s.slope) for s in segs] == [
        (0, F(3, 4), 0, HALF, F(2, 3)), (F(3, 4), 1, HALF, 1, 2)]
    psi = convex_section(fixtures.uniform_law())
    xs = np.linspace(0, 1, 101)
    assert np.max(np.abs(evaluate_array(psi, xs) - (xs ** 2 + xs) / 2)) <= 1e-12


def test_convex_section_rejects_bad_moments():
    with pytest.raises(PreconditionError) as err:
        convex_section(RMeasure.atom(2))
    assert set(err.value.residuals) == {"mass", "moment"}


def test_section_continuity():
    # uniform laws on (1-a, 1+a] converge to the uniform law on (1/2, 3/2] as a -> 1/2
    target = convex_section(fixtures.uniform_law())
    gaps = []
    for a in (F(1, 10), F(1, 5), F(3, 10), F(2, 5), F(9, 20), F(49, 100)):
        gaps.append(sup_distance(convex_section(RMeasure.uniform(1 - a, 1 + a)), target))
    assert all(x > y for x, y in zip(gaps, gaps[1:]))


def test_measure_preserving_examples():
    assert is_measure_preserving(identity_map())
    assert is_measure_preserving(fixtures.swap())
    assert not is_measure_preserving(fixtures.g0())
    ie = random_interval_exchange(5, 4)
    assert all(s.slope == 1 for s in ie.segments) and is_measure_preserving(ie)


def test_biinvariance_seed():
    rng = make_rng(12)
    for g in (fixtures.g0(), fixtures.psi_u(), fixtures.h2()):
        base = kappa_full(g)
        for _ in range(10):
            u = random_interval_exchange(rng.randrange(10 ** 6), rng.randint(1, 5))
            v = random_interval_exchange(rng.randrange(10 ** 6), rng.randint(1, 5))
            assert kappa_full(compose(u, compose(g, v))) == base


def test_identity_on_numeric_segments():
    g = fixtures.oscillation(3)
    rng = make_rng(13)
    for _ in range(10):
        A = random_dyadic_set(rng)
        k = rn_distribution(g, A, M)
        image = sum(abs(float(evaluate(g, q)) - float(evaluate(g, p))) for p, q in A.intervals)
        assert abs(k.mass - float(A.measure)) <= 1e-8
        assert abs(k.moment - image) <= 1e-8


def test_inverse_identity_on_quantile_maps():
    g = fixtures.psi_u()
    A, B = IntervalSet.of(F(1, 4), F(3, 4)), IntervalSet.of(0, HALF)
    fwd = rn_distribution(g, A, B)
    back = rn_distribution(invert(g), B, A)
    # t -> 1/t image of t * fwd: compare characteristic functions
    for z in (0.0, 0.3 + 1j, 1.0):
        want = fwd.char(1 - z)
        assert abs(back.char(z) - want) <= 1e-7


def test_map_validation_names_offending_pair():
    with pytest.raises(ValidationError, match="0"):
        PwMap([LinearSegment(0, HALF, 0, HALF, 1), LinearSegment(F(3, 5), 1, HALF, 1, F(5, 4))])
    with pytest.raises(ValidationError):
        PwMap([LinearSegment(0, 1, 0, 1, 2)])


def test_map_json_roundtrip():
    rng = make_rng(14)
    for _ in range(10):
        g = random_exact_map(rng)
        h = PwMap.from_dict(g.to_dict())
        assert kappa_full(h) == kappa_full(g)
        assert sup_distance(g, h) == 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_identity_suite_property(seed):
    rng = make_rng(seed)
    g = random_pl_map(rng)
    A = random_dyadic_set(rng)
    k = rn_distribution(g, A, M)
    assert k.mass == A.measure
    image = sum(s.slope * (q - p) for s in g.segments for p, q in A.intersect_interval(s.x0, s.x1))
    assert k.moment == image


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_section_roundtrip_property(seed):
    nu = random_law(make_rng(seed))
    assert measure_distance(kappa_full(convex_section(nu)), nu) <= 1e-8


def test_interval_exchange_requires_permutation():
    with pytest.raises(ValidationError):
        interval_exchange([HALF, HALF], [0, 0])
