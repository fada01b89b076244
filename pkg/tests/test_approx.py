from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _gen import make_rng, random_continuous_law, random_pl_map
from quasiinv import fixtures
from quasiinv.approx import (
    blockmap_distance,
    closure_composer,
    constraint_residual,
    discretize_gms,
    find_Bk,
    schedule,
    split_points,
    splitting_theta,
    spreading_upsilon,
    target_identity,
)
from quasiinv.cosets import CanonicalLabel
from quasiinv.errors import PreconditionError
from quasiinv.measure import RMeasure, ValueBinGrid, add, bin_discretize, measure_distance
from quasiinv.topology import gms_distance
from quasiinv.transform import kappa_full, sup_distance

F = Fraction
HALF = F(1, 2)
U = fixtures.uniform_law()


def test_split_points_examples():
    assert split_points(1).cuts == (1,)
    assert split_points(2).cuts == (F(1, 3), 1, 3)
    for n in range(1, 13):
        cuts = split_points(n).cuts
        assert all(a < b for a, b in zip(cuts, cuts[1:]))


def test_find_Bk_examples():
    z, w = find_Bk(U, U.scale(HALF), (F(1, 3), 1))
    assert abs(z - 0.625) <= 1e-10 and abs(w - 0.875) <= 1e-10
    assert tuple(find_Bk(U, U, (F(1, 3), 1))) == (HALF, 1)
    z, w = find_Bk(U, RMeasure(), (F(1, 3), 1))
    assert z == w


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 20), st.integers(1, 20), st.integers(1, 99), st.integers(2, 5), st.data())
def test_find_Bk_closed_form_for_uniform_laws(a, width, lam, n, data):
    # for a constant density the interval is centred on the block's support with length lam * L
    lo_s, hi_s = F(a, 10), F(a + width, 10)
    nu = RMeasure.uniform(lo_s, hi_s)
    lam = F(lam, 100)
    blocks = split_points(n).blocks()
    k = data.draw(st.integers(0, len(blocks) - 1))
    lo, hi = blocks[k]
    l, h = max(lo, lo_s), min(hi if hi is not None else hi_s, hi_s)
    if h <= l:
        return
    z, w = find_Bk(nu, nu.scale(lam), (lo, hi if hi is not None else float("inf")))
    mid, L = (l + h) / 2, h - l
    assert abs(float(z) - float(mid - lam * L / 2)) <= 1e-10
    assert abs(float(w) - float(mid + lam * L / 2)) <= 1e-10


def test_find_Bk_postconditions_random():
    rng = make_rng(31)
    for _ in range(30):
        nu = random_continuous_law(rng)
        nu1 = nu.scale(F(rng.randint(1, 99), 100))
        blocks = split_points(rng.randint(1, 4)).blocks()
        lo, hi = blocks[rng.randrange(len(blocks))]
        hi = float("inf") if hi is None else hi
        z, w = find_Bk(nu, nu1, (lo, hi))
        got, want = nu.restrict(z, w), nu1.restrict(lo, hi)
        assert abs(float(got.mass - want.mass)) <= 1e-10
        assert abs(float(got.moment - want.moment)) <= 1e-10


def test_find_Bk_rejects_atoms_and_excess():
    with pytest.raises(PreconditionError):
        find_Bk(RMeasure.atom(1), RMeasure.atom(1, HALF), (HALF, 2))
    with pytest.raises(PreconditionError):
        find_Bk(U.scale(HALF), U, (F(1, 3), 1))


def _laws(bm, source_block, name):
    return add(*[e.law for e in bm.entries if e.source[1] == source_block and e.target[0] == name])


def test_splitting_examples():
    theta = splitting_theta(U, U.scale(HALF), U.scale(HALF), 2)
    law = _laws(theta, 1, "line1")
    assert measure_distance(law, RMeasure.uniform(F(5, 8), F(7, 8), F(1, 4))) <= 1e-12
    assert abs(law.mass - F(1, 4)) <= 1e-12
    copy1 = sum(e.law.mass for e in theta.entries if e.target[0] == "line1")
    assert abs(copy1 - HALF) <= 1e-12
    assert not theta.support_violations()


def test_spreading_examples():
    ups = spreading_upsilon(U, 2)
    law = add(*[e.law for e in ups.entries if e.source[1] == 1])
    assert law == RMeasure.uniform(HALF, 1, HALF) or measure_distance(law, RMeasure.uniform(HALF, 1, HALF)) <= 1e-12
    for k, (lo, hi) in enumerate(split_points(2).blocks()):
        mass = sum(e.law.mass for e in ups.entries if e.source[1] == k)
        assert abs(mass - U.restrict(lo, hi if hi is not None else float("inf")).mass) <= 1e-12


def test_blockmap_conservation():
    half = U.scale(HALF)
    for bm in (splitting_theta(U, half, half, 5), spreading_upsilon(U, 5)):
        assert abs(bm.total_mass - 1) <= 1e-10
        assert abs(bm.total_moment - 1) <= 1e-10
        assert constraint_residual(bm, U) <= 1e-10
        assert not bm.support_violations()


def test_composer_on_single_line_is_the_identity():
    lbl = CanonicalLabel((U,), RMeasure())
    for k in range(1, 4):
        bm = closure_composer(U, lbl, k, level=schedule(k))
        assert blockmap_distance(bm, lbl) == 0


def test_composer_reduces_to_the_two_engines():
    half = U.scale(HALF)
    split = CanonicalLabel((half, half), RMeasure())
    spread = CanonicalLabel((), U)
    for k in (1, 3):
        n = schedule(k)
        assert blockmap_distance(closure_composer(U, split, k, level=n), split) == pytest.approx(
            blockmap_distance(splitting_theta(U, half, half, n), split), abs=1e-12)
        assert blockmap_distance(closure_composer(U, spread, k, level=n), spread) == pytest.approx(
            blockmap_distance(spreading_upsilon(U, n), spread), abs=1e-12)


def test_target_identity_is_at_distance_zero():
    lbl = CanonicalLabel((U.scale(F(3, 4)),), U.scale(F(1, 4)))
    assert blockmap_distance(target_identity(lbl, 4), lbl) == 0


def test_composer_rejects_mismatched_target():
    with pytest.raises(PreconditionError) as err:
        closure_composer(U, CanonicalLabel((U.scale(HALF),), RMeasure()), 1, level=3)
    assert err.value.residuals


def test_spreading_distance_decreases():
    lbl = CanonicalLabel((), U)
    ds = [blockmap_distance(spreading_upsilon(U, n), lbl) for n in range(1, 8)]
    assert all(a > b for a, b in zip(ds[1:], ds[2:]))


def test_discretize_examples():
    psi = fixtures.psi_u()
    g1 = discretize_gms(psi, 1)
    assert [(s.x0, s.x1, s.y0, s.y1, s.slope) for s in g1.segments] == [
        (0, HALF, 0, F(3, 8), F(3, 4)), (HALF, 1, F(3, 8), 1, F(5, 4))]
    g0 = fixtures.g0()
    assert sup_distance(discretize_gms(g0, 3), g0) == 0


def test_discretize_is_bin_exact_on_random_maps():
    rng = make_rng(32)
    for _ in range(10):
        g = random_pl_map(rng)
        N = rng.randint(0, 5)
        assert kappa_full(discretize_gms(g, N)) == bin_discretize(kappa_full(g), ValueBinGrid(N))


def test_discretize_converges_on_h2():
    h2 = fixtures.h2()
    ds = [gms_distance(discretize_gms(h2, N), h2) for N in range(1, 7)]
    assert all(a > b for a, b in zip(ds, ds[1:]))


def test_unbounded_top_block_mass_vanishes():
    for n in range(2, 9):
        top = split_points(n).cuts[-1]
        assert U.restrict(top).mass == 0 or float(U.restrict(top).moment) <= 2.0 ** -n
    nu = RMeasure.uniform(F(1, 10), F(19, 10))
    moments = [float(nu.restrict(split_points(n).cuts[-1]).moment) for n in range(1, 6)]
    assert all(a >= b for a, b in zip(moments, moments[1:])) and moments[-1] == 0
