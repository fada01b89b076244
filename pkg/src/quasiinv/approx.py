"""Approximation engines: splitting, spreading, their composition, and G0 discretization.

Maps between model spaces are stored as :class:`BlockMap` objects: the
derivative law carried from each source block to each target block.  The
model space of a label ``(nu_1, nu_2, ...; nu_inf)`` has one line per
``nu_j`` and a product ``R x [0, 1]`` for ``nu_inf``.  Value blocks are
``C_k = (a_k, a_{k+1}]`` with ``a_k = k 2^-n / (1 - k 2^-n)``; product blocks
are further cut into ``2**x_level`` equal slices of the fiber.

The identity from a model space to its ``t``-weighted copy has derivative
``t``; its BlockMap is diagonal with law ``nu_j`` restricted to each block.
Approximants built here keep the mass and first moment of every diagonal
block exact, so only the shape of the laws differs from the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from scipy.optimize import brentq

from .cosets import CanonicalLabel
from .errors import NumericError, PreconditionError, UnsupportedClassError, ValidationError
from .measure import DEFAULT_GRID, RMeasure, ValueBinGrid, add, bin_discretize, measure_distance
from .transform import LinearSegment, PwMap, kappa_full

FIND_TOL = 1e-10
DEFAULT_X_LEVEL = 3
DEFAULT_DEPTH = 6


# -- split partitions ----------------------------------------------------------


@dataclass(frozen=True)
class SplitPartition:
    level: int
    cuts: tuple

    @property
    def n_blocks(self):
        return len(self.cuts) + 1

    def bounds(self, k):
        lo = 0 if k == 0 else self.cuts[k - 1]
        hi = math.inf if k == len(self.cuts) else self.cuts[k]
        return lo, hi

    def blocks(self):
        return [self.bounds(k) for k in range(self.n_blocks)]


def split_points(n):
    if n < 1:
        raise PreconditionError("split level must be >= 1")
    w = Fraction(1, 2 ** n)
    return SplitPartition(n, tuple(k * w / (1 - k * w) for k in range(1, 2 ** n)))


def schedule(k):
    """Inner split level used at composer stage ``k``."""
    return k + 2


# -- the two-condition interval ------------------------------------------------


def find_Bk(nu, nu1, C):
    """Sub-interval ``[z, w]`` of ``C`` with ``nu([z, w]) = nu1(C)`` and equal first moments."""
    lo, hi = C
    part = nu.restrict(lo, hi)
    sub = nu1.restrict(lo, hi)
    if part.atoms:
        raise PreconditionError(f"nu has atoms in ({lo}, {hi}]")
    try:
        part.subtract(sub)
    except ValidationError:
        raise PreconditionError(f"nu1 <= nu fails on ({lo}, {hi}]") from None
    m1, T1 = sub.mass, sub.moment
    if m1 <= 0:
        z = part.support()[0] if not part.is_zero else lo
        return (z, z)
    sL, sR = nu.cdf(lo), nu.cdf(hi) if hi != math.inf else nu.mass
    if abs((sR - sL) - m1) <= 1e-14:
        a, b = part.support()
        return (max(a, lo), min(b, hi))

    def top(s):
        return nu.partial_moment(nu.quantile_clamped(s))

    def h(s):
        return float(top(s + m1) - top(s) - T1)

    s0, s1 = float(sL), float(sR - m1)
    h0, h1 = h(s0), h(s1)
    if h0 > FIND_TOL or h1 < -FIND_TOL:
        raise NumericError(
            "no sign change for the moment condition",
            residuals={"left": h0, "right": h1},
        )
    if h0 >= 0:
        s = s0
    elif h1 <= 0:
        s = s1
    else:
        s = brentq(h, s0, s1, xtol=1e-15, rtol=1e-15, maxiter=200)
    z = max(nu.quantile_clamped(s), lo)
    w = min(nu.quantile_clamped(s + m1), hi)
    got = nu.restrict(z, w)
    res = {"mass": float(got.mass - m1), "moment": float(got.moment - T1)}
    if abs(res["mass"]) > FIND_TOL or abs(res["moment"]) > FIND_TOL:
        raise NumericError("interval conditions not met", residuals=res)
    return (z, w)


# -- block maps ------------------------------------------------------------------


@dataclass(frozen=True)
class BlockEntry:
    source: tuple
    target: tuple
    law: RMeasure

    @property
    def mass(self):
        return self.law.mass


@dataclass(frozen=True)
class BlockMap:
    """Derivative laws between blocks ``(component, k, slice)`` of two model spaces."""

    level: int
    x_level: int
    entries: tuple

    def coarse(self, m):
        """Entries merged onto value blocks of level ``m <= level``."""
        if m > self.level:
            raise PreconditionError("cannot refine a BlockMap")
        shift = 2 ** (self.level - m)
        acc = {}
        for e in self.entries:
            src = (e.source[0], e.source[1] // shift, e.source[2])
            tgt = (e.target[0], e.target[1] // shift, e.target[2])
            acc.setdefault((src, tgt), []).append(e.law)
        return {k: add(*v) for k, v in acc.items()}

    def source_masses(self):
        out = {}
        for e in self.entries:
            out[e.source] = out.get(e.source, 0) + e.mass
        return out

    @property
    def total_mass(self):
        return sum((e.law.mass for e in self.entries), 0)

    @property
    def total_moment(self):
        return sum((e.law.moment for e in self.entries), 0)

    def support_violations(self):
        """Entries whose derivative values leave their value block."""
        part = split_points(self.level)
        bad = []
        for e in self.entries:
            if e.law.is_zero:
                continue
            lo, hi = part.bounds(e.source[1])
            a, b = e.law.support()
            if a < lo or b > hi:
                bad.append(e)
        return bad

    def to_dict(self):
        return {
            "level": self.level,
            "x_level": self.x_level,
            "entries": [
                {"source": list(e.source), "target": list(e.target), "law": e.law.to_dict()}
                for e in self.entries
            ],
        }


def _components(lbl):
    """``[(name, measure)]`` for the lines, then the product's continuous and atomic parts."""
    comps = [(f"line{j + 1}", m) for j, m in enumerate(lbl.nu)]
    cont, disc = lbl.nu_inf.decompose()
    return comps, cont, disc


def _slices(rho, weights_measure, parts):
    """Cut ``rho`` at the value quantiles splitting ``weights_measure`` into equal parts."""
    tot = weights_measure.mass
    cuts = [0] + [weights_measure.quantile_clamped(tot * i / parts) for i in range(1, parts)]
    cuts.append(math.inf)
    return cuts


def _spread(rho, k, x_level):
    """Entries carrying ``rho`` from product slices to weighted product slices."""
    parts = 2 ** x_level
    if rho.is_zero:
        return []
    src = _slices(rho, rho, parts)
    dst = _slices(rho, rho.t_weight(), parts)
    out = []
    for l in range(parts):
        piece = rho.restrict(src[l], src[l + 1])
        if piece.is_zero:
            continue
        for l2 in range(parts):
            law = piece.restrict(dst[l2], dst[l2 + 1])
            if not law.is_zero:
                out.append(BlockEntry(("product", k, l), ("product", k, l2), law))
    return out


def _atom_entries(disc, k, lo, hi, x_level):
    parts = 2 ** x_level
    law = disc.restrict(lo, hi)
    if law.is_zero:
        return []
    w = Fraction(1, parts)
    return [BlockEntry(("product", k, l), ("product", k, l), law.scale(w)) for l in range(parts)]


def target_identity(lbl, level, x_level=DEFAULT_X_LEVEL):
    """The identity from the model space of ``lbl`` to its t-weighted copy."""
    part = split_points(level)
    comps, cont, disc = _components(lbl)
    parts = 2 ** x_level
    w = Fraction(1, parts)
    entries = []
    for k, (lo, hi) in enumerate(part.blocks()):
        for name, m in comps:
            law = m.restrict(lo, hi)
            if not law.is_zero:
                entries.append(BlockEntry((name, k, 0), (name, k, 0), law))
        law = cont.restrict(lo, hi) + disc.restrict(lo, hi)
        if not law.is_zero:
            for l in range(parts):
                entries.append(BlockEntry(("product", k, l), ("product", k, l), law.scale(w)))
    return BlockMap(level, x_level, tuple(entries))


def blockmap_distance(bm, lbl, depth=DEFAULT_DEPTH, grid=None):
    """``sum_m 2^-m sum_blocks measure_distance`` against the target identity, ``m <= level``."""
    grid = grid or DEFAULT_GRID
    total = 0.0
    for m in range(1, min(bm.level, depth) + 1):
        have = bm.coarse(m)
        want = target_identity(lbl, m, bm.x_level).coarse(m)
        level_sum = 0.0
        for key in set(have) | set(want):
            level_sum += measure_distance(have.get(key, RMeasure()), want.get(key, RMeasure()), grid)
        total += 2.0 ** -m * level_sum
    return total


# -- the engines -------------------------------------------------------------------


def _check_label(nu, lbl, tol=1e-10):
    cont, disc = nu.decompose()
    lc, ld = lbl.nu_inf.decompose()
    lines = add(*lbl.nu, lc)
    res = {}
    for name, a, b in (("continuous", cont, lines), ("discrete", disc, ld)):
        res[f"{name}_mass"] = float(a.mass - b.mass)
        res[f"{name}_moment"] = float(a.moment - b.moment)
        try:
            a.subtract(b, tol=tol)
            b.subtract(a, tol=tol)
        except ValidationError:
            raise PreconditionError(
                f"target {name} components do not sum to the source", residuals=res
            ) from None
    if any(abs(v) > tol for v in res.values()):
        raise PreconditionError("target components do not sum to the source", residuals=res)


def closure_composer(nu, target, k, x_level=DEFAULT_X_LEVEL, level=None):
    """Stage-``k`` BlockMap approximating the identity of the target's model space.

    The source is the model space of ``(nu_c; nu_d)`` with ``nu_c``, ``nu_d``
    the continuous and atomic parts of ``nu``.  On each value block the
    continuous mass is peeled off line by line: line ``j <= k`` receives
    ``R_j`` restricted to the interval from :func:`find_Bk`, where
    ``R_j = nu_j + nu_{j+1} + ... + (continuous part of nu_inf)``.  Lines
    beyond ``k`` receive consecutive value slices of ``R_{k+1}`` with the
    right masses.  The last component takes what remains of the previous
    one; if it is the product part it is spread over the fiber slices.
    """
    _check_label(nu, target)
    n = schedule(k) if level is None else level
    part = split_points(n)
    comps, cont, disc = _components(target)
    order = list(comps)
    if not cont.is_zero:
        order.append(("product", cont))
    remain = []
    acc = RMeasure()
    for name, m in reversed(order):
        acc = acc + m
        remain.append(acc)
    remain.reverse()
    entries = []
    for kb, (lo, hi) in enumerate(part.blocks()):
        laws = _block_laws(order, remain, lo, hi, k)
        for (name, _), law in zip(order, laws):
            if law.is_zero:
                continue
            if name == "product":
                entries.extend(_spread(law, kb, x_level))
            else:
                entries.append(BlockEntry((name, kb, 0), (name, kb, 0), law))
        entries.extend(_atom_entries(disc, kb, lo, hi, x_level))
    return BlockMap(n, x_level, tuple(entries))


def _block_laws(order, remain, lo, hi, k):
    laws = []
    J = len(order)
    prev_rest = None
    for i, (name, m) in enumerate(order):
        R = remain[i]
        if i == J - 1:
            laws.append(R.restrict(lo, hi) if prev_rest is None else prev_rest)
            break
        if i < k:
            z, w = find_Bk(R, m, (lo, hi))
            taken = R.restrict(z, w) if w > z else RMeasure()
            rest = R.restrict(lo, hi).subtract(taken, tol=1e-11)
            laws.append(taken)
            prev_rest = rest
        else:
            laws.extend(_tail_slices(order[i:], R, lo, hi))
            break
    return laws


def _tail_slices(tail, R, lo, hi):
    """Consecutive value slices of ``R`` on the block with the tail components' masses."""
    out = []
    s = R.cdf(lo)
    left = lo
    for j, (_, m) in enumerate(tail):
        if j == len(tail) - 1:
            out.append(R.restrict(left, hi))
            break
        mass = m.restrict(lo, hi).mass
        s = s + mass
        right = min(R.quantile_clamped(s), hi) if mass > 0 else left
        out.append(R.restrict(left, right))
        left = right
    return out


def splitting_theta(nu, nu1, nu2, n):
    """Splitting of one line carrying ``nu = nu1 + nu2`` into two lines at level ``n``."""
    return closure_composer(nu, CanonicalLabel((nu1, nu2), RMeasure()), k=1, level=n)


def spreading_upsilon(nu, n, x_level=DEFAULT_X_LEVEL):
    """Spreading of a line carrying ``nu`` over the product ``R x [0, 1]`` at level ``n``."""
    return closure_composer(nu, CanonicalLabel((), nu), k=0, level=n, x_level=x_level)


def constraint_residual(bm, nu):
    """Largest per-block mismatch of source masses and moments against ``nu``."""
    part = split_points(bm.level)
    mass, mom = {}, {}
    for e in bm.entries:
        k = e.source[1]
        mass[k] = mass.get(k, 0) + e.law.mass
        mom[k] = mom.get(k, 0) + e.law.moment
    worst = 0.0
    for k, (lo, hi) in enumerate(part.blocks()):
        r = nu.restrict(lo, hi)
        worst = max(worst, abs(float(mass.get(k, 0) - r.mass)),
                    abs(float(mom.get(k, 0) - r.moment)))
    return worst


# -- G0 discretization --------------------------------------------------------------


def _bin_pieces(s, grid):
    """``[(j, p, q)]``: domain pieces of segment ``s`` with derivative in value bin ``j``."""
    if s.kind == "linear":
        return [(grid.index(s.slope), s.x0, s.x1)]
    if s.kind != "quantile":
        raise UnsupportedClassError("discretization needs the exact class")
    nu, off = s.measure, s.offset
    length = s.x1 - s.x0
    j0 = grid.index(nu.quantile_clamped(off))
    j1 = grid.index(nu.quantile_clamped(off + length))
    out = []
    for j in range(max(j0, 1), j1 + 1):
        blo, bhi = grid.bounds(j)
        sa = max(off, nu.cdf(blo))
        sb = min(off + length, nu.cdf(bhi))
        if sb > sa:
            out.append((j, s.x0 + (sa - off), s.x0 + (sb - off)))
    return out


def discretize_gms(g, N):
    """Map with finitely many derivative values: the bin barycenters of ``g'`` at width ``2^-N``."""
    grid = ValueBinGrid(N)
    slopes = {grid.index(t): t for t, _ in bin_discretize(kappa_full(g), grid).atoms}
    dom, img = {}, {}
    for s in g.segments:
        for j, p, q in _bin_pieces(s, grid):
            dom.setdefault(j, []).append((p, q))
            img.setdefault(j, []).append((s.value(p), s.value(q)))
    segs = []
    for j, pieces in dom.items():
        t = slopes[j]
        targets = sorted(img[j])
        src = sorted(pieces)
        # walk both concatenations in parallel, cutting at every boundary of either
        i_s = i_t = 0
        x, y = src[0][0], targets[0][0]
        while i_s < len(src) and i_t < len(targets):
            xr = src[i_s][1] - x
            yr = (targets[i_t][1] - y) / t
            step = min(xr, yr)
            if step > 0:
                segs.append(LinearSegment(x, x + step, y, y + t * step, t))
            x, y = x + step, y + t * step
            if xr <= yr:
                i_s += 1
                if i_s < len(src):
                    x = src[i_s][0]
            if yr <= xr:
                i_t += 1
                if i_t < len(targets):
                    y = targets[i_t][0]
    return PwMap(segs)
