"""Piecewise monotone bijections of [0, 1] with computable derivative laws.

A :class:`PwMap` is a list of increasing segments whose domains tile [0, 1]
in order and whose images tile [0, 1] in some order.  Three segment kinds
exist:

* :class:`LinearSegment` -- constant derivative, exact in rational arithmetic;
* :class:`QuantileSegment` -- ``y = y0 + int_s^{s+x-x0} G``, where ``G`` is
  the quantile function of a continuous :class:`RMeasure`; its derivative law
  is a restriction of that measure;
* :class:`NumericSegment` -- any smooth increasing map given by callables;
  derivative laws are produced by Gauss-Legendre sampling.

Linear and quantile segments are closed under composition with linear ones
(dilations of the base measure), so interval exchanges acting on either side
of an exact map keep it exact.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import PreconditionError, ValidationError
from .measure import RMeasure, add, _is_exact
from .quadrature import gauss_legendre

PARTITION_TOL = 1e-9
CONSISTENCY_TOL = 1e-12
NUMERIC_RESOLUTION = 256
_GL_X, _GL_W = gauss_legendre(8)


def _recip(c):
    return Fraction(1) / c if _is_exact(c) else 1.0 / c


# -- interval sets -------------------------------------------------------------


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of disjoint subintervals of [0, 1], kept sorted."""

    intervals: tuple = ()

    def __post_init__(self):
        iv = sorted((lo, hi) for lo, hi in self.intervals if hi > lo)
        merged = []
        for lo, hi in iv:
            if lo < 0 or hi > 1:
                raise ValidationError(f"interval ({lo}, {hi}) leaves [0, 1]")
            if merged and lo < merged[-1][1]:
                raise ValidationError(
                    f"intervals {merged[-1]} and {(lo, hi)} overlap"
                )
            if merged and lo == merged[-1][1]:
                merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def full(cls):
        return cls(((0, 1),))

    @classmethod
    def of(cls, lo, hi):
        return cls(((lo, hi),))

    @classmethod
    def dyadic(cls, level, k):
        w = Fraction(1, 2 ** level)
        return cls(((k * w, (k + 1) * w),))

    @property
    def measure(self):
        return sum((hi - lo for lo, hi in self.intervals), 0)

    def intersect_interval(self, lo, hi):
        out = []
        for a, b in self.intervals:
            na, nb = max(a, lo), min(b, hi)
            if nb > na:
                out.append((na, nb))
        return out

    def intersect(self, other):
        out = []
        for lo, hi in other.intervals:
            out.extend(self.intersect_interval(lo, hi))
        return IntervalSet(tuple(out))


def dyadic_partition(level):
    return [IntervalSet.dyadic(level, k) for k in range(2 ** level)]


# -- segments -----------------------------------------------------------------


@dataclass(frozen=True)
class LinearSegment:
    x0: object
    x1: object
    y0: object
    y1: object
    slope: object

    kind = "linear"
    exact = True

    def check(self):
        if not self.slope > 0:
            raise ValidationError(f"linear slope {self.slope} is not positive")
        err = abs((self.y1 - self.y0) - self.slope * (self.x1 - self.x0))
        if err > CONSISTENCY_TOL:
            raise ValidationError(
                f"linear segment image length inconsistent by {float(err):.3g}"
            )

    def value(self, x):
        return self.y0 + self.slope * (x - self.x0)

    def values(self, xs):
        return float(self.y0) + float(self.slope) * (np.asarray(xs) - float(self.x0))

    def deriv(self, x):
        return self.slope

    def derivs(self, xs):
        return np.full(np.shape(xs), float(self.slope))

    def preimage(self, y):
        return self.x0 + (y - self.y0) / self.slope

    def preimages(self, ys):
        return float(self.x0) + (np.asarray(ys) - float(self.y0)) / float(self.slope)

    def restrict(self, p, q, yp=None, yq=None):
        yp = self.value(p) if yp is None else yp
        yq = self.value(q) if yq is None else yq
        return LinearSegment(p, q, yp, yq, self.slope)

    def law(self, p, q):
        return RMeasure.atom(self.slope, q - p)

    def form_dict(self):
        return {"linear": {"slope": self.slope}}


@dataclass(frozen=True)
class QuantileSegment:
    """``y = y0 + int_{s0}^{s0 + x - x0} G(z) dz`` with ``G`` the quantile of ``measure``."""

    x0: object
    x1: object
    y0: object
    y1: object
    measure: RMeasure
    offset: object = 0
    offset_end: object = None

    kind = "quantile"
    exact = True

    def check(self):
        if not self.measure.is_continuous:
            raise ValidationError("quantile segment needs an atomless base measure")
        if self.offset < 0 or self.s_end > self.measure.mass + CONSISTENCY_TOL:
            raise ValidationError("quantile segment slice exceeds its base measure")
        if abs(self.s_end - self.offset - (self.x1 - self.x0)) > CONSISTENCY_TOL:
            raise ValidationError("quantile segment offsets disagree with its length")
        err = abs((self.y1 - self.y0) - (self._pm(self.s_end) - self._base))
        if err > CONSISTENCY_TOL:
            raise ValidationError(
                f"quantile segment image length inconsistent by {float(err):.3g}"
            )

    @cached_property
    def s_end(self):
        if self.offset_end is not None:
            return self.offset_end
        return self.offset + (self.x1 - self.x0)

    def _s(self, x):
        """Quantile level at ``x``; endpoints use the stored offsets to avoid drift."""
        if x == self.x0:
            return self.offset
        if x == self.x1:
            return self.s_end
        return self.offset + (x - self.x0)

    def _G(self, s):
        if s <= 0:
            return 0
        return self.measure.quantile_clamped(s)

    def _pm(self, s):
        """``int_0^s G``; equals the partial moment up to ``G(s)``."""
        if s >= self.measure.mass:
            return self.measure.moment
        return self.measure.partial_moment(self._G(s))

    @cached_property
    def _base(self):
        return self._pm(self.offset)

    @cached_property
    def _tmeasure(self):
        return self.measure.t_weight()

    def value(self, x):
        return self.y0 + self._pm(self._s(x)) - self._base

    def values(self, xs):
        s = float(self.offset) + np.asarray(xs, dtype=float) - float(self.x0)
        G = self.measure.quantile_array(s)
        pm = self.measure.partial_moment_array(G)
        pm = np.where(s >= float(self.measure.mass), float(self.measure.moment), pm)
        return float(self.y0) + pm - float(self._base)

    def deriv(self, x):
        return self._G(self._s(x))

    def derivs(self, xs):
        s = float(self.offset) + np.asarray(xs, dtype=float) - float(self.x0)
        return self.measure.quantile_array(s)

    def preimage(self, y):
        target = self._base + (y - self.y0)
        if target <= 0:
            return self.x0 - self.offset
        if target >= self.measure.moment:
            return self.x0 + self.measure.mass - self.offset
        ystar = self._tmeasure.quantile_clamped(target)
        return self.x0 + self.measure.cdf(ystar) - self.offset

    def preimages(self, ys):
        target = float(self._base) + np.asarray(ys, dtype=float) - float(self.y0)
        ystar = self._tmeasure.quantile_array(np.clip(target, 0, None))
        return float(self.x0) + self.measure.cdf_array(ystar) - float(self.offset)

    def restrict(self, p, q, yp=None, yq=None):
        yp = self.value(p) if yp is None else yp
        yq = self.value(q) if yq is None else yq
        return QuantileSegment(p, q, yp, yq, self.measure, self._s(p), self._s(q))

    def law(self, p, q):
        s1, s2 = self._s(p), self._s(q)
        lo = 0 if s1 <= 0 else self._G(s1)
        hi = math.inf if s2 >= self.measure.mass else self._G(s2)
        return self.measure.restrict(lo, hi)

    def form_dict(self):
        form = {"measure": self.measure.to_dict(), "offset": self.offset}
        if self.offset_end is not None:
            form["offset_end"] = self.offset_end
        return {"quantile": form}


@dataclass(frozen=True)
class NumericSegment:
    """Smooth increasing segment given by vectorized callables on absolute coordinates."""

    x0: float
    x1: float
    y0: float
    y1: float
    fwd: Callable = field(repr=False)
    der: Callable = field(repr=False)
    inv: Callable | None = field(default=None, repr=False)
    resolution: int = NUMERIC_RESOLUTION

    kind = "numeric"
    exact = False

    def check(self):
        ends = self.fwd(np.array([float(self.x0), float(self.x1)]))
        err = max(abs(ends[0] - float(self.y0)), abs(ends[1] - float(self.y1)))
        if err > 1e-9:
            raise ValidationError(f"numeric segment endpoints inconsistent by {err:.3g}")

    def value(self, x):
        return float(self.fwd(np.array([float(x)]))[0])

    def values(self, xs):
        return self.fwd(np.asarray(xs, dtype=float))

    def deriv(self, x):
        return float(self.der(np.array([float(x)]))[0])

    def derivs(self, xs):
        return self.der(np.asarray(xs, dtype=float))

    def preimages(self, ys):
        ys = np.asarray(ys, dtype=float)
        if self.inv is not None:
            return self.inv(ys)
        a = np.full(ys.shape, float(self.x0))
        b = np.full(ys.shape, float(self.x1))
        for _ in range(60):
            m = 0.5 * (a + b)
            left = self.fwd(m) < ys
            a = np.where(left, m, a)
            b = np.where(left, b, m)
        return 0.5 * (a + b)

    def preimage(self, y):
        return float(self.preimages(np.array([float(y)]))[0])

    def restrict(self, p, q, yp=None, yq=None):
        yp = self.value(p) if yp is None else yp
        yq = self.value(q) if yq is None else yq
        return NumericSegment(p, q, yp, yq, self.fwd, self.der, self.inv, self.resolution)

    def law(self, p, q):
        p, q = float(p), float(q)
        # cells sit on a global grid so kinks at grid points never fall inside a cell
        r = self.resolution
        inner = np.arange(math.floor(p * r) + 1, math.ceil(q * r)) / r
        edges = np.concatenate([[p], inner[(inner > p) & (inner < q)], [q]])
        edges = _grade_near_zeros(edges, self.derivs(edges))
        h = np.diff(edges)
        nodes = (edges[:-1, None] + h[:, None] * _GL_X[None, :]).ravel()
        w = (h[:, None] * _GL_W[None, :]).ravel()
        d = self.derivs(nodes)
        keep = d > 0
        return RMeasure(atoms=tuple(zip(d[keep].tolist(), w[keep].tolist())))

    def form_dict(self):
        raise ValidationError("numeric segments have no JSON representation")


def _grade_near_zeros(edges, d, rel=1e-3, depth=40):
    """Refine geometrically toward edges where the derivative almost vanishes.

    Near a zero ``g'^z`` behaves like a fractional power of the distance,
    which a fixed Gauss rule resolves poorly; halving cells toward the zero
    restores fast convergence.
    """
    small = d < rel * max(float(np.max(d)), 1e-300)
    if not small.any():
        return edges
    out = [edges[0]]
    ratios = 2.0 ** -np.arange(depth, 0, -1)
    for i in range(len(edges) - 1):
        a, b = edges[i], edges[i + 1]
        w = b - a
        left, right = small[i], small[i + 1]
        if left and right:
            mid = a + w / 2
            out.extend(a + (w / 2) * ratios)
            out.append(mid)
            out.extend((b - (w / 2) * ratios)[::-1])
        elif left:
            out.extend(a + w * ratios)
        elif right:
            out.extend((b - w * ratios)[::-1])
        out.append(b)
    return np.unique(np.array(out))


# -- maps -----------------------------------------------------------------------


class PwMap:
    """An a.e. bijection of [0, 1] made of increasing segments."""

    def __init__(self, segments, check=True):
        segs = [s for s in segments if s.x1 > s.x0]
        segs.sort(key=lambda s: s.x0)
        self.segments = tuple(segs)
        self._x1 = [s.x1 for s in segs]
        self._x1f = np.array([float(x) for x in self._x1])
        if check:
            self.validate()

    def validate(self):
        segs = self.segments
        if not segs:
            raise ValidationError("map has no segments")
        _check_tiling([(s.x0, s.x1) for s in segs], "domain")
        _check_tiling([(s.y0, s.y1) for s in segs], "image")
        for s in segs:
            s.check()

    @property
    def is_exact(self):
        return all(s.exact for s in self.segments)

    @property
    def breakpoints(self):
        return [s.x0 for s in self.segments[1:]]

    def segment_at(self, x):
        """Segment containing x, using the left-continuous convention at breakpoints."""
        i = bisect.bisect_left(self._x1, x)
        return self.segments[min(i, len(self.segments) - 1)]

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        return f"PwMap({list(self.segments)!r})"

    def to_dict(self):
        out = []
        for s in self.segments:
            out.append({
                "dom": [_enc(s.x0), _enc(s.x1)],
                "img": [_enc(s.y0), _enc(s.y1)],
                "form": _enc_form(s.form_dict()),
            })
        return {"segments": out}

    @classmethod
    def from_dict(cls, d):
        from .measure import _dec
        segs = []
        for item in d["segments"]:
            x0, x1 = (_dec(v) for v in item["dom"])
            y0, y1 = (_dec(v) for v in item["img"])
            form = item["form"]
            if "linear" in form:
                segs.append(LinearSegment(x0, x1, y0, y1, _dec(form["linear"]["slope"])))
            elif "quantile" in form:
                q = form["quantile"]
                segs.append(QuantileSegment(
                    x0, x1, y0, y1, RMeasure.from_dict(q["measure"]), _dec(q.get("offset", 0)),
                    _dec(q["offset_end"]) if "offset_end" in q else None,
                ))
            else:
                raise ValidationError(f"unknown segment form {sorted(form)}")
        return cls(segs)


def _enc(x):
    from .measure import _enc as enc
    return enc(x)


def _enc_form(form):
    if "linear" in form:
        return {"linear": {"slope": _enc(form["linear"]["slope"])}}
    q = form["quantile"]
    out = {"measure": q["measure"], "offset": _enc(q["offset"])}
    if "offset_end" in q:
        out["offset_end"] = _enc(q["offset_end"])
    return {"quantile": out}


def _check_tiling(spans, what):
    order = sorted(range(len(spans)), key=lambda i: spans[i][0])
    prev_end = 0
    prev = None
    for i in order:
        lo, hi = spans[i]
        if lo < prev_end - PARTITION_TOL:
            raise ValidationError(
                f"{what} intervals of segments {prev} and {i} overlap: "
                f"{spans[prev]} vs {spans[i]}"
            )
        if lo > prev_end + PARTITION_TOL:
            raise ValidationError(
                f"{what} has a gap between {float(prev_end)} and {float(lo)}"
            )
        prev_end, prev = hi, i
    if abs(prev_end - 1) > PARTITION_TOL or abs(spans[order[0]][0]) > PARTITION_TOL:
        raise ValidationError(f"{what} intervals do not cover [0, 1]")


def identity_map():
    return PwMap([LinearSegment(0, 1, 0, 1, 1)])


def evaluate(g, x):
    if x < 0 or x > 1:
        raise PreconditionError(f"point {x} outside [0, 1]")
    return g.segment_at(x).value(x)


def derivative(g, x):
    if x < 0 or x > 1:
        raise PreconditionError(f"point {x} outside [0, 1]")
    return g.segment_at(x).deriv(x)


def _segment_index(g, xs):
    idx = np.searchsorted(g._x1f, xs, side="left")
    return np.minimum(idx, len(g.segments) - 1)


def evaluate_array(g, xs):
    xs = np.asarray(xs, dtype=float)
    out = np.empty_like(xs)
    idx = _segment_index(g, xs)
    for i in np.unique(idx):
        sel = idx == i
        out[sel] = g.segments[i].values(xs[sel])
    return out


def derivative_array(g, xs):
    xs = np.asarray(xs, dtype=float)
    out = np.empty_like(xs)
    idx = _segment_index(g, xs)
    for i in np.unique(idx):
        sel = idx == i
        out[sel] = g.segments[i].derivs(xs[sel])
    return out


# -- group operations -------------------------------------------------------------


def _invert_segment(s):
    if s.kind == "linear":
        return LinearSegment(s.y0, s.y1, s.x0, s.x1, _recip(s.slope))

    def der(ys, s=s):
        return 1.0 / s.derivs(s.preimages(ys))

    return NumericSegment(
        float(s.y0), float(s.y1), float(s.x0), float(s.x1),
        fwd=s.preimages, der=der, inv=s.values,
        resolution=getattr(s, "resolution", NUMERIC_RESOLUTION),
    )


def invert(g):
    return PwMap([_invert_segment(s) for s in g.segments])


def _compose_segments(gp, hp):
    """``gp o hp`` for segments with ``hp``'s image equal to ``gp``'s domain."""
    x0, x1, y0, y1 = hp.x0, hp.x1, gp.y0, gp.y1
    if gp.kind == "linear" and hp.kind == "linear":
        return LinearSegment(x0, x1, y0, y1, gp.slope * hp.slope)
    if gp.kind == "linear" and hp.kind == "quantile":
        return QuantileSegment(x0, x1, y0, y1, hp.measure.dilate(gp.slope),
                               hp.offset, hp.s_end)
    if gp.kind == "quantile" and hp.kind == "linear":
        c = hp.slope
        if c == 1:
            return QuantileSegment(x0, x1, y0, y1, gp.measure, gp.offset, gp.s_end)
        measure = gp.measure.dilate(c).scale(_recip(c))
        r = _recip(c)
        return QuantileSegment(x0, x1, y0, y1, measure, gp.offset * r, gp.s_end * r)

    def fwd(xs, gp=gp, hp=hp):
        return gp.values(hp.values(xs))

    def der(xs, gp=gp, hp=hp):
        return gp.derivs(hp.values(xs)) * hp.derivs(xs)

    def inv(ys, gp=gp, hp=hp):
        return hp.preimages(gp.preimages(ys))

    res = max(getattr(gp, "resolution", NUMERIC_RESOLUTION),
              getattr(hp, "resolution", NUMERIC_RESOLUTION))
    return NumericSegment(float(x0), float(x1), float(y0), float(y1), fwd, der, inv, res)


def compose(g, h):
    """The map ``x -> g(h(x))``."""
    gcuts = [s.x0 for s in g.segments[1:]]
    out = []
    for hs in h.segments:
        lo_i = bisect.bisect_right(gcuts, hs.y0)
        hi_i = bisect.bisect_left(gcuts, hs.y1)
        inner = gcuts[lo_i:hi_i]
        xs = [hs.x0] + [hs.preimage(c) for c in inner] + [hs.x1]
        ys = [hs.y0] + inner + [hs.y1]
        for k in range(len(xs) - 1):
            p, q = xs[k], xs[k + 1]
            if not q > p:
                continue
            hp = hs.restrict(p, q, ys[k], ys[k + 1])
            gs = g.segments[lo_i + k]
            gp = gs.restrict(ys[k], ys[k + 1])
            out.append(_compose_segments(gp, hp))
    return PwMap(out)


def sup_distance(g, h, n=4097):
    xs = np.linspace(0.0, 1.0, n)
    extra = [float(x) for x in g.breakpoints + h.breakpoints]
    xs = np.union1d(xs, np.array(extra, dtype=float))
    return float(np.max(np.abs(evaluate_array(g, xs) - evaluate_array(h, xs))))


# -- derivative distributions ----------------------------------------------------


def _segment_pieces(s, A, B):
    """Domain subintervals of segment ``s`` lying in ``A`` and mapped into ``B``."""
    out = []
    for blo, bhi in B.intervals:
        lo, hi = max(blo, s.y0), min(bhi, s.y1)
        if not hi > lo:
            continue
        p = s.x0 if lo == s.y0 else s.preimage(lo)
        q = s.x1 if hi == s.y1 else s.preimage(hi)
        for a, b in A.intersect_interval(p, q):
            out.append((a, b))
    return out


def rn_distribution(g, A=None, B=None):
    """Law of ``g'`` under Lebesgue measure on ``A`` intersected with ``g^{-1}(B)``."""
    A = A or IntervalSet.full()
    B = B or IntervalSet.full()
    laws = []
    for s in g.segments:
        dom = A.intersect_interval(s.x0, s.x1)
        if not dom:
            continue
        for p, q in _segment_pieces(s, IntervalSet(tuple(dom)), B):
            laws.append(s.law(p, q))
    return add(*laws)


def kappa_full(g):
    """``rn_distribution(g, M, M)``: the law of the derivative on all of [0, 1]."""
    return add(*(s.law(s.x0, s.x1) for s in g.segments))


def cell_laws(g, cuts):
    """Derivative laws for the interval partition with inner cut points ``cuts``.

    Returns ``{(alpha, beta): RMeasure}`` where cell ``alpha`` is
    ``[cuts[alpha-1], cuts[alpha]]``; only nonzero entries are present.
    """
    cuts = list(cuts)
    acc = {}
    for s in g.segments:
        inner = [c for c in cuts if s.x0 < c < s.x1]
        ycuts = [c for c in cuts if s.y0 < c < s.y1]
        pts = sorted(set([s.x0, s.x1] + inner + [s.preimage(c) for c in ycuts]))
        for p, q in zip(pts[:-1], pts[1:]):
            if not q > p:
                continue
            xm = (p + q) / 2
            alpha = bisect.bisect_right(cuts, xm)
            ym = (s.value(p) + s.value(q)) / 2
            beta = bisect.bisect_right(cuts, ym)
            acc.setdefault((alpha, beta), []).append(s.law(p, q))
    return {k: add(*v) for k, v in acc.items()}


@dataclass
class DistributionMatrix:
    """Partition-indexed matrix of derivative laws ``kappa[g; M^a, M^b]``."""

    size: int
    entries: dict
    cell_measures: tuple = ()

    def __getitem__(self, key):
        return self.entries.get(key, RMeasure())

    def row_masses(self):
        out = [0] * self.size
        for (a, _), nu in self.entries.items():
            out[a] += nu.mass
        return out

    def column_moments(self):
        out = [0] * self.size
        for (_, b), nu in self.entries.items():
            out[b] += nu.moment
        return out

    def constraint_residual(self):
        """Largest violation of the row-mass / column-moment identities."""
        r = [abs(m - c) for m, c in zip(self.row_masses(), self.cell_measures)]
        c = [abs(m - c) for m, c in zip(self.column_moments(), self.cell_measures)]
        return float(max(r + c, default=0))


def _validate_partition(partition):
    spans = []
    for i, part in enumerate(partition):
        for lo, hi in part.intervals:
            spans.append((lo, hi, i))
    spans.sort()
    pos = 0
    for lo, hi, i in spans:
        if lo < pos - PARTITION_TOL:
            raise ValidationError(f"partition member {i} overlaps its predecessor at {lo}")
        if lo > pos + PARTITION_TOL:
            raise ValidationError(f"partition leaves a gap before {lo}")
        pos = hi
    if abs(pos - 1) > PARTITION_TOL:
        raise ValidationError("partition does not cover [0, 1]")
    return spans


def distribution_matrix(g, partition):
    spans = _validate_partition(partition)
    cuts = [lo for lo, _, _ in spans[1:]]
    label = [i for _, _, i in spans]
    raw = cell_laws(g, cuts)
    acc = {}
    for (a, b), nu in raw.items():
        acc.setdefault((label[a], label[b]), []).append(nu)
    entries = {k: add(*v) for k, v in acc.items()}
    return DistributionMatrix(len(partition), entries, tuple(p.measure for p in partition))


# -- the convex section and measure-preserving maps --------------------------------


def convex_section(nu, tol=1e-10):
    """The unique convex ``psi`` with ``psi(0)=0``, ``psi(1)=1`` and derivative law ``nu``."""
    dm, dmo = nu.mass - 1, nu.moment - 1
    if abs(dm) > tol or abs(dmo) > tol:
        raise PreconditionError(
            "convex section needs mass 1 and first moment 1",
            residuals={"mass": float(dm), "moment": float(dmo)},
        )
    pts, F, dens, atom_mass = nu._grid
    segs = []
    run = []
    s = y = 0

    def flush():
        nonlocal s, y, run
        if run:
            base = RMeasure(pieces=tuple(run))
            s1, y1 = s + base.mass, y + base.moment
            segs.append(QuantileSegment(s, s1, y, y1, base, 0))
            s, y = s1, y1
            run = []

    for i in range(1, len(pts)):
        if dens[i]:
            run.append((pts[i - 1], pts[i], dens[i]))
        m = atom_mass.get(pts[i], 0)
        if m:
            flush()
            t = pts[i]
            segs.append(LinearSegment(s, s + m, y, y + t * m, t))
            s, y = s + m, y + t * m
    flush()
    return PwMap(segs)


def interval_exchange(lengths, order):
    """Slope-one map sending the i-th domain block to position ``order[i]`` in the image."""
    n = len(lengths)
    if sorted(order) != list(range(n)):
        raise ValidationError("order must be a permutation")
    img_pos = [None] * n
    inv = sorted(range(n), key=lambda i: order[i])
    y = 0
    for i in inv:
        img_pos[i] = y
        y += lengths[i]
    segs = []
    x = 0
    for i in range(n):
        segs.append(LinearSegment(x, x + lengths[i], img_pos[i], img_pos[i] + lengths[i], 1))
        x += lengths[i]
    return PwMap(segs)


def random_interval_exchange(seed, n_pieces):
    if n_pieces < 1:
        raise PreconditionError("need at least one piece")
    rng = random.Random(seed)
    w = [rng.randint(1, 64) for _ in range(n_pieces)]
    tot = sum(w)
    lengths = [Fraction(x, tot) for x in w]
    order = list(range(n_pieces))
    rng.shuffle(order)
    return interval_exchange(lengths, order)


def is_measure_preserving(g):
    k = kappa_full(g)
    return (not k.pieces and len(k.atoms) == 1 and k.atoms[0][0] == 1
            and abs(k.atoms[0][1] - 1) <= 1e-12)
