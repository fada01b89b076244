"""The weak topology on measure-class-preserving maps and its operator picture.

``gms_distance`` compares the matrices of derivative laws of two maps over
the dyadic partitions of levels ``1..depth``.  ``operator_apply`` realises
``T_{1/p+is}(g) f = f(g) g'^{1/p+is}``, an isometry of ``L^p``; its matrix
elements between indicator functions are characteristic-function values of
the derivative laws, which gives two independent ways to compute them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fixtures
from .errors import PreconditionError
from .measure import DEFAULT_GRID, RMeasure, StripGrid, measure_distance
from .quadrature import integrate
from .transform import (
    IntervalSet,
    _segment_pieces,
    cell_laws,
    derivative_array,
    evaluate_array,
    identity_map,
    is_measure_preserving,
    kappa_full,
    rn_distribution,
)

DEFAULT_GRID_N = 2 ** 16


@dataclass(frozen=True)
class GridFunction:
    """Values at the midpoints of the uniform ``n``-grid on [0, 1]."""

    values: np.ndarray
    p: float = 2.0

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size < 2:
            raise PreconditionError("grid functions need at least two samples")
        if not np.all(np.isfinite(v)):
            raise PreconditionError("grid function values must be finite")
        if not self.p >= 1:
            raise PreconditionError(f"exponent p={self.p} must be >= 1")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.size

    @staticmethod
    def midpoints(n):
        return (np.arange(n) + 0.5) / n

    @classmethod
    def from_callable(cls, f, n=DEFAULT_GRID_N, p=2.0):
        return cls(np.asarray(f(cls.midpoints(n))), p)

    def at(self, y):
        """Linear interpolation between midpoints, constant beyond the end ones."""
        xs = self.midpoints(self.n)
        v = self.values
        if np.iscomplexobj(v):
            return np.interp(y, xs, v.real) + 1j * np.interp(y, xs, v.imag)
        return np.interp(y, xs, v)


@dataclass(frozen=True)
class GmsMetricConfig:
    depth: int = 6
    grid: StripGrid = field(default_factory=lambda: DEFAULT_GRID)

    def __post_init__(self):
        if self.depth < 1:
            raise PreconditionError("metric depth must be >= 1")


def dyadic_cuts(level):
    m = 2 ** level
    from fractions import Fraction
    return [Fraction(k, m) for k in range(1, m)]


def partition_matrix(g, level):
    """``{(alpha, beta): law}`` over the dyadic partition with ``2**level`` cells."""
    return cell_laws(g, dyadic_cuts(level))


def gms_distance(g, h, cfg=None):
    cfg = cfg or GmsMetricConfig()
    total = 0.0
    for n in range(1, cfg.depth + 1):
        sg, sh = partition_matrix(g, n), partition_matrix(h, n)
        level = 0.0
        for key in set(sg) | set(sh):
            level += measure_distance(sg.get(key, RMeasure()), sh.get(key, RMeasure()), cfg.grid)
        total += 2.0 ** -n * level
    return total


# -- operators -------------------------------------------------------------------


def _power(d, z):
    d = np.asarray(d, dtype=float)
    out = np.zeros(d.shape, dtype=complex)
    pos = d > 0
    out[pos] = np.exp(z * np.log(d[pos]))
    return out


def operator_apply(g, f, p=None, s=0.0):
    """``x -> f(g(x)) g'(x)^{1/p + i s}`` at the grid midpoints."""
    p = f.p if p is None else p
    if not p >= 1 or math.isinf(p):
        raise PreconditionError("p must be finite and >= 1")
    xs = GridFunction.midpoints(f.n)
    w = _power(derivative_array(g, xs), 1.0 / p + 1j * s)
    out = f.at(evaluate_array(g, xs)) * w
    if s == 0 and not np.iscomplexobj(f.values):
        out = out.real
    return GridFunction(out, p)


def lp_norm(f, p=None):
    p = f.p if p is None else p
    return float(np.mean(np.abs(f.values) ** p) ** (1.0 / p))


def isometry_defect(g, f, p, s):
    return abs(lp_norm(operator_apply(g, f, p, s), p) - lp_norm(f, p))


def _quadrature_element(g, A, B, z, n):
    total = 0j
    for seg in g.segments:
        dom = A.intersect_interval(seg.x0, seg.x1)
        if not dom:
            continue
        for p, q in _segment_pieces(seg, IntervalSet(tuple(dom)), B):
            p, q = float(p), float(q)
            cells = max(1, math.ceil((q - p) * n))
            h = (q - p) / cells
            xs = p + h * (np.arange(cells) + 0.5)
            total += h * np.sum(_power(seg.derivs(xs), z))
    return complex(total)


def matrix_element(g, A, B, p, s=0.0, method="char", n=DEFAULT_GRID_N):
    """``<T_{1/p+is}(g) 1_A, 1_B> = int t^{1/p+is} d kappa[g; A, B]``.

    ``method="char"`` evaluates the characteristic function of the derivative
    law; ``method="quadrature"`` sums ``g'^{1/p+is}`` over a midpoint grid on
    ``A`` intersected with ``g^{-1}(B)``.
    """
    z = 1.0 / p + 1j * s
    if method == "char":
        law = rn_distribution(g, A, B)
        return 0j if law.is_zero else law.char(z)
    if method == "quadrature":
        return _quadrature_element(g, A, B, z, n)
    raise PreconditionError(f"unknown method {method!r}")


def _law_integral(law, fn):
    """``int fn(t) d law`` with atoms summed and pieces integrated adaptively."""
    total = 0.0
    if law.atoms:
        t = np.array([float(t) for t, _ in law.atoms])
        m = np.array([float(m) for _, m in law.atoms])
        total += float(np.dot(fn(t), m))
    for a, b, c in law.pieces:
        cf = np.array([float(x) for x in c])

        def f(t, cf=cf):
            return (np.polynomial.polynomial.polyval(t, cf) * fn(t))[:, None]

        total += float(integrate(f, [float(a)], [float(b)], tol=1e-12)[0])
    return total


def strong_defect(g, p=1.0):
    """``||T_{1/p}(g) 1 - 1||_p`` computed from the derivative law."""
    law = kappa_full(g)
    return _law_integral(law, lambda t: np.abs(t ** (1.0 / p) - 1) ** p) ** (1.0 / p)


# -- demos -------------------------------------------------------------------------


def _dyadic_sets(level):
    m = 2 ** level
    return [IntervalSet.dyadic(level, k) for k in range(m)]


def weak_not_strong_demo(j_max, level=3, cfg=None):
    """Oscillating maps: matrix elements converge while the strong defect stays at 2/pi."""
    if j_max < 1:
        raise PreconditionError("j_max must be >= 1")
    cfg = cfg or GmsMetricConfig()
    ident = identity_map()
    sets = _dyadic_sets(level)
    rows = []
    j = 1
    while j <= j_max:
        g = fixtures.oscillation(j)
        err = 0.0
        for A in sets:
            for B in sets:
                me = matrix_element(g, A, B, 1, 0.0)
                err = max(err, abs(me - float(A.intersect(B).measure)))
        rows.append({
            "j": j,
            "matrix_element_error": err,
            "strong_defect_L1": strong_defect(g, 1.0),
            "gms_distance_to_identity": gms_distance(g, ident, cfg),
        })
        j *= 2
    return rows


def oscillation_lower_bound():
    """``(1 - 2 sqrt(2) / pi) / 2``: the level-1 gap at ``z = 1/2`` shared by every ``g_j``."""
    return 0.5 * (1 - 2 * math.sqrt(2) / math.pi)


def doubling_target(f):
    """``Rf(x) = f(2x mod 1)`` on the grid of ``f``."""
    xs = GridFunction.midpoints(f.n)
    return GridFunction(f.at(np.mod(2 * xs, 1.0)), f.p)


def doubling_closure_demo(n_max, f, p=None):
    """Block exchanges ``g_n`` whose operators approach the non-invertible ``R``."""
    p = f.p if p is None else p
    Rf = doubling_target(f)
    xs = GridFunction.midpoints(2 ** 12)
    rows = []
    for n in range(1, n_max + 1):
        g = fixtures.doubling(n)
        Tf = operator_apply(g, f, p, 0.0)
        diff = GridFunction(Tf.values - Rf.values, p)
        sup = float(np.max(np.abs(evaluate_array(g, xs) - np.mod(2 * xs, 1.0))))
        rows.append({
            "n": n,
            "norm_T_minus_R": lp_norm(diff, p),
            "sup_map_gap": sup,
            "measure_preserving": is_measure_preserving(g),
        })
    return rows
