"""Finite measures on the positive half-line.

An :class:`RMeasure` is a finite sum of point masses and piecewise-polynomial
densities.  The class is closed under restriction to value intervals, sums,
nonnegative scaling, multiplication by ``t`` and dilations ``t -> c t``, and
its mass and first moment are available in closed form.  Numbers are kept as
given: ``Fraction`` inputs stay exact through every linear operation.

The pair (mass, first moment) is what the weak topology on these measures
controls, and :func:`measure_distance` compares two measures through their
Mellin-type characteristic functions ``z -> int t**z dnu`` on a grid in the
strip ``0 <= Re z <= 1``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from . import quadrature
from .errors import ConfigurationError, PreconditionError, ValidationError

MAX_DEGREE = 4
# t_weight may lift a measure one degree above the input limit
_HARD_DEGREE = MAX_DEGREE + 1
QUAD_TOL = 1e-10


def _is_exact(x):
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _strip(coeffs):
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def poly_eval(coeffs, t):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _antideriv(coeffs, t):
    """Value at ``t`` of the antiderivative vanishing at 0."""
    acc = 0
    for k in range(len(coeffs) - 1, -1, -1):
        acc = acc * t + _div(coeffs[k], k + 1)
    return acc * t


def _div(c, n):
    if _is_exact(c):
        return Fraction(c, 1) / n
    return c / n


def _shift_up(coeffs):
    return (0,) + tuple(coeffs)


def _cheb_points(a, b, k=7):
    j = np.arange(k)
    x = np.cos((2 * j + 1) * np.pi / (2 * k))
    return 0.5 * (float(a) + float(b)) + 0.5 * (float(b) - float(a)) * x


def _piece_mass(p):
    a, b, c = p
    return _antideriv(c, b) - _antideriv(c, a)


def _piece_moment(p):
    a, b, c = p
    c1 = _shift_up(c)
    return _antideriv(c1, b) - _antideriv(c1, a)


def _merge_atoms(atoms):
    acc = {}
    for t, m in atoms:
        acc[t] = acc.get(t, 0) + m
    return tuple(sorted((t, m) for t, m in acc.items() if m != 0))


def _add_coeffs(c1, c2):
    n = max(len(c1), len(c2))
    out = [0] * n
    for i, c in enumerate(c1):
        out[i] += c
    for i, c in enumerate(c2):
        out[i] = out[i] + c
    return _strip(out)


def _normalize_pieces(pieces):
    """Sum overlapping pieces into disjoint ones and merge equal neighbours."""
    pieces = [(a, b, _strip(c)) for a, b, c in pieces if b > a]
    pieces = [p for p in pieces if p[2]]
    if not pieces:
        return ()
    pieces.sort(key=lambda p: (p[0], p[1]))
    disjoint = all(pieces[i][1] <= pieces[i + 1][0] for i in range(len(pieces) - 1))
    if not disjoint:
        cuts = sorted({p[0] for p in pieces} | {p[1] for p in pieces})
        starts = [p[0] for p in pieces]
        out = []
        active = []
        nxt = 0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            while nxt < len(pieces) and starts[nxt] <= lo:
                active.append(pieces[nxt])
                nxt += 1
            active = [p for p in active if p[1] > lo]
            coeffs = ()
            for p in active:
                coeffs = _add_coeffs(coeffs, p[2])
            if coeffs:
                out.append((lo, hi, coeffs))
        pieces = out
        if not pieces:
            return ()
    merged = [pieces[0]]
    for a, b, c in pieces[1:]:
        pa, pb, pc = merged[-1]
        if pb == a and pc == c:
            merged[-1] = (pa, b, c)
        else:
            merged.append((a, b, c))
    return tuple(merged)


@dataclass(frozen=True)
class RMeasure:
    """Atoms ``(t, mass)`` plus density pieces ``(a, b, coeffs)`` on (a, b].

    ``coeffs`` are monomial coefficients in ``t`` (ascending powers).
    """

    atoms: tuple = ()
    pieces: tuple = ()
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        atoms = _merge_atoms((t, m) for t, m in self.atoms)
        pieces = _normalize_pieces(self.pieces)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "pieces", pieces)
        for t, m in atoms:
            if not t > 0:
                raise ValidationError(f"atom location {t} is not positive")
            if m < 0:
                raise ValidationError(f"atom at {t} has negative mass {m}")
        for a, b, c in pieces:
            if a < 0:
                raise ValidationError(f"density piece ({a}, {b}] leaves (0, inf)")
            if not math.isfinite(float(b)):
                raise ValidationError("density pieces must be bounded")
            if len(c) - 1 > _HARD_DEGREE:
                raise ConfigurationError(
                    f"density degree {len(c) - 1} exceeds {_HARD_DEGREE}"
                )
            vals = np.array([float(poly_eval(c, x)) for x in _cheb_points(a, b)])
            scale = max(1.0, float(np.max(np.abs(vals))))
            if np.min(vals) < -1e-12 * scale:
                raise ValidationError(f"density negative on ({a}, {b}]")

    # -- constructors -------------------------------------------------------

    @classmethod
    def _trusted(cls, atoms=(), pieces=(), normalize=False):
        """Build without validation from parts known to form a valid measure."""
        obj = object.__new__(cls)
        if normalize:
            atoms = _merge_atoms(atoms)
            pieces = _normalize_pieces(pieces)
        object.__setattr__(obj, "atoms", tuple(atoms))
        object.__setattr__(obj, "pieces", tuple(pieces))
        object.__setattr__(obj, "_cache", {})
        return obj

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def atom(cls, t, mass=1):
        return cls(atoms=((t, mass),))

    @classmethod
    def uniform(cls, a, b, total=1):
        """Constant density on (a, b] with the given total mass."""
        if _is_exact(a) and _is_exact(b) and _is_exact(total):
            dens = Fraction(total) / (Fraction(b) - Fraction(a))
        else:
            dens = total / (b - a)
        return cls(pieces=((a, b, (dens,)),))

    # -- closed-form functionals -------------------------------------------

    @cached_property
    def mass(self):
        return sum((m for _, m in self.atoms), 0) + sum(
            (_piece_mass(p) for p in self.pieces), 0
        )

    @cached_property
    def moment(self):
        return sum((t * m for t, m in self.atoms), 0) + sum(
            (_piece_moment(p) for p in self.pieces), 0
        )

    @property
    def degree(self):
        return max((len(c) - 1 for _, _, c in self.pieces), default=-1)

    @property
    def is_zero(self):
        return not self.atoms and not self.pieces

    @property
    def is_continuous(self):
        return not self.atoms

    def support(self):
        """Smallest closed interval containing the support, or None."""
        pts = [t for t, _ in self.atoms]
        pts += [p[0] for p in self.pieces] + [p[1] for p in self.pieces]
        if not pts:
            return None
        return min(pts), max(pts)

    # -- linear structure ---------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, RMeasure):
            return NotImplemented
        return RMeasure._trusted(self.atoms + other.atoms, self.pieces + other.pieces, True)

    def scale(self, c):
        if c < 0:
            raise PreconditionError(f"negative scale factor {c}")
        if c == 0:
            return RMeasure()
        return RMeasure._trusted(
            tuple((t, m * c) for t, m in self.atoms),
            tuple((a, b, tuple(x * c for x in cs)) for a, b, cs in self.pieces),
        )

    def t_weight(self):
        """The measure ``t * nu``."""
        if self.degree + 1 > _HARD_DEGREE:
            raise ConfigurationError(
                f"t_weight would raise density degree to {self.degree + 1}"
            )
        return RMeasure._trusted(
            tuple((t, t * m) for t, m in self.atoms),
            tuple((a, b, _shift_up(c)) for a, b, c in self.pieces),
        )

    def dilate(self, c):
        """Push-forward under ``t -> c * t`` (``c > 0``)."""
        if c == 1:
            return self
        if not c > 0:
            raise PreconditionError(f"dilation factor must be positive, got {c}")
        inv = Fraction(1) / c if _is_exact(c) else 1.0 / c
        pieces = []
        for a, b, cs in self.pieces:
            f = inv
            out = []
            for x in cs:
                out.append(x * f)
                f = f * inv
            pieces.append((a * c, b * c, tuple(out)))
        return RMeasure._trusted(tuple((t * c, m) for t, m in self.atoms), tuple(pieces))

    def subtract(self, other, tol=1e-12):
        """``self - other``; raises if the difference is not a positive measure.

        Float residue below ``tol`` (atoms or whole pieces) is dropped.
        """
        atoms = _merge_atoms(
            list(self.atoms) + [(t, -m) for t, m in other.atoms]
        )
        pieces = _normalize_pieces(
            list(self.pieces)
            + [(a, b, tuple(-x for x in c)) for a, b, c in other.pieces]
        )
        keep_atoms = []
        for t, m in atoms:
            if m < -tol:
                raise ValidationError(
                    f"difference has negative atom mass {m} at {t}"
                )
            if m > tol or (_is_exact(m) and m > 0):
                keep_atoms.append((t, m))
        keep = []
        for a, b, c in pieces:
            vals = [float(poly_eval(c, x)) for x in _cheb_points(a, b)]
            vmax = max(abs(v) for v in vals)
            if vmax <= tol and not all(_is_exact(x) for x in c):
                continue
            if min(vals) < -tol * max(1.0, vmax):
                raise ValidationError(
                    f"difference has negative density on ({a}, {b}]"
                )
            keep.append((a, b, c))
        return RMeasure._trusted(tuple(keep_atoms), tuple(keep))

    def restrict(self, lo=0, hi=math.inf):
        """Restriction to the value interval ``(lo, hi]``."""
        atoms = tuple((t, m) for t, m in self.atoms if lo < t <= hi)
        pieces = []
        for a, b, c in self.pieces:
            na, nb = max(a, lo), min(b, hi)
            if nb > na:
                pieces.append((na, nb, c))
        return RMeasure._trusted(atoms, tuple(pieces))

    def decompose(self):
        """``(continuous part, discrete part)``."""
        return RMeasure._trusted(pieces=self.pieces), RMeasure._trusted(atoms=self.atoms)

    # -- distribution function and quantile ---------------------------------

    @cached_property
    def _grid(self):
        """Breakpoints y_0 < y_1 < ... with F(y_i), atom masses and densities.

        ``dens[i]`` is the polynomial on (y_{i-1}, y_i]; ``F[i] = nu((0, y_i])``.
        """
        pts = sorted({t for t, _ in self.atoms} | {p[0] for p in self.pieces}
                     | {p[1] for p in self.pieces} | {0})
        atom_mass = dict(self.atoms)
        dens = [()]
        F = [0]
        pieces = list(self.pieces)
        j = 0
        for i in range(1, len(pts)):
            lo, hi = pts[i - 1], pts[i]
            while j < len(pieces) and pieces[j][1] <= lo:
                j += 1
            c = ()
            if j < len(pieces) and pieces[j][0] <= lo and pieces[j][1] >= hi:
                c = pieces[j][2]
            dens.append(c)
            inc = _antideriv(c, hi) - _antideriv(c, lo) if c else 0
            F.append(F[-1] + inc + atom_mass.get(hi, 0))
        return pts, F, dens, atom_mass

    @cached_property
    def _moment_grid(self):
        pts, F, dens, atom_mass = self._grid
        M = [0]
        for i in range(1, len(pts)):
            lo, hi = pts[i - 1], pts[i]
            c = dens[i]
            inc = 0
            if c:
                c1 = _shift_up(c)
                inc = _antideriv(c1, hi) - _antideriv(c1, lo)
            M.append(M[-1] + inc + hi * atom_mass.get(hi, 0))
        return M

    def cdf(self, y):
        """``nu((0, y])``."""
        pts, F, dens, atom_mass = self._grid
        if y <= 0:
            return 0
        i = bisect.bisect_left(pts, y)
        if i >= len(pts):
            return F[-1]
        if pts[i] == y:
            return F[i]
        c = dens[i]
        lo = pts[i - 1]
        return F[i - 1] + (_antideriv(c, y) - _antideriv(c, lo) if c else 0)

    def partial_moment(self, y):
        """``(t nu)((0, y])``."""
        pts, F, dens, atom_mass = self._grid
        M = self._moment_grid
        if y <= 0:
            return 0
        i = bisect.bisect_left(pts, y)
        if i >= len(pts):
            return M[-1]
        if pts[i] == y:
            return M[i]
        c = dens[i]
        lo = pts[i - 1]
        if not c:
            return M[i - 1]
        c1 = _shift_up(c)
        return M[i - 1] + _antideriv(c1, y) - _antideriv(c1, lo)

    def quantile(self, z):
        """``inf {y : F(y) > z}`` for ``0 <= z < mass``."""
        if z < 0 or not z < self.mass:
            raise PreconditionError(
                f"quantile level {z} outside [0, {self.mass})",
                residuals={"z": z, "mass": self.mass},
            )
        return self._quantile(z)

    def _quantile(self, z):
        pts, F, dens, atom_mass = self._grid
        i = bisect.bisect_right(F, z)
        if i >= len(pts):
            return pts[-1]
        hi = pts[i]
        below = F[i] - atom_mass.get(hi, 0)
        if below <= z:
            return hi
        lo, c = pts[i - 1], dens[i]
        return _solve_cdf(c, lo, hi, z - F[i - 1])

    def quantile_clamped(self, z):
        """Quantile extended by the right end of the support at ``z >= mass``."""
        if z >= self.mass:
            return self._grid[0][-1]
        return self._quantile(max(z, 0))

    def cdf_array(self, ys):
        ys = np.asarray(ys, dtype=float)
        pts, F, dens, _ = self._grid
        p = np.array([float(x) for x in pts])
        Ff = np.array([float(x) for x in F])
        idx = np.searchsorted(p, ys, side="left")
        out = np.empty_like(ys)
        hi_mask = idx >= len(p)
        out[hi_mask] = Ff[-1]
        out[ys <= 0] = 0.0
        rest = ~hi_mask & (ys > 0)
        for i in np.unique(idx[rest]):
            sel = rest & (idx == i)
            y = ys[sel]
            exact = y == p[i]
            val = np.full(y.shape, Ff[i - 1])
            c = [float(x) for x in dens[i]]
            if c:
                val = val + _antideriv_np(c, y) - _antideriv_np(c, p[i - 1])
            val[exact] = Ff[i]
            out[sel] = val
        return out

    def quantile_array(self, zs):
        """Vectorized :meth:`quantile_clamped` in floating point."""
        zs = np.asarray(zs, dtype=float)
        pts, F, dens, atom_mass = self._grid
        p = np.array([float(x) for x in pts])
        Ff = np.array([float(x) for x in F])
        below = np.array([float(F[i] - atom_mass.get(pts[i], 0)) for i in range(len(pts))])
        idx = np.searchsorted(Ff, zs, side="right")
        out = np.empty_like(zs)
        top = idx >= len(p)
        out[top] = p[-1]
        for i in np.unique(idx[~top]):
            sel = (idx == i) & ~top
            z = zs[sel]
            res = np.full(z.shape, p[i])
            cont = below[i] > z
            if np.any(cont):
                c = [float(x) for x in dens[i]]
                res[cont] = _solve_cdf_np(c, p[i - 1], p[i], z[cont] - Ff[i - 1])
            out[sel] = res
        return out

    def partial_moment_array(self, ys):
        ys = np.asarray(ys, dtype=float)
        pts, F, dens, _ = self._grid
        M = self._moment_grid
        p = np.array([float(x) for x in pts])
        Mf = np.array([float(x) for x in M])
        idx = np.searchsorted(p, ys, side="left")
        out = np.empty_like(ys)
        top = idx >= len(p)
        out[top] = Mf[-1]
        out[ys <= 0] = 0.0
        rest = ~top & (ys > 0)
        for i in np.unique(idx[rest]):
            sel = rest & (idx == i)
            y = ys[sel]
            val = np.full(y.shape, Mf[i - 1])
            c = [float(x) for x in dens[i]]
            if c:
                c1 = [0.0] + c
                val = val + _antideriv_np(c1, y) - _antideriv_np(c1, p[i - 1])
            val[y == p[i]] = Mf[i]
            out[sel] = val
        return out

    # -- characteristic function -------------------------------------------

    def char(self, z, tol=QUAD_TOL):
        """``int t**z dnu`` for ``z`` (scalar or array) with ``0 <= Re z <= 1``."""
        zarr = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.any(zarr.real < -1e-15) or np.any(zarr.real > 1 + 1e-15):
            raise PreconditionError("characteristic function needs 0 <= Re z <= 1")
        key = (zarr.tobytes(), tol)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._char(zarr, tol)
            self._cache[key] = hit
        if np.ndim(z) == 0:
            return complex(hit[0])
        return hit.copy()

    def _char(self, z, tol):
        out = np.zeros(z.shape, dtype=complex)
        if self.atoms:
            t = np.array([float(t) for t, _ in self.atoms])
            m = np.array([float(m) for _, m in self.atoms])
            out += np.exp(np.log(t)[:, None] * z[None, :]).T @ m
        if self.pieces:
            lo = np.array([float(a) for a, _, _ in self.pieces])
            hi = np.array([float(b) for _, b, _ in self.pieces])
            deg = max(len(c) for _, _, c in self.pieces)
            coef = np.zeros((len(self.pieces), deg))
            for i, (_, _, c) in enumerate(self.pieces):
                coef[i, :len(c)] = [float(x) for x in c]

            def f(t):
                # nodes are interior, so the covering piece is unambiguous
                idx = np.minimum(np.searchsorted(hi, t, side="left"), len(hi) - 1)
                dens = np.zeros_like(t)
                for k in range(deg - 1, -1, -1):
                    dens = dens * t + coef[idx, k]
                return dens[:, None] * np.exp(np.log(t)[:, None] * z[None, :])

            out += quadrature.integrate(f, lo, hi, tol=tol)
        return out

    # -- serialization -------------------------------------------------------

    def to_dict(self):
        return {
            "atoms": [{"t": _enc(t), "mass": _enc(m)} for t, m in self.atoms],
            "pieces": [
                {"a": _enc(a), "b": _enc(b), "coeffs": [_enc(x) for x in c]}
                for a, b, c in self.pieces
            ],
        }

    @classmethod
    def from_dict(cls, d):
        atoms = tuple((_dec(a["t"]), _dec(a["mass"])) for a in d.get("atoms", []))
        pieces = tuple(
            (_dec(p["a"]), _dec(p["b"]), tuple(_dec(x) for x in p["coeffs"]))
            for p in d.get("pieces", [])
        )
        return cls(atoms, pieces)


def _enc(x):
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return x.numerator
        return {"num": x.numerator, "den": x.denominator}
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def _dec(x):
    if isinstance(x, dict):
        return Fraction(int(x["num"]), int(x["den"]))
    if isinstance(x, int):
        return x
    return float(x)


def _antideriv_np(c, y):
    acc = np.zeros_like(np.asarray(y, dtype=float))
    for k in range(len(c) - 1, -1, -1):
        acc = acc * y + c[k] / (k + 1)
    return acc * y


def _solve_cdf(c, lo, hi, target):
    """Solve ``int_lo^y p = target`` for y in (lo, hi]; exact for constant p."""
    c = _strip(c)
    if len(c) == 1:
        return lo + target / c[0]
    if len(c) == 2:
        # c0 (y - lo) + c1/2 (y^2 - lo^2) = target
        c0, c1 = float(c[0]), float(c[1])
        A, B = 0.5 * c1, c0
        C = -(c0 * float(lo) + 0.5 * c1 * float(lo) ** 2) - float(target)
        disc = max(B * B - 4 * A * C, 0.0)
        sq = math.sqrt(disc)
        # stable root choice
        if B >= 0:
            y = (2 * -C) / (B + sq)
        else:
            y = (-B + sq) / (2 * A)
        return min(max(y, float(lo)), float(hi))
    base = _antideriv(c, lo)
    return brentq(lambda y: float(_antideriv(c, y) - base - target),
                  float(lo), float(hi), xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _solve_cdf_np(c, lo, hi, target):
    c = list(_strip(c))
    target = np.asarray(target, dtype=float)
    if len(c) == 1:
        return lo + target / c[0]
    if len(c) == 2:
        A, B = 0.5 * c[1], c[0]
        C = -(c[0] * lo + 0.5 * c[1] * lo * lo) - target
        sq = np.sqrt(np.maximum(B * B - 4 * A * C, 0.0))
        if B >= 0:
            y = (-2 * C) / (B + sq)
        else:
            y = (-B + sq) / (2 * A)
        return np.clip(y, lo, hi)
    a = np.full(target.shape, lo)
    b = np.full(target.shape, hi)
    base = _antideriv_np(c, lo)
    for _ in range(64):
        m = 0.5 * (a + b)
        left = _antideriv_np(c, m) - base < target
        a = np.where(left, m, a)
        b = np.where(left, b, m)
    return 0.5 * (a + b)


# -- grids -------------------------------------------------------------------


@dataclass(frozen=True)
class StripGrid:
    """Finite grid ``u + i v`` in the strip, used by :func:`measure_distance`."""

    re: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    im: tuple = tuple(np.arange(-5.0, 5.0001, 0.5))

    def __post_init__(self):
        re = tuple(float(u) for u in self.re)
        im = tuple(float(v) for v in self.im)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        if 0.0 not in re or 1.0 not in re:
            raise ValidationError("strip grid must contain Re z = 0 and Re z = 1")
        if any(u < 0 or u > 1 for u in re):
            raise ValidationError("strip grid real parts must lie in [0, 1]")
        if 0.0 not in im or sorted(im) != sorted(-v for v in im):
            raise ValidationError("strip grid imaginary parts must be symmetric and contain 0")

    @classmethod
    def with_height(cls, height=5.0, step=0.5, re=(0.0, 0.25, 0.5, 0.75, 1.0)):
        n = int(round(height / step))
        return cls(re=re, im=tuple(step * k for k in range(-n, n + 1)))

    @cached_property
    def points(self):
        u, v = np.meshgrid(np.array(self.re), np.array(self.im), indexing="ij")
        return (u + 1j * v).ravel()


DEFAULT_GRID = StripGrid()


@dataclass(frozen=True)
class ValueBinGrid:
    """Bins ``((j-1) w, j w]`` of width ``w = 2**-N``."""

    N: int

    def __post_init__(self):
        if self.N < 0:
            raise ValidationError("bin depth must be nonnegative")

    @property
    def width(self):
        return Fraction(1, 2 ** self.N)

    def index(self, t):
        return math.ceil(t / self.width) if _is_exact(t) else math.ceil(t * 2 ** self.N)

    def bounds(self, j):
        return (j - 1) * self.width, j * self.width


# -- module-level operations ---------------------------------------------------


def mass(nu):
    return nu.mass


def moment(nu):
    return nu.moment


def add(*measures):
    if len(measures) == 1:
        return measures[0]
    atoms, pieces = [], []
    for nu in measures:
        atoms.extend(nu.atoms)
        pieces.extend(nu.pieces)
    return RMeasure._trusted(atoms, pieces, normalize=True)


def scale(nu, c):
    return nu.scale(c)


def t_weight(nu):
    return nu.t_weight()


def restrict(nu, lo=0, hi=math.inf):
    return nu.restrict(lo, hi)


def decompose(nu):
    return nu.decompose()


def cdf_at(nu, y):
    return nu.cdf(y)


def quantile_at(nu, z):
    return nu.quantile(z)


def char_fn(nu, z, tol=QUAD_TOL):
    return nu.char(z, tol)


def measure_distance(nu, mu, grid=None):
    """Sup over the strip grid of the characteristic-function gap."""
    grid = grid or DEFAULT_GRID
    z = grid.points
    diff = _char_or_zero(nu, z) - _char_or_zero(mu, z)
    return float(np.max(np.abs(diff)))


def _char_or_zero(nu, z):
    if nu is None or nu.is_zero:
        return np.zeros(z.shape, dtype=complex)
    return nu.char(z)


def bin_stats(nu, grid):
    """Per-bin ``{j: (mass, moment)}`` for the bins of ``grid``."""
    if isinstance(grid, int):
        grid = ValueBinGrid(grid)
    w = grid.width
    stats = {}

    def put(j, m, mo):
        if m == 0:
            return
        pm, pmo = stats.get(j, (0, 0))
        stats[j] = (pm + m, pmo + mo)

    for t, m in nu.atoms:
        put(grid.index(t), m, t * m)
    for a, b, c in nu.pieces:
        if not (_is_exact(a) and _is_exact(b)):
            w_f = float(w)
            j0 = math.floor(a / w_f) + 1
            j1 = math.ceil(b / w_f)
        else:
            j0 = math.floor(a / w) + 1
            j1 = math.ceil(b / w)
        for j in range(j0, j1 + 1):
            lo, hi = max(a, (j - 1) * w), min(b, j * w)
            if hi > lo:
                put(j, _piece_mass((lo, hi, c)), _piece_moment((lo, hi, c)))
    return stats


def bin_discretize(nu, grid):
    """One atom per nonempty bin at its barycenter, preserving bin mass and moment."""
    stats = bin_stats(nu, grid)
    atoms = []
    for j, (m, mo) in sorted(stats.items()):
        if m > 0:
            atoms.append((mo / m, m))
    return RMeasure(atoms=tuple(atoms))


def cdf_sup_distance(nu, mu, n=1000):
    """Sup-distance of the distribution functions on breakpoints plus a grid."""
    pts = set()
    for m in (nu, mu):
        pts.update(float(x) for x in m._grid[0])
    lo = min(pts) if pts else 0.0
    hi = max(pts) if pts else 1.0
    ys = np.union1d(np.array(sorted(pts)), np.linspace(lo, hi, n))
    ys = ys[ys > 0]
    if ys.size == 0:
        return 0.0
    return float(np.max(np.abs(nu.cdf_array(ys) - mu.cdf_array(ys))))


def is_close(nu, mu, tol=0.0):
    """Structural equality of normalized representations up to ``tol``."""
    if len(nu.atoms) != len(mu.atoms) or len(nu.pieces) != len(mu.pieces):
        return False
    for (t1, m1), (t2, m2) in zip(nu.atoms, mu.atoms):
        if abs(t1 - t2) > tol or abs(m1 - m2) > tol:
            return False
    for (a1, b1, c1), (a2, b2, c2) in zip(nu.pieces, mu.pieces):
        if abs(a1 - a2) > tol or abs(b1 - b2) > tol or len(c1) != len(c2):
            return False
        if any(abs(x - y) > tol for x, y in zip(c1, c2)):
            return False
    return True
