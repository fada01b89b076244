"""Double cosets ``Ams . g . Ams`` through Rokhlin invariants of the derivative.

For a map in the exact class every linear segment contributes a value taken
on a set of positive measure (multiplicity infinity), while every quantile
segment takes each derivative value at most once.  At a level ``y`` the
multiplicity is the number of quantile segments whose law has positive
density there.  The n-th canonical measure has density equal to the n-th
largest of these densities, so ``nu_1 >= nu_2 >= ...`` and

    F_n(y) = sum_{j <= n} nu_j((0, y]),    F(y) = F_K(y) + nu_inf((0, y]).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInvariantsError, UnsupportedClassError, ValidationError
from .measure import RMeasure, add, cdf_sup_distance, poly_eval

LABEL_TOL = 1e-10
INEQ_TOL = 1e-12


def _require_exact(g):
    for i, s in enumerate(g.segments):
        if s.kind not in ("linear", "quantile"):
            raise UnsupportedClassError(
                f"segment {i} is a numeric segment; canonical forms need the exact class"
            )


def _density_on(nu, lo, hi):
    starts = [p[0] for p in nu.pieces]
    i = bisect.bisect_right(starts, lo) - 1
    if i >= 0 and nu.pieces[i][0] <= lo and nu.pieces[i][1] >= hi:
        return nu.pieces[i][2]
    return None


def _crossings(polys, lo, hi):
    cuts = set()
    flo, fhi = float(lo), float(hi)
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            n = max(len(polys[i]), len(polys[j]))
            d = [float((polys[i][k] if k < len(polys[i]) else 0)
                       - (polys[j][k] if k < len(polys[j]) else 0)) for k in range(n)]
            while d and d[-1] == 0:
                d.pop()
            if len(d) < 2:
                continue
            for r in np.roots(d[::-1]):
                if abs(r.imag) < 1e-12 and flo < r.real < fhi:
                    cuts.add(float(r.real))
    return sorted(cuts)


def multiplicity_layers(laws):
    """Split continuous laws into ``nu_1 >= nu_2 >= ...`` by ranking densities pointwise."""
    laws = [nu for nu in laws if not nu.is_zero]
    pts = sorted({e for nu in laws for a, b, _ in nu.pieces for e in (a, b)})
    layers = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        polys = [c for c in (_density_on(nu, lo, hi) for nu in laws) if c]
        if not polys:
            continue
        edges = [lo] + _crossings(polys, lo, hi) + [hi]
        for a, b in zip(edges[:-1], edges[1:]):
            mid = (a + b) / 2
            ranked = sorted(polys, key=lambda c: -float(poly_eval(c, mid)))
            while len(layers) < len(ranked):
                layers.append([])
            for r, c in enumerate(ranked):
                layers[r].append((a, b, c))
    return [RMeasure(pieces=tuple(p)) for p in layers]


@dataclass(frozen=True)
class CanonicalLabel:
    """Finite-multiplicity measures ``nu`` (continuous, decreasing) and ``nu_inf``."""

    nu: tuple
    nu_inf: RMeasure

    def __post_init__(self):
        nu = list(self.nu)
        while nu and nu[-1].is_zero:
            nu.pop()
        object.__setattr__(self, "nu", tuple(nu))
        for j, m in enumerate(nu):
            if not m.is_continuous:
                raise ValidationError(f"nu_{j + 1} has atoms; finite multiplicities must be continuous")
        for j in range(len(nu) - 1):
            try:
                nu[j].subtract(nu[j + 1])
            except ValidationError:
                raise ValidationError(f"nu_{j + 1} >= nu_{j + 2} fails") from None

    @property
    def total(self):
        return add(*self.nu, self.nu_inf)

    def residuals(self):
        tot = self.total
        return {"mass": float(tot.mass - 1), "moment": float(tot.moment - 1)}

    def to_dict(self):
        return {"nu": [m.to_dict() for m in self.nu], "nu_inf": self.nu_inf.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(RMeasure.from_dict(m) for m in d["nu"]),
                   RMeasure.from_dict(d["nu_inf"]))


@dataclass(frozen=True)
class RokhlinInvariants:
    """``F`` is the full derivative law; ``Fn[n-1]`` is the measure whose CDF is ``F_n``."""

    F: RMeasure
    Fn: tuple

    @property
    def K(self):
        return len(self.Fn)

    def cdfs(self, ys):
        """Rows ``F_1..F_K, F`` evaluated at ``ys``; shape ``(K + 1, len(ys))``."""
        ys = np.asarray(ys, dtype=float)
        return np.array([m.cdf_array(ys) for m in self.Fn] + [self.F.cdf_array(ys)])

    def sample_points(self, n=1000):
        ms = list(self.Fn) + [self.F]
        pts = {float(e) for m in ms for t, _ in m.atoms for e in (t,)}
        pts |= {float(e) for m in ms for a, b, _ in m.pieces for e in (a, b)}
        if not pts:
            return np.array([1.0])
        lo, hi = min(pts), max(pts)
        pad = 0.05 * (hi - lo) + 1e-3
        grid = np.linspace(max(lo - pad, 0.0), hi + pad, n)
        return np.union1d(grid, np.array(sorted(pts)))

    def rokhlin_second_differences(self, ys=None, stated_sign=False):
        """``F_k - 2 F_{k+1} + F_{k+2}`` on a grid.

        By default ``k`` runs over ``0..K-2`` with ``F_0 = 0``; these values are
        nonpositive for admissible invariants.  With ``stated_sign`` the range
        is ``1..K-2`` (only stored functions), the form in which the condition
        is usually quoted.
        """
        ys = self.sample_points() if ys is None else ys
        rows = self.cdfs(ys)[:-1]
        rows = np.vstack([np.zeros(len(ys)), rows])
        start = 1 if stated_sign else 0
        return [rows[k] - 2 * rows[k + 1] + rows[k + 2] for k in range(start, self.K - 1)]

    def validate(self):
        if abs(self.F.mass - 1) > LABEL_TOL:
            raise InvalidInvariantsError(
                "F is not a distribution function of a probability measure",
                residuals={"mass": float(self.F.mass - 1)},
            )
        ys = self.sample_points()
        rows = self.cdfs(ys)
        prev = np.zeros(len(ys))
        for k, row in enumerate(rows):
            name = f"F_{k + 1}" if k < self.K else "F"
            lower = f"F_{k}" if k else "0"
            gap = float(np.min(row - prev))
            if gap < -INEQ_TOL:
                raise InvalidInvariantsError(f"{lower} <= {name} fails by {-gap:.3g}")
            prev = row
        for k, d in enumerate(self.rokhlin_second_differences(ys)):
            worst = float(np.max(d))
            if worst > INEQ_TOL:
                raise InvalidInvariantsError(
                    f"F_{k} - 2F_{k + 1} + F_{k + 2} <= 0 fails by {worst:.3g}"
                )
        prev = RMeasure()
        for k, m in enumerate(self.Fn):
            try:
                m.subtract(prev)
            except ValidationError:
                raise InvalidInvariantsError(
                    f"F_{k + 1} - F_{k} is not nondecreasing"
                ) from None
            prev = m
        try:
            self.F.subtract(prev)
        except ValidationError:
            raise InvalidInvariantsError("F - F_K is not nondecreasing") from None

    def table(self, n=1000):
        ys = self.sample_points(n)
        return ys, self.cdfs(ys)


def rokhlin_invariants(g):
    return invariants_from_label(canonical_form(g))


def canonical_form(g):
    _require_exact(g)
    inf_atoms = []
    laws = []
    for s in g.segments:
        if s.kind == "linear":
            inf_atoms.append((s.slope, s.x1 - s.x0))
        else:
            laws.append(s.law(s.x0, s.x1))
    return CanonicalLabel(tuple(multiplicity_layers(laws)), RMeasure(atoms=tuple(inf_atoms)))


def invariants_from_label(lbl):
    Fn = []
    acc = RMeasure()
    for m in lbl.nu:
        acc = acc + m
        Fn.append(acc)
    return RokhlinInvariants(acc + lbl.nu_inf, tuple(Fn))


def label_from_invariants(inv):
    inv.validate()
    nu = []
    prev = RMeasure()
    for m in inv.Fn:
        nu.append(m.subtract(prev))
        prev = m
    try:
        return CanonicalLabel(tuple(nu), inv.F.subtract(prev))
    except ValidationError as exc:
        raise InvalidInvariantsError(str(exc)) from None


def _measures_equal(a, b, tol):
    if a == b:
        return True
    ca, cb = a.decompose()
    if len(ca.atoms) != len(cb.atoms):
        return False
    for (t1, m1), (t2, m2) in zip(ca.atoms, cb.atoms):
        if t1 != t2 and abs(t1 - t2) > tol:
            return False
        if abs(m1 - m2) > tol:
            return False
    return cdf_sup_distance(a, b) <= tol


def labels_equal(a, b, tol=LABEL_TOL):
    if len(a.nu) != len(b.nu):
        return False
    pairs = list(zip(a.nu, b.nu)) + [(a.nu_inf, b.nu_inf)]
    return all(_measures_equal(x, y, tol) for x, y in pairs)


def same_double_coset(g, h, tol=LABEL_TOL):
    return labels_equal(canonical_form(g), canonical_form(h), tol)


def canonical_space_description(lbl, level=2):
    """Components of the model space carrying ``lbl`` and their split blocks."""
    from .approx import split_points

    cuts = split_points(level).cuts
    bounds = [0] + list(cuts) + [None]
    comps = []
    blocks = []

    def add_comp(name, m, weight):
        comps.append({
            "component": name,
            "mass": float(m.mass),
            "t_mass": float(m.moment),
            "measure": m.to_dict(),
            "fiber": weight,
        })
        for k in range(len(bounds) - 1):
            lo = bounds[k]
            hi = bounds[k + 1]
            r = m.restrict(lo, float("inf") if hi is None else hi)
            if r.is_zero:
                continue
            blocks.append({
                "component": name,
                "block": k,
                "values": [float(lo), None if hi is None else float(hi)],
                "mass": float(r.mass),
                "t_mass": float(r.moment),
            })

    for j, m in enumerate(lbl.nu):
        add_comp(f"line{j + 1}", m, "point")
    if not lbl.nu_inf.is_zero:
        add_comp("product", lbl.nu_inf, "[0,1]")
    return {
        "components": comps,
        "blocks": blocks,
        "split_level": level,
        "total_mass": float(sum(c["mass"] for c in comps)),
        "total_t_mass": float(sum(c["t_mass"] for c in comps)),
    }
