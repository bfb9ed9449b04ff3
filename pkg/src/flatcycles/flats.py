"""Product flats in (H²)^r and their intersection pattern.

A flat is an r-tuple of oriented geodesics, coordinate k living in the factor
attached to the k-th split embedding.  Two product flats meet iff every pair of
coordinate geodesics links on the boundary circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DegenerateTriple, DimensionMismatch, NotFound, NotPolarRegular, SharedEndpoint
from .exactreal import SIGMA1, AlgebraicReal, Embedding, QuadElem, algreal_compare, algreal_from_json
from .moebius import (
    INF,
    BoundaryPt,
    OrientedGeodesic,
    axis,
    boundary_equal,
    cyclic_sign,
)
from .quaternion import (
    AlgebraDesc,
    GroupSpec,
    QuatElem,
    enumerate_norm_one,
    in_congruence_subgroup,
    is_polar_regular,
    tau,
)

# ---------------------------------------------------------------------------
# boundary circle


def cyclic_order(p: BoundaryPt, q: BoundaryPt, s: BoundaryPt) -> int:
    """+1 if p, q, s are met in this order going up through the reals and wrapping at ∞."""
    if boundary_equal(p, q) or boundary_equal(q, s) or boundary_equal(p, s):
        raise DegenerateTriple("cyclic order needs three distinct points")
    return cyclic_sign(p, q, s)


def _check_distinct(g1: OrientedGeodesic, g2: OrientedGeodesic) -> None:
    for p in (g1.start, g1.end):
        for q in (g2.start, g2.end):
            if boundary_equal(p, q):
                raise SharedEndpoint("the two geodesics share an endpoint")


def geodesics_link(g1: OrientedGeodesic, g2: OrientedGeodesic) -> bool:
    """Whether the endpoints of g2 separate those of g1 (the geodesics cross)."""
    _check_distinct(g1, g2)
    inside = [cyclic_sign(g1.start, p, g1.end) > 0 for p in (g2.start, g2.end)]
    return inside[0] != inside[1]


def crossing_sign(g1: OrientedGeodesic, g2: OrientedGeodesic) -> int:
    """+1 when (g1.start, g2.start, g1.end, g2.end) is positively ordered, −1 for the
    reverse crossing, 0 when the geodesics are disjoint."""
    if not geodesics_link(g1, g2):
        return 0
    return cyclic_sign(g1.start, g2.start, g1.end)


# ---------------------------------------------------------------------------
# flats


@dataclass(frozen=True, eq=False)
class Flat:
    coords: tuple[OrientedGeodesic, ...]
    provenance: Optional[QuatElem] = None

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if not self.coords:
            raise ValueError("a flat needs at least one coordinate")

    @property
    def r(self) -> int:
        return len(self.coords)

    def same_as(self, other: Flat) -> bool:
        return self.r == other.r and all(p.same_as(q) for p, q in zip(self.coords, other.coords))

    def same_set(self, other: Flat) -> bool:
        """Equal as subsets of (H²)^r, orientation ignored."""
        return self.r == other.r and all(p.same_line(q) for p, q in zip(self.coords, other.coords))

    def reversed(self, k: int | None = None) -> Flat:
        coords = [g.reversed() if k is None or idx == k else g for idx, g in enumerate(self.coords)]
        return Flat(tuple(coords), self.provenance)

    def to_json(self) -> list:
        return [g.to_json() for g in self.coords]

    def __repr__(self):
        return f"Flat({', '.join(repr(g) for g in self.coords)})"


def flats_intersect(A: Flat, B: Flat) -> int:
    """Signed transversal intersection of two product flats (0 when disjoint)."""
    if A.r != B.r:
        raise DimensionMismatch(f"flats of dimension {A.r} and {B.r}")
    sign = 1
    for ga, gb in zip(A.coords, B.coords):
        sign *= crossing_sign(ga, gb)
    return sign


def rational_geodesic(start, end, embedding: Embedding = SIGMA1) -> OrientedGeodesic:
    return OrientedGeodesic(_rational_point(start, embedding), _rational_point(end, embedding))


def _rational_point(value, embedding: Embedding = SIGMA1) -> BoundaryPt:
    if value is INF or value == "inf":
        return INF
    return AlgebraicReal.from_rational(Fraction(value), embedding=embedding)


def diagonal_flat(start, end, r: int) -> Flat:
    return Flat(tuple(rational_geodesic(start, end) for _ in range(r)))


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True, eq=False)
class ConfigSpec:
    """Flats A_1..A_n and B_1..B_n meant to meet exactly when i ≤ j."""

    n: int
    r: int
    A: tuple[Flat, ...]
    B: tuple[Flat, ...]

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(self.A))
        object.__setattr__(self, "B", tuple(self.B))
        if len(self.A) != self.n or len(self.B) != self.n:
            raise ValueError("a configuration needs n flats of each family")
        if any(f.r != self.r for f in self.A + self.B):
            raise DimensionMismatch("all flats must have dimension r")

    def pattern(self) -> list[list[int]]:
        """Signed intersection of A_i with B_j (untranslated)."""
        return [[flats_intersect(a, b) for b in self.B] for a in self.A]

    def pattern_holds(self) -> bool:
        try:
            signs = self.pattern()
        except SharedEndpoint:
            return False
        return all((signs[i][j] != 0) == (i <= j) for i in range(self.n) for j in range(self.n))

    def endpoints(self, k: int) -> list[BoundaryPt]:
        return [p for f in self.A + self.B for p in (f.coords[k].start, f.coords[k].end)]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "A": [f.to_json() for f in self.A],
            "B": [f.to_json() for f in self.B],
        }

    @classmethod
    def from_json(cls, data: dict) -> ConfigSpec:
        def flat(raw):
            return Flat(tuple(OrientedGeodesic(_point_from_json(s), _point_from_json(e)) for s, e in raw))

        return cls(data["n"], data["r"], tuple(flat(f) for f in data["A"]), tuple(flat(f) for f in data["B"]))


def _point_from_json(raw) -> BoundaryPt:
    if isinstance(raw, str):
        return _rational_point(raw)
    return algreal_from_json(raw)


def build_configuration(n: int, r: int) -> ConfigSpec:
    """Diagonal flats over L_i = (−i → i) and M_j = (j/(n+1) → j + 1/2)."""
    if n < 1 or r < 1:
        raise ValueError("n and r must be positive")
    A = [diagonal_flat(-i, i, r) for i in range(1, n + 1)]
    B = [diagonal_flat(Fraction(j, n + 1), j + Fraction(1, 2), r) for j in range(1, n + 1)]
    cfg = ConfigSpec(n, r, A, B)
    if not cfg.pattern_holds():
        raise AssertionError("canonical configuration lost its intersection pattern")
    return cfg


def perturbation_radius(c: ConfigSpec) -> Fraction:
    """Half the smallest gap between distinct finite endpoints, over all coordinates."""
    best = None
    for k in range(c.r):
        vals = sorted(_lower_value(p) for p in c.endpoints(k) if p is not INF)
        gaps = [y - x for x, y in zip(vals, vals[1:]) if y != x]
        if gaps:
            g = min(gaps)
            best = g if best is None else min(best, g)
    if best is None:
        raise ValueError("configuration has fewer than two finite endpoints")
    return best / 2


def _lower_value(p: AlgebraicReal) -> Fraction:
    q = p.as_fraction()
    if q is not None:
        return q
    # irrational endpoints enter through a tight dyadic bracket; conservative enough
    # for a radius, since the bracket is far narrower than any gap
    p = p.refine(64)
    return p.lo


def perturb_configuration(c: ConfigSpec, shifts: dict) -> ConfigSpec:
    """Move endpoints of a rational configuration.

    ``shifts`` maps (family, index, coord, end) with family in {"A", "B"} and end in
    {0, 1} to a rational displacement.
    """
    def moved(family, flats):
        out = []
        for idx, f in enumerate(flats):
            coords = []
            for k, g in enumerate(f.coords):
                pts = []
                for end, p in enumerate((g.start, g.end)):
                    dx = shifts.get((family, idx, k, end), 0)
                    if dx and p is INF:
                        raise ValueError("cannot shift the point at infinity")
                    pts.append(p if not dx else AlgebraicReal.from_rational(p.as_fraction() + Fraction(dx), embedding=p.embedding))
                coords.append(OrientedGeodesic(*pts))
            out.append(Flat(tuple(coords), f.provenance))
        return out

    return ConfigSpec(c.n, c.r, moved("A", c.A), moved("B", c.B))


def breaking_perturbation(c: ConfigSpec) -> tuple[ConfigSpec, dict]:
    """An explicit endpoint perturbation of size at most 2δ that destroys the pattern.

    Two adjacent endpoints at the minimal gap 2δ, one from an A-flat and one from a
    B-flat, are pushed past each other by 3δ/2 each; swapping adjacent endpoints of
    two geodesics toggles whether they link.
    """
    delta = perturbation_radius(c)
    step = 3 * delta / 2
    for k in range(c.r):
        tagged = []
        for family, flats in (("A", c.A), ("B", c.B)):
            for idx, f in enumerate(flats):
                g = f.coords[k]
                for end, p in enumerate((g.start, g.end)):
                    if p is not INF and p.is_rational():
                        tagged.append((p.as_fraction(), (family, idx, k, end)))
        tagged.sort(key=lambda t: t[0])
        for (x, kx), (y, ky) in zip(tagged, tagged[1:]):
            if kx[0] == ky[0] or y - x != 2 * delta:
                continue
            shifts = {kx: step, ky: -step}
            try:
                broken = perturb_configuration(c, shifts)
            except ValueError:
                continue
            if not broken.pattern_holds():
                return broken, shifts
    raise NotFound("no adjacent A/B endpoint pair at the minimal gap breaks the pattern")


# ---------------------------------------------------------------------------
# flats from quaternions


def flat_of_quat(x: QuatElem, alg: AlgebraDesc | None = None) -> Flat:
    """The unique flat stabilized by a polar regular element: its axis in every factor."""
    alg = alg or x.algebra
    if not is_polar_regular(x):
        raise NotPolarRegular(f"{x} is not polar regular")
    return Flat(tuple(axis(tau(alg, e, x)) for e in alg.split_embeddings), x)


def translate_flat(flat: Flat, gamma: QuatElem) -> Flat:
    """γ·flat, acting through τ_k in the k-th factor."""
    alg = gamma.algebra
    coords = tuple(g.moved_by(tau(alg, e, gamma)) for g, e in zip(flat.coords, alg.split_embeddings))
    prov = None
    if flat.provenance is not None:
        prov = gamma * flat.provenance * gamma.inverse()
    return Flat(coords, prov)


# float companions used only to skip candidates that are far from a match


def float_tau(x: QuatElem, e: Embedding) -> tuple[float, float, float, float]:
    alg = x.algebra
    ra = math.sqrt(alg.a.approx(e))
    b = alg.b.approx(e)
    x0, x1, x2, x3 = (c.approx(e) for c in x.coords)
    return (x0 + x1 * ra, x2 + x3 * ra, b * (x2 - x3 * ra), x0 - x1 * ra)


def float_act(m, z: float) -> float:
    a11, a12, a21, a22 = m
    if math.isinf(z):
        return math.inf if a21 == 0 else a11 / a21
    den = a21 * z + a22
    if den == 0:
        return math.inf
    return (a11 * z + a12) / den


def float_fixed_points(m) -> tuple[float, float] | None:
    """Unordered fixed points, or None when floats cannot be trusted (nearly
    upper triangular or nearly parabolic)."""
    a11, a12, a21, a22 = m
    scale = max(abs(a11), abs(a12), abs(a21), abs(a22), 1.0)
    tr = a11 + a22
    disc = tr * tr - 4 * (a11 * a22 - a12 * a21)
    if disc <= 1e-9 * scale * scale or abs(a21) <= 1e-9 * scale:
        return None
    root = math.sqrt(disc)
    return ((a11 - a22 - root) / (2 * a21), (a11 - a22 + root) / (2 * a21))


def _float_point(p: BoundaryPt) -> float:
    return math.inf if p is INF else float(p)


def point_within(p: BoundaryPt, t: BoundaryPt, tol: Fraction) -> bool:
    """Certified test |p − t| < tol; ∞ only matches ∞."""
    if p is INF or t is INF:
        return p is t
    pq, tq = p.as_fraction(), t.as_fraction()
    if pq is not None and tq is not None:
        return abs(pq - tq) < tol
    if tq is not None:
        return algreal_compare(p, _shift(t, tq - tol)) > 0 and algreal_compare(p, _shift(t, tq + tol)) < 0
    if pq is not None:
        return algreal_compare(t, _shift(p, pq - tol)) > 0 and algreal_compare(t, _shift(p, pq + tol)) < 0
    bits = 32
    while bits <= 1024:
        p, t = p.refine(bits), t.refine(bits)
        hi = max(p.hi - t.lo, t.hi - p.lo)
        lo = max(p.lo - t.hi, t.lo - p.hi, 0)
        if hi < tol:
            return True
        if lo >= tol:
            return False
        bits *= 2
    return False


def _shift(like: AlgebraicReal, q: Fraction) -> AlgebraicReal:
    return AlgebraicReal.from_rational(q, embedding=like.embedding)


def geodesic_within(g: OrientedGeodesic, target: OrientedGeodesic, tol: Fraction) -> bool:
    """Endpoints within tol of the target's, in either orientation."""
    if point_within(g.start, target.start, tol) and point_within(g.end, target.end, tol):
        return True
    return point_within(g.start, target.end, tol) and point_within(g.end, target.start, tol)


def flat_within(f: Flat, target: Flat, tol: Fraction) -> bool:
    return f.r == target.r and all(geodesic_within(g, t, tol) for g, t in zip(f.coords, target.coords))


def _float_close(pts: tuple[float, float], target: tuple[float, float], tol: float) -> bool:
    def near(x, y):
        if math.isinf(y):
            return math.isinf(x) or abs(x) > 1e12
        return not math.isinf(x) and abs(x - y) < tol
    return (near(pts[0], target[0]) and near(pts[1], target[1])) or (
        near(pts[0], target[1]) and near(pts[1], target[0])
    )


def density_search(target: Flat, g: GroupSpec, tolerance) -> QuatElem:
    """First polar regular γ in the congruence window whose flat lies within
    ``tolerance`` of ``target`` (endpoint-wise, orientation ignored).

    Raises NotFound once the window is exhausted; that is a statement about the
    window, not about the group.
    """
    tol = Fraction(tolerance)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    alg = g.algebra
    if target.r != alg.r:
        raise DimensionMismatch(f"target has dimension {target.r}, algebra has r = {alg.r}")
    ftarget = [(_float_point(c.start), _float_point(c.end)) for c in target.coords]
    slack = float(tol) + 1e-6
    for x in enumerate_norm_one(g):
        if not in_congruence_subgroup(x, g) or not is_polar_regular(x):
            continue
        ok = True
        for e, ft in zip(alg.split_embeddings, ftarget):
            fp = float_fixed_points(float_tau(x, e))
            if fp is not None and not _float_close(fp, ft, slack):
                ok = False
                break
        if not ok:
            continue
        if flat_within(flat_of_quat(x), target, tol):
            return x
    raise NotFound(f"no unit within height {g.height} and level {g.level} stabilizes a flat near the target")


# ---------------------------------------------------------------------------
# transported flats: conjugates of a fixed polar regular element


def _real_preimage(alg: AlgebraDesc, e: Embedding, m) -> tuple[float, float, float, float]:
    """Real coordinates (x0..x3) whose τ_e image is the real matrix m."""
    m11, m12, m21, m22 = m
    ra = math.sqrt(alg.a.approx(e))
    b = alg.b.approx(e)
    return ((m11 + m22) / 2, (m11 - m22) / (2 * ra), (m12 + m21 / b) / 2, (m12 - m21 / b) / (2 * ra))


def _field_from_reals(alg: AlgebraDesc, vals: Sequence[float], denom: int) -> QuadElem:
    f = alg.field
    if len(vals) == 1:
        # one real place to match: a rational value will do
        return f(Fraction(vals[0]).limit_denominator(denom), 0)
    s = math.sqrt(f.d)
    v1, v2 = vals
    u = (v1 + v2) / 2
    v = (v1 - v2) / (2 * s)
    return f(Fraction(u).limit_denominator(denom), Fraction(v).limit_denominator(denom))


def transport_conjugator(alg: AlgebraDesc, target: Flat, tolerance, max_denominator: int = 1 << 20) -> QuatElem:
    """An invertible c with c·(0 → ∞) within tolerance of the target in every factor.

    The real matrices [[q, p], [1, 1]] (sending 0 ↦ p and ∞ ↦ q) are pulled back
    through each τ_e, the resulting real coordinates are approximated by field
    elements with growing denominators, and the candidate is verified exactly.
    """
    tol = Fraction(tolerance)
    embs = alg.split_embeddings
    if target.r != len(embs):
        raise DimensionMismatch("target dimension differs from the number of split places")
    reals = []
    for g, e in zip(target.coords, embs):
        p, q = _float_point(g.start), _float_point(g.end)
        if math.isinf(p) or math.isinf(q):
            raise NotFound("targets through ∞ are not supported by the transport search")
        reals.append(_real_preimage(alg, e, (q, p, 1.0, 1.0)))
    base = OrientedGeodesic(AlgebraicReal.from_rational(0), INF)
    denom = 1
    while denom <= max_denominator:
        coords = [_field_from_reals(alg, [rv[l] for rv in reals], denom) for l in range(4)]
        c = QuatElem(alg, *coords)
        if not c.norm().is_zero():
            moved = Flat(tuple(base.moved_by(tau(alg, e, c)) for e in embs))
            if all(geodesic_within(mg, tg, tol) and _same_direction(mg, tg, tol) for mg, tg in zip(moved.coords, target.coords)):
                return c
        denom *= 2
    raise NotFound("no conjugator found within the denominator bound")


def _same_direction(g: OrientedGeodesic, t: OrientedGeodesic, tol: Fraction) -> bool:
    return point_within(g.start, t.start, tol) and point_within(g.end, t.end, tol)


def transported_flat(alg: AlgebraDesc, target: Flat, tolerance) -> Flat:
    """The flat of c·i·c⁻¹ for a transport conjugator c; stabilized by that element."""
    c = transport_conjugator(alg, target, tolerance)
    beta = c * alg.i * c.inverse()
    return flat_of_quat(beta)


# ---------------------------------------------------------------------------
# anchoring a canonical configuration in the group


def clearance(flat: Flat, others: Sequence[Flat]) -> Fraction:
    """Smallest distance from a finite endpoint of ``flat`` to any endpoint of ``others``
    in the same factor; moving the endpoints of ``flat`` by less keeps every linking
    relation with ``others``."""
    best = None
    for k, g in enumerate(flat.coords):
        for p in (g.start, g.end):
            if p is INF:
                raise ValueError("clearance needs finite endpoints")
            for o in others:
                for q in (o.coords[k].start, o.coords[k].end):
                    if q is INF:
                        continue
                    gap = abs(_lower_value(p) - _lower_value(q))
                    best = gap if best is None else min(best, gap)
    if best is None:
        raise ValueError("nothing to keep clear of")
    return best


@dataclass
class Anchoring:
    config: ConfigSpec
    a_tolerances: list[Fraction]
    b_tolerance: Fraction
    anchor_levels: list[int]
    periods: list[int]
    conjugators: list[QuatElem]

    def to_json(self) -> dict:
        return {
            "a_tolerances": [str(t) for t in self.a_tolerances],
            "b_tolerance": str(self.b_tolerance),
            "anchors": [f.provenance.to_json() for f in self.config.A],
            "anchor_levels": self.anchor_levels,
            "periods": self.periods,
            "conjugators": [c.to_json() for c in self.conjugators],
        }


def anchor_configuration(canonical: ConfigSpec, g: GroupSpec) -> Anchoring:
    """Replace canonical flats by flats stabilized by elements of the algebra.

    Each B_j becomes the flat of c·i·c⁻¹ for a transport conjugator c within the
    perturbation radius.  Each A_i becomes the flat of the first polar regular unit
    whose flat lies closer to the canonical A_i than any endpoint of the
    transported B-flats; the unit is sought at the level of ``g`` and, failing
    that, among all norm-one units of the order (some power of such a unit lies in
    the congruence subgroup and stabilizes the same flat, so the flat is still
    compact modulo the smaller group).  The pattern is re-checked exactly.
    """
    from .quaternion import congruence_period

    alg = g.algebra
    delta = perturbation_radius(canonical)
    conj = [transport_conjugator(alg, b, delta) for b in canonical.B]
    B = [flat_of_quat(c * alg.i * c.inverse()) for c in conj]
    tols, A, levels, periods = [], [], [], []
    for a in canonical.A:
        tol = clearance(a, B)
        tols.append(tol)
        levels_to_try = [g.level] if g.level == 1 else [g.level, 1]
        for level in levels_to_try:
            try:
                x = density_search(a, GroupSpec(g.order, level, g.height), tol)
                break
            except NotFound:
                if level == levels_to_try[-1]:
                    raise
        A.append(flat_of_quat(x))
        levels.append(level)
        periods.append(congruence_period(x, g.level))
    cfg = ConfigSpec(canonical.n, canonical.r, A, B)
    if not cfg.pattern_holds():
        raise AssertionError("anchored configuration lost its intersection pattern")
    return Anchoring(cfg, tols, delta, levels, periods, conj)
