"""Exact Möbius action of 2×2 matrices on the boundary circle R ∪ {∞}.

All geometry is done on boundary data; interior points of H² are never
constructed.  Matrices with negative determinant act on the boundary by the
same rational formula (complex conjugation fixes real points).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import NotHyperbolicLike, NotUnimodular
from .exactreal import (
    QQ,
    SIGMA1,
    AlgebraicReal,
    Embedding,
    QuadField,
    TowerElem,
    algreal_compare,
    tower_sign,
)


class Infinity:
    """The point ∞ of ∂H² = R ∪ {∞} in the upper half-plane model."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (Infinity, ())

    def to_json(self) -> str:
        return "inf"


INF = Infinity()

BoundaryPt = Union[AlgebraicReal, Infinity]


def is_inf(p: BoundaryPt) -> bool:
    return p is INF


def boundary_equal(p: BoundaryPt, q: BoundaryPt) -> bool:
    if p is INF or q is INF:
        return p is q
    return algreal_compare(p, q) == 0


def rebase_point(p: BoundaryPt, e: Embedding) -> BoundaryPt:
    """The same point read under embedding e; only rational points can move."""
    if p is INF or p.embedding == e:
        return p
    if p.is_rational():
        return AlgebraicReal.from_rational(p.as_fraction(), embedding=e)
    raise ValueError("point and matrix carry different embeddings")


def boundary_key(p: BoundaryPt) -> float:
    """A float sort key (∞ last); only for presentation and prefiltering."""
    return float("inf") if p is INF else float(p)


def boundary_to_json(p: BoundaryPt):
    if p is INF:
        return "inf"
    q = p.as_fraction()
    if q is not None:
        return str(q)
    return p.to_json()


class Mat2R:
    """A 2×2 matrix with tower entries, read under one real embedding."""

    __slots__ = ("a11", "a12", "a21", "a22", "embedding", "det")

    def __init__(self, a11, a12, a21, a22, embedding: Embedding = SIGMA1):
        entries = _common_tower([a11, a12, a21, a22])
        entries = [t.reduced(embedding) for t in entries]
        det = (entries[0] * entries[3] - entries[1] * entries[2]).reduced(embedding)
        if det.is_zero():
            raise ValueError("matrix is singular")
        for name, value in zip(("a11", "a12", "a21", "a22"), entries):
            object.__setattr__(self, name, value)
        object.__setattr__(self, "embedding", embedding)
        object.__setattr__(self, "det", det)

    def __setattr__(self, name, value):
        raise AttributeError("Mat2R is immutable")

    @classmethod
    def from_rows(cls, rows, embedding: Embedding = SIGMA1, field: QuadField = QQ) -> Mat2R:
        (p, q), (r, s) = rows
        lift = lambda v: v if isinstance(v, TowerElem) else TowerElem.lift(v if not isinstance(v, (int, Fraction)) else Fraction(v), field=field)  # noqa: E731
        return cls(lift(p), lift(q), lift(r), lift(s), embedding)

    @property
    def entries(self) -> tuple[TowerElem, TowerElem, TowerElem, TowerElem]:
        return (self.a11, self.a12, self.a21, self.a22)

    def trace(self) -> TowerElem:
        return self.a11 + self.a22

    def det_sign(self) -> int:
        return tower_sign(self.det, self.embedding)

    def __mul__(self, other: Mat2R) -> Mat2R:
        if not isinstance(other, Mat2R):
            return NotImplemented
        if other.embedding != self.embedding:
            raise ValueError("matrices carry different embeddings")
        return Mat2R(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
            self.embedding,
        )

    def __add__(self, other: Mat2R) -> Mat2R:
        return Mat2R(*(p + q for p, q in zip(self.entries, other.entries)), self.embedding)

    def inverse(self) -> Mat2R:
        dinv = self.det.inverse()
        return Mat2R(self.a22 * dinv, -self.a12 * dinv, -self.a21 * dinv, self.a11 * dinv, self.embedding)

    def conjugate(self, h: Mat2R) -> Mat2R:
        """h · self · h⁻¹."""
        return h * self * h.inverse()

    def is_scalar(self, c) -> bool:
        return self.a12.is_zero() and self.a21.is_zero() and self.a11 == c and self.a22 == c

    def __eq__(self, other):
        if not isinstance(other, Mat2R):
            return NotImplemented
        return self.embedding == other.embedding and all(
            (p - q).reduced(self.embedding).is_zero() for p, q in zip(self.entries, other.entries)
        )

    __hash__ = None

    def approx(self) -> list[list[float]]:
        e = self.embedding
        return [[self.a11.approx(e), self.a12.approx(e)], [self.a21.approx(e), self.a22.approx(e)]]

    def __repr__(self):
        return f"Mat2R([[{self.a11}, {self.a12}], [{self.a21}, {self.a22}]], {self.embedding})"

    def to_json(self) -> dict:
        return {"entries": [str(t) for t in self.entries], "embedding": self.embedding.index}


def _common_tower(values) -> list[TowerElem]:
    towers = [v if isinstance(v, TowerElem) else TowerElem.lift(v if not isinstance(v, int) else Fraction(v)) for v in values]
    radicand = None
    for t in towers:
        if not t.v.is_zero():
            radicand = t.a
            break
    if radicand is None:
        fields = [t.field for t in towers if t.field.d != 1]
        radicand = fields[0].one if fields else towers[0].a
        if any(t.a != radicand for t in towers) and fields:
            radicand = fields[0].one
    return [TowerElem.lift(t, radicand) if t.a != radicand else t for t in towers]


# ---------------------------------------------------------------------------
# action on the boundary


def act_boundary(g: Mat2R, p: BoundaryPt) -> BoundaryPt:
    """(a11·p + a12)/(a21·p + a22), with the usual conventions at ∞ and the pole."""
    e = g.embedding
    if p is INF:
        if g.a21.is_zero():
            return INF
        return AlgebraicReal.from_tower(g.a11 / g.a21, e)
    p = rebase_point(p, e)
    t = p.tower_value()
    if t is not None:
        den = (g.a21 * t + g.a22).reduced(e)
        if den.is_zero():
            return INF
        return AlgebraicReal.from_tower((g.a11 * t + g.a12) / den, e)
    return _act_quadratic(g, p)


def _act_quadratic(g: Mat2R, p: AlgebraicReal) -> AlgebraicReal:
    # p is a root of c0 + c1 z + c2 z² that is irrational over the tower.
    # Substituting z = (a22 w − a12)/(−a21 w + a11) and clearing denominators
    # gives the polynomial of w = g·p.
    e = g.embedding
    c0, c1, c2 = p.coeffs
    a11, a12, a21, a22 = g.entries
    # numerator N(w) = a22 w − a12, denominator D(w) = −a21 w + a11
    n0, n1 = -a12, a22
    d0, d1 = a11, -a21
    q0 = c2 * n0 * n0 + c1 * n0 * d0 + c0 * d0 * d0
    q1 = c2 * n0 * n1 * 2 + c1 * (n0 * d1 + n1 * d0) + c0 * d0 * d1 * 2
    q2 = c2 * n1 * n1 + c1 * n1 * d1 + c0 * d1 * d1
    images = AlgebraicReal.roots((q0, q1, q2), e)
    sources = AlgebraicReal.roots(p.coeffs, e)
    if len(images) != 2 or len(sources) != 2:
        raise ArithmeticError("Möbius image of a quadratic irrational lost a root")
    p_is_low = algreal_compare(p, sources[0]) == 0
    r_lo, r_hi = images
    if g.a21.is_zero():
        increasing = tower_sign(g.a11, e) * tower_sign(g.a22, e) > 0
    else:
        # (p_lo, p_hi, ∞) is positively ordered; its image (g p_lo, g p_hi, a11/a21)
        # has orientation sign(det).
        q_inf = AlgebraicReal.from_tower(g.a11 / g.a21, e)
        increasing = cyclic_sign(r_lo, r_hi, q_inf) == g.det_sign()
    if increasing:
        return r_lo if p_is_low else r_hi
    return r_hi if p_is_low else r_lo


def cyclic_sign(p: BoundaryPt, q: BoundaryPt, s: BoundaryPt) -> int:
    """Orientation of three distinct points on R ∪ {∞}: +1 if p → q → s runs
    in the increasing direction (wrapping through ∞), else −1."""
    pts = [p, q, s]
    order = sorted(range(3), key=lambda idx: _SortKey(pts[idx]))
    # the triple is positive iff its index permutation is a cyclic rotation
    rank = [0] * 3
    for pos, idx in enumerate(order):
        rank[idx] = pos
    rotations = {(0, 1, 2), (1, 2, 0), (2, 0, 1)}
    return 1 if tuple(rank) in rotations else -1


class _SortKey:
    __slots__ = ("p",)

    def __init__(self, p):
        self.p = p

    def __lt__(self, other):
        return boundary_compare(self.p, other.p) < 0


def boundary_compare(p: BoundaryPt, q: BoundaryPt) -> int:
    """Total order on R ∪ {∞} with ∞ largest."""
    if p is INF:
        return 0 if q is INF else 1
    if q is INF:
        return -1
    return algreal_compare(p, q)


# ---------------------------------------------------------------------------
# classification, fixed points and axes


class JordanClass(enum.Enum):
    HYPERBOLIC = "Hyperbolic"
    ELLIPTIC = "Elliptic"
    PARABOLIC_UNIPOTENT = "ParabolicUnipotent"
    PARABOLIC_NEGATIVE = "ParabolicNegative"
    PLUS_IDENTITY = "PlusIdentity"
    MINUS_IDENTITY = "MinusIdentity"


def classify_jordan(g: Mat2R) -> JordanClass:
    """Real Jordan type of a determinant-one matrix."""
    if not g.det == 1:
        raise NotUnimodular("classification needs det = 1")
    if g.is_scalar(1):
        return JordanClass.PLUS_IDENTITY
    if g.is_scalar(-1):
        return JordanClass.MINUS_IDENTITY
    e = g.embedding
    tr = g.trace()
    s = tower_sign(tr * tr - 4, e)
    if s > 0:
        return JordanClass.HYPERBOLIC
    if s < 0:
        return JordanClass.ELLIPTIC
    return JordanClass.PARABOLIC_UNIPOTENT if tower_sign(tr, e) > 0 else JordanClass.PARABOLIC_NEGATIVE


def discriminant(g: Mat2R) -> TowerElem:
    tr = g.trace()
    return (tr * tr - g.det * 4).reduced(g.embedding)


def fixed_points(g: Mat2R) -> tuple[BoundaryPt, BoundaryPt]:
    """(repelling, attracting) fixed points for a matrix with distinct real eigenvalues.

    The attracting point belongs to the eigenvalue of larger absolute value; when
    both have equal size (trace 0) the larger eigenvalue is taken.
    """
    e = g.embedding
    if tower_sign(discriminant(g), e) <= 0:
        raise NotHyperbolicLike("eigenvalues are not real and distinct")
    plus_attracts = tower_sign(g.trace(), e) >= 0
    if g.a21.is_zero():
        finite = AlgebraicReal.from_tower(g.a12 / (g.a22 - g.a11), e)
        # ∞ carries eigenvalue a11, the finite point a22
        inf_is_plus = tower_sign(g.a11 - g.a22, e) > 0
        inf_attracts = inf_is_plus == plus_attracts
        return (finite, INF) if inf_attracts else (INF, finite)
    lo, hi = AlgebraicReal.roots((-g.a12, g.a22 - g.a11, g.a21), e)
    # z± = (a11 − a22 ± √Δ)/(2 a21): z+ is the larger root iff a21 > 0
    plus, minus = (hi, lo) if tower_sign(g.a21, e) > 0 else (lo, hi)
    return (minus, plus) if plus_attracts else (plus, minus)


@dataclass(frozen=True, eq=False)
class OrientedGeodesic:
    """A geodesic of H² given by its ordered pair of boundary endpoints."""

    start: BoundaryPt
    end: BoundaryPt

    def __post_init__(self):
        if boundary_equal(self.start, self.end):
            raise ValueError("a geodesic needs two distinct endpoints")

    def reversed(self) -> OrientedGeodesic:
        return OrientedGeodesic(self.end, self.start)

    @property
    def embedding(self) -> Embedding | None:
        for p in (self.start, self.end):
            if p is not INF:
                return p.embedding
        return None

    def same_as(self, other: OrientedGeodesic) -> bool:
        return boundary_equal(self.start, other.start) and boundary_equal(self.end, other.end)

    def same_line(self, other: OrientedGeodesic) -> bool:
        return self.same_as(other) or (
            boundary_equal(self.start, other.end) and boundary_equal(self.end, other.start)
        )

    def moved_by(self, g: Mat2R) -> OrientedGeodesic:
        return OrientedGeodesic(act_boundary(g, self.start), act_boundary(g, self.end))

    def to_json(self) -> list:
        return [boundary_to_json(self.start), boundary_to_json(self.end)]

    def __repr__(self):
        return f"OrientedGeodesic({_short(self.start)} → {_short(self.end)})"


def _short(p: BoundaryPt) -> str:
    if p is INF:
        return "∞"
    q = p.as_fraction()
    return str(q) if q is not None else f"{float(p):.6g}"


def axis(g: Mat2R) -> OrientedGeodesic:
    """The invariant geodesic of g, oriented from repelling to attracting point."""
    rep, att = fixed_points(g)
    return OrientedGeodesic(rep, att)
