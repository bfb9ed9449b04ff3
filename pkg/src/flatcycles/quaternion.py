"""Quaternion algebras (a, b)_F over F = Q or Q(√d).

Orders are always the O_F-span of the quaternionic basis {1, i, j, k} with
i² = a, j² = b, k = ij = −ji.  The arithmetic group is approximated by the
norm-one units of that order whose integral coordinates lie in a height window.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator

from .errors import AlgebraMismatch, NegativeRadicand, NotInOrder, NotInvertible, NotNormalizable, NotSplit
from .exactreal import Embedding, QuadElem, QuadField, TowerElem, parse_quad, quad_sign


class AlgebraDesc:
    """The quaternion algebra (a, b)_F together with its real splitting data."""

    __slots__ = ("field", "a", "b", "split_embeddings")

    def __init__(self, field: QuadField, a, b):
        a = _to_quad(a, field)
        b = _to_quad(b, field)
        if a.is_zero() or b.is_zero():
            raise ValueError("a and b must be nonzero")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        split = tuple(e for e in field.embeddings() if quad_sign(a, e) > 0 or quad_sign(b, e) > 0)
        object.__setattr__(self, "split_embeddings", split)

    @classmethod
    def parse(cls, d: int, a: str, b: str) -> AlgebraDesc:
        f = QuadField(d)
        return cls(f, parse_quad(a, f), parse_quad(b, f))

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraDesc is immutable")

    def __reduce__(self):
        return (AlgebraDesc, (self.field, self.a, self.b))

    def __eq__(self, other):
        return isinstance(other, AlgebraDesc) and (self.field, self.a, self.b) == (other.field, other.a, other.b)

    def __hash__(self):
        return hash((self.field, self.a, self.b))

    def __repr__(self):
        return f"AlgebraDesc(({self.a}, {self.b})_{self.field})"

    @property
    def r(self) -> int:
        return len(self.split_embeddings)

    @property
    def ab(self) -> QuadElem:
        return self.a * self.b

    def is_integral(self) -> bool:
        return self.a.is_integral() and self.b.is_integral()

    def is_normalized(self) -> bool:
        return all(quad_sign(self.a, e) > 0 for e in self.split_embeddings)

    # element constructors
    def elem(self, x0=0, x1=0, x2=0, x3=0) -> QuatElem:
        return QuatElem(self, x0, x1, x2, x3)

    @property
    def one(self) -> QuatElem:
        return self.elem(1)

    @property
    def i(self) -> QuatElem:
        return self.elem(0, 1)

    @property
    def j(self) -> QuatElem:
        return self.elem(0, 0, 1)

    @property
    def k(self) -> QuatElem:
        return self.elem(0, 0, 0, 1)

    def to_json(self) -> dict:
        return {"d": self.field.d, "a": str(self.a), "b": str(self.b)}

    @classmethod
    def from_json(cls, data: dict) -> AlgebraDesc:
        return cls.parse(int(data["d"]), str(data["a"]), str(data["b"]))


def _to_quad(value, field: QuadField) -> QuadElem:
    if isinstance(value, QuadElem):
        if value.field == field:
            return value
        if value.field.d == 1:
            return QuadElem(field, value.x)
        raise ValueError(f"{value} does not lie in {field}")
    if isinstance(value, str):
        return parse_quad(value, field)
    return QuadElem(field, value)


class QuatElem:
    """x0 + x1 i + x2 j + x3 k with coordinates in F.  Immutable."""

    __slots__ = ("algebra", "coords")

    def __init__(self, algebra: AlgebraDesc, x0=0, x1=0, x2=0, x3=0):
        f = algebra.field
        coords = tuple(_to_quad(c, f) for c in (x0, x1, x2, x3))
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def _make(cls, algebra, coords):
        obj = object.__new__(cls)
        object.__setattr__(obj, "algebra", algebra)
        object.__setattr__(obj, "coords", coords)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("QuatElem is immutable")

    def __reduce__(self):
        return (QuatElem, (self.algebra, *self.coords))

    x0 = property(lambda self: self.coords[0])
    x1 = property(lambda self: self.coords[1])
    x2 = property(lambda self: self.coords[2])
    x3 = property(lambda self: self.coords[3])

    def _check(self, other: QuatElem) -> None:
        if other.algebra is not self.algebra and other.algebra != self.algebra:
            raise AlgebraMismatch(f"{self.algebra} vs {other.algebra}")

    def _scalar(self, c) -> QuatElem:
        return QuatElem._make(self.algebra, (_to_quad(c, self.algebra.field),) + (self.algebra.field.zero,) * 3)

    def __add__(self, other):
        if not isinstance(other, QuatElem):
            other = self._scalar(other)
        self._check(other)
        return QuatElem._make(self.algebra, tuple(p + q for p, q in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, QuatElem):
            other = self._scalar(other)
        self._check(other)
        return QuatElem._make(self.algebra, tuple(p - q for p, q in zip(self.coords, other.coords)))

    def __rsub__(self, other):
        return self._scalar(other) - self

    def __neg__(self):
        return QuatElem._make(self.algebra, tuple(-c for c in self.coords))

    def __mul__(self, other):
        if not isinstance(other, QuatElem):
            c = _to_quad(other, self.algebra.field)
            return QuatElem._make(self.algebra, tuple(x * c for x in self.coords))
        return quat_mul(self, other)

    def __rmul__(self, other):
        c = _to_quad(other, self.algebra.field)
        return QuatElem._make(self.algebra, tuple(c * x for x in self.coords))

    def __pow__(self, n: int):
        if n < 0:
            return quat_inverse(self) ** (-n)
        result = self.algebra.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, QuatElem):
            return self.algebra == other.algebra and self.coords == other.coords
        return NotImplemented

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return f"QuatElem({', '.join(str(c) for c in self.coords)})"

    def __str__(self):
        parts = []
        for c, name in zip(self.coords, ("", "i", "j", "k")):
            if c.is_zero():
                continue
            parts.append(f"({c}){name}" if name else f"({c})")
        return " + ".join(parts) if parts else "0"

    def norm(self) -> QuadElem:
        return reduced_norm(self)

    def conj(self) -> QuatElem:
        return quat_conj(self)

    def inverse(self) -> QuatElem:
        return quat_inverse(self)

    def trace(self) -> QuadElem:
        return self.coords[0] * 2

    def is_integral(self) -> bool:
        return all(c.is_integral() for c in self.coords)

    def int_coords(self) -> tuple[int, ...]:
        """The 4·[F:Q] integer coordinates in the O_F-basis; raises NotInOrder."""
        if not self.is_integral():
            raise NotInOrder(f"{self} is not in the order")
        out = []
        for c in self.coords:
            p, q = c.int_coords()
            out.append(int(p))
            if self.algebra.field.d != 1:
                out.append(int(q))
        return tuple(out)

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coords]


def quat_mul(x: QuatElem, y: QuatElem) -> QuatElem:
    """Product using i² = a, j² = b, k = ij = −ji."""
    x._check(y)
    alg = x.algebra
    a, b = alg.a, alg.b
    x0, x1, x2, x3 = x.coords
    y0, y1, y2, y3 = y.coords
    ab = a * b
    z0 = x0 * y0 + a * (x1 * y1) + b * (x2 * y2) - ab * (x3 * y3)
    z1 = x0 * y1 + x1 * y0 + b * (x3 * y2 - x2 * y3)
    z2 = x0 * y2 + x2 * y0 + a * (x1 * y3 - x3 * y1)
    z3 = x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1
    return QuatElem._make(alg, (z0, z1, z2, z3))


def reduced_norm(x: QuatElem) -> QuadElem:
    """N(x) = x0² − a x1² − b x2² + ab x3²."""
    a, b = x.algebra.a, x.algebra.b
    x0, x1, x2, x3 = x.coords
    return x0 * x0 - a * (x1 * x1) - b * (x2 * x2) + a * b * (x3 * x3)


def quat_conj(x: QuatElem) -> QuatElem:
    x0, x1, x2, x3 = x.coords
    return QuatElem._make(x.algebra, (x0, -x1, -x2, -x3))


def quat_inverse(x: QuatElem) -> QuatElem:
    n = reduced_norm(x)
    if n.is_zero():
        raise NotInvertible(f"{x} has reduced norm 0")
    ninv = n.inverse()
    return QuatElem._make(x.algebra, tuple(c * ninv for c in quat_conj(x).coords))


def bilinear(x: QuatElem, y: QuatElem) -> QuadElem:
    """The polar form of the reduced norm: scalar part of x·conj(y)."""
    return quat_mul(x, quat_conj(y)).coords[0]


# ---------------------------------------------------------------------------
# splitting and presentations


def is_split_at(alg: AlgebraDesc, e: Embedding) -> bool:
    """Whether (a, b) ⊗ R is M₂(R) under e: true unless σ(a) and σ(b) are both negative."""
    return quad_sign(alg.a, e) > 0 or quad_sign(alg.b, e) > 0


class AlgebraIso:
    """An isomorphism target → source given by the images u, v of the target's i', j'.

    ``u`` and ``v`` are anticommuting pure quaternions of the source algebra with
    u² = a', v² = b'.
    """

    def __init__(self, source: AlgebraDesc, target: AlgebraDesc, u: QuatElem, v: QuatElem):
        self.source = source
        self.target = target
        self.basis = (source.one, u, v, quat_mul(u, v))
        self._norms = tuple(reduced_norm(w) for w in self.basis)

    def to_source(self, x: QuatElem) -> QuatElem:
        """Map an element of the target algebra into the source algebra."""
        if x.algebra != self.target:
            raise AlgebraMismatch("element is not in the target algebra")
        out = self.source.elem()
        for c, w in zip(x.coords, self.basis):
            out = out + w * c
        return out

    def to_target(self, x: QuatElem) -> QuatElem:
        """Coordinates of a source element in the target basis (orthogonal projection)."""
        if x.algebra != self.source:
            raise AlgebraMismatch("element is not in the source algebra")
        coords = tuple(bilinear(x, w) / n for w, n in zip(self.basis, self._norms))
        return QuatElem._make(self.target, coords)

    def is_identity(self) -> bool:
        return self.source == self.target and self.basis[1] == self.source.i and self.basis[2] == self.source.j

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "i_image": self.basis[1].to_json(),
            "j_image": self.basis[2].to_json(),
        }


def identity_iso(alg: AlgebraDesc) -> AlgebraIso:
    return AlgebraIso(alg, alg, alg.i, alg.j)


def scaling_equiv(alg: AlgebraDesc, c) -> tuple[AlgebraDesc, AlgebraIso]:
    """(a, b) ≅ (c²a, c²b): the new generators are c·i and c·j."""
    c = _to_quad(c, alg.field)
    if c.is_zero():
        raise ValueError("scaling factor must be nonzero")
    target = AlgebraDesc(alg.field, c * c * alg.a, c * c * alg.b)
    return target, AlgebraIso(alg, target, alg.i * c, alg.j * c)


def _anticommuting_partner(u: QuatElem) -> QuatElem | None:
    alg = u.algebra
    basis = (alg.i, alg.j, alg.k)
    for w in basis:
        if bilinear(u, w).is_zero() and not reduced_norm(w).is_zero() and not _parallel(u, w):
            return w
    for w in basis:
        v = (quat_mul(u, w) - quat_mul(w, u)) * Fraction(1, 2)
        if any(not c.is_zero() for c in v.coords) and not reduced_norm(v).is_zero():
            return v
    return None


def _parallel(u: QuatElem, w: QuatElem) -> bool:
    cu, cw = u.coords[1:], w.coords[1:]
    for p in range(3):
        for q in range(p + 1, 3):
            if not (cu[p] * cw[q] - cu[q] * cw[p]).is_zero():
                return False
    return True


def _pure_candidates(alg: AlgebraDesc, bound: int) -> Iterator[QuatElem]:
    f = alg.field
    rank = f.degree
    seen = set()
    for h in range(1, bound + 1):
        rng = range(-h, h + 1)
        for ints in product(rng, repeat=3 * rank):
            if max(abs(t) for t in ints) != h:
                continue
            cs = [f.from_int_coords(*ints[s * rank : (s + 1) * rank]) for s in range(3)]
            if all(c.is_zero() for c in cs):
                continue
            key = tuple(cs)
            if key in seen:
                continue
            seen.add(key)
            yield alg.elem(0, *cs)


def normalize_positive_a(alg: AlgebraDesc, search_bound: int = 3) -> tuple[AlgebraDesc, AlgebraIso]:
    """Find a presentation with σ(a) > 0 at every split embedding.

    Tried in order: the algebra itself, the swap (b, a), then pure quaternions
    u with integral coordinates of height ≤ ``search_bound`` whose square is
    positive at all split places, each paired with an anticommuting partner.
    """
    if alg.is_normalized():
        return alg, identity_iso(alg)
    swapped = AlgebraDesc(alg.field, alg.b, alg.a)
    if swapped.is_normalized():
        return swapped, AlgebraIso(alg, swapped, alg.j, alg.i)
    for u in _pure_candidates(alg, search_bound):
        a_new = quat_mul(u, u).coords[0]
        if a_new.is_zero() or not all(quad_sign(a_new, e) > 0 for e in alg.split_embeddings):
            continue
        v = _anticommuting_partner(u)
        if v is None:
            continue
        b_new = quat_mul(v, v).coords[0]
        target = AlgebraDesc(alg.field, a_new, b_new)
        if target.split_embeddings != alg.split_embeddings or not target.is_normalized():
            continue
        return target, AlgebraIso(alg, target, u, v)
    raise NotNormalizable(f"no normalized presentation of {alg} within height {search_bound}")


# ---------------------------------------------------------------------------
# matrix representation


def tau(alg: AlgebraDesc, e: Embedding, x: QuatElem):
    """The matrix [[x0 + x1√a, x2 + x3√a], [b(x2 − x3√a), x0 − x1√a]] under e."""
    from .moebius import Mat2R

    if x.algebra != alg:
        raise AlgebraMismatch("element belongs to a different algebra")
    if not is_split_at(alg, e):
        raise NotSplit(f"{alg} is ramified at {e}")
    if quad_sign(alg.a, e) <= 0:
        raise NegativeRadicand(f"σ{e.index}(a) ≤ 0; normalize the presentation first")
    a, b = alg.a, alg.b
    x0, x1, x2, x3 = x.coords
    return Mat2R(
        TowerElem(a, x0, x1),
        TowerElem(a, x2, x3),
        TowerElem(a, b * x2, -(b * x3)),
        TowerElem(a, x0, -x1),
        e,
    )


# ---------------------------------------------------------------------------
# orders, units and congruence subgroups


@dataclass(frozen=True)
class OrderSpec:
    """The O_F-span of the quaternionic basis of ``algebra``."""

    algebra: AlgebraDesc

    def __post_init__(self):
        if not self.algebra.is_integral():
            raise ValueError("the basis spans an order only when a and b are integral")

    def contains(self, x: QuatElem) -> bool:
        return x.algebra == self.algebra and x.is_integral()


@dataclass(frozen=True)
class GroupSpec:
    """Norm-one units of ``order`` congruent to 1 mod ``level``, in a height window."""

    order: OrderSpec
    level: int = 1
    height: int = 1

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be ≥ 1")
        if self.height < 1:
            raise ValueError("height must be ≥ 1")

    @property
    def algebra(self) -> AlgebraDesc:
        return self.order.algebra

    def to_json(self) -> dict:
        return {"algebra": self.algebra.to_json(), "level": self.level, "height": self.height}


class _IntRing:
    """O_F on integer coordinate pairs (p, q) = p + q·ω."""

    def __init__(self, field: QuadField):
        self.d = field.d
        self.rank = field.degree
        self.half = field.d % 4 == 1 and field.d != 1
        # ω² = c0 + c1·ω
        if self.rank == 1:
            self.w2 = (0, 0)
        elif self.half:
            self.w2 = ((field.d - 1) // 4, 1)
        else:
            self.w2 = (field.d, 0)

    def mul(self, x, y):
        if self.rank == 1:
            return (x[0] * y[0], 0)
        p1, q1 = x
        p2, q2 = y
        qq = q1 * q2
        return (p1 * p2 + qq * self.w2[0], p1 * q2 + q1 * p2 + qq * self.w2[1])

    def of(self, elem: QuadElem):
        if not elem.is_integral():
            raise ValueError(f"{elem} is not integral")
        p, q = elem.int_coords()
        return (int(p), int(q))


def enumerate_norm_one(g: GroupSpec) -> list[QuatElem]:
    """Every x in the order with N(x) = 1 and all integer coordinates within ±height.

    Sorted lexicographically by integer coordinates.  Computed by matching
    x0² − a x1² against 1 + b(x2² − a x3²) through a hash table.
    """
    return list(_enumerate_norm_one(g.algebra, g.height))


@lru_cache(maxsize=32)
def _enumerate_norm_one(alg: AlgebraDesc, height: int) -> tuple[QuatElem, ...]:
    ring = _IntRing(alg.field)
    a = ring.of(alg.a)
    b = ring.of(alg.b)
    rng = range(-height, height + 1)
    if ring.rank == 1:
        elems = [(p, 0) for p in rng]
    else:
        elems = [(p, q) for p in rng for q in rng]
    squares = {e: ring.mul(e, e) for e in elems}

    def binary(s, t):
        # s² − a t²
        ss, tt = squares[s], ring.mul(a, squares[t])
        return (ss[0] - tt[0], ss[1] - tt[1])

    left: dict[tuple, list] = {}
    for s in elems:
        for t in elems:
            left.setdefault(binary(s, t), []).append((s, t))
    sols = []
    for s in elems:
        for t in elems:
            q = ring.mul(b, binary(s, t))
            target = (1 + q[0], q[1])
            for pair in left.get(target, ()):
                sols.append((pair[0], pair[1], s, t))
    f = alg.field
    rank = ring.rank

    def key(sol):
        return tuple(c for coord in sol for c in coord[:rank])

    sols.sort(key=key)
    out = []
    for sol in sols:
        coords = tuple(f.from_int_coords(p, q) for p, q in sol)
        out.append(QuatElem._make(alg, coords))
    return tuple(out)


def in_congruence_subgroup(x: QuatElem, g: GroupSpec) -> bool:
    """Whether every coordinate of x − 1 lies in m·O_F (x must lie in the order)."""
    if not g.order.contains(x):
        raise NotInOrder(f"{x} is not in the order")
    m = g.level
    y = x - 1
    for c in y.coords:
        p, q = c.int_coords()
        if p % m or q % m:
            return False
    return True


def is_polar_regular(x: QuatElem) -> bool:
    """Whether τ_e(x) has two distinct real eigenvalues at every split embedding."""
    n = reduced_norm(x)
    if n.is_zero():
        raise NotInvertible(f"{x} has reduced norm 0")
    x0 = x.coords[0]
    disc = x0 * x0 - n
    return all(quad_sign(disc, e) > 0 for e in x.algebra.split_embeddings)


def congruence_window(g: GroupSpec) -> list[QuatElem]:
    """The enumerated units that lie in the principal congruence subgroup."""
    return [x for x in enumerate_norm_one(g) if in_congruence_subgroup(x, g)]


def reduce_mod(x: QuatElem, m: int) -> tuple[int, ...]:
    """Integer coordinates of x reduced modulo m (image in (O_F/m)^4)."""
    return tuple(c % m for c in x.int_coords())


def congruence_period(x: QuatElem, m: int, limit: int = 100000) -> int:
    """Smallest k ≥ 1 with x^k ≡ 1 mod m (coordinatewise in O_F); x must lie in the order.

    Powers are reduced mod m at every step, so the walk stays in the finite ring.
    """
    g = GroupSpec(OrderSpec(x.algebra), m)
    f = x.algebra.field

    def reduced(y: QuatElem) -> QuatElem:
        ints = reduce_mod(y, m)
        rank = f.degree
        coords = [f.from_int_coords(*(ints[i * rank:(i + 1) * rank] + (0,) * (2 - rank))) for i in range(4)]
        return QuatElem(x.algebra, *coords)

    base = reduced(x)
    y = base
    for k in range(1, limit + 1):
        if in_congruence_subgroup(y, g):
            return k
        y = reduced(y * base)
    raise ArithmeticError(f"no power of {x} up to {limit} lies in level {m}")
