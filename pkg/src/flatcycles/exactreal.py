"""Exact arithmetic in the tower Q ⊂ Q(√d) ⊂ Q(√d)(√a).

Every sign is decided exactly.  Real approximations are only ever produced as
dyadic intervals that are guaranteed to contain the embedded value.

Boundary points of the hyperbolic plane that are not in the tower (fixed points
of hyperbolic matrices) are :class:`AlgebraicReal` values: a root of a
polynomial of degree at most two over the tower, together with a dyadic
isolating interval.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from typing import Iterable, Sequence, Union

from .errors import DivisionByZero, NegativeRadicand, ParseError

Rational = Fraction
RationalLike = Union[int, Fraction]


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational number: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        if n % p == 0:
            n //= p
        p += 1
    return True


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None."""
    if q < 0:
        return None
    n, m = q.numerator, q.denominator
    rn, rm = math.isqrt(n), math.isqrt(m)
    if rn * rn == n and rm * rm == m:
        return Fraction(rn, rm)
    return None


# ---------------------------------------------------------------------------
# fields and embeddings


class QuadField:
    """The field Q(√d) for square-free d > 1; ``d == 1`` stands for Q itself."""

    __slots__ = ("d",)

    def __init__(self, d: int):
        d = int(d)
        if d != 1 and (d < 2 or not is_squarefree(d)):
            raise ValueError(f"d must be a square-free integer > 1 (or 1 for Q), got {d}")
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("QuadField is immutable")

    def __eq__(self, other):
        return isinstance(other, QuadField) and other.d == self.d

    def __hash__(self):
        return hash(("QuadField", self.d))

    def __repr__(self):
        return "QQ" if self.d == 1 else f"QuadField({self.d})"

    def __str__(self):
        return "Q" if self.d == 1 else f"Q(√{self.d})"

    def __reduce__(self):
        return (QuadField, (self.d,))

    @property
    def degree(self) -> int:
        return 1 if self.d == 1 else 2

    def embeddings(self) -> tuple[Embedding, ...]:
        return (SIGMA1,) if self.d == 1 else (SIGMA1, SIGMA2)

    def __call__(self, x: RationalLike = 0, y: RationalLike = 0) -> QuadElem:
        return QuadElem(self, x, y)

    @property
    def zero(self) -> QuadElem:
        return QuadElem._make(self, _ZERO, _ZERO)

    @property
    def one(self) -> QuadElem:
        return QuadElem._make(self, _ONE, _ZERO)

    @property
    def sqrt_d(self) -> QuadElem:
        if self.d == 1:
            raise ValueError("Q has no √d generator")
        return QuadElem._make(self, _ZERO, _ONE)

    @property
    def omega(self) -> QuadElem:
        """Second element of the integral basis {1, ω} of O_F."""
        if self.d == 1:
            raise ValueError("Z has rank one")
        if self.d % 4 == 1:
            return QuadElem._make(self, Fraction(1, 2), Fraction(1, 2))
        return self.sqrt_d

    def from_int_coords(self, p: int, q: int = 0) -> QuadElem:
        """The element p + q·ω of O_F."""
        if self.d == 1:
            if q:
                raise ValueError("Z has rank one")
            return QuadElem._make(self, Fraction(p), _ZERO)
        if self.d % 4 == 1:
            return QuadElem._make(self, Fraction(2 * p + q, 2), Fraction(q, 2))
        return QuadElem._make(self, Fraction(p), Fraction(q))

    def parse(self, text: str) -> QuadElem:
        return parse_quad(text, self)


@dataclass(frozen=True, slots=True)
class Embedding:
    """A real embedding of Q(√d): index 1 sends √d to +√d, index 2 to −√d.

    Tower elements u + v√a are embedded with √a sent to the positive root of
    σ(a), which only makes sense when σ(a) > 0.
    """

    index: int

    def __post_init__(self):
        if self.index not in (1, 2):
            raise ValueError(f"embedding index must be 1 or 2, got {self.index}")

    @property
    def root_sign(self) -> int:
        return 1 if self.index == 1 else -1

    def __str__(self):
        return f"σ{self.index}"


SIGMA1 = Embedding(1)
SIGMA2 = Embedding(2)

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _check_embedding(field: QuadField, e: Embedding) -> None:
    # Q embeds identically under either index, so any index is valid there
    if not isinstance(e, Embedding):
        raise TypeError(f"expected an Embedding, got {type(e).__name__}")


# ---------------------------------------------------------------------------
# Q(√d)


class QuadElem:
    """x + y√d with rational x, y.  Immutable."""

    __slots__ = ("field", "x", "y")

    def __init__(self, field: QuadField, x: RationalLike = 0, y: RationalLike = 0):
        x, y = _frac(x), _frac(y)
        if field.d == 1 and y:
            raise ValueError("elements of Q have no √d part")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def _make(cls, field, x, y):
        obj = object.__new__(cls)
        object.__setattr__(obj, "field", field)
        object.__setattr__(obj, "x", x)
        object.__setattr__(obj, "y", y)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("QuadElem is immutable")

    def __reduce__(self):
        return (QuadElem, (self.field, self.x, self.y))

    # coercion -------------------------------------------------------------
    def _coerce(self, other) -> QuadElem | None:
        if isinstance(other, QuadElem):
            if other.field is self.field or other.field == self.field:
                return other
            if other.field.d == 1:
                return QuadElem._make(self.field, other.x, _ZERO)
            if self.field.d == 1:
                return None
            raise ValueError(f"cannot mix elements of {self.field} and {other.field}")
        if isinstance(other, (int, Fraction)):
            return QuadElem._make(self.field, Fraction(other), _ZERO)
        return None

    def _lift(self, other: QuadElem) -> QuadElem:
        # self lives in Q and other in a larger field
        return QuadElem._make(other.field, self.x, _ZERO)

    # arithmetic ----------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, QuadElem):
                return self._lift(other) + other
            return NotImplemented
        return QuadElem._make(self.field, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, QuadElem):
                return self._lift(other) - other
            return NotImplemented
        return QuadElem._make(self.field, self.x - o.x, self.y - o.y)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return TowerElem.lift(other) - self
        return o - self

    def __neg__(self):
        return QuadElem._make(self.field, -self.x, -self.y)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuadElem._make(self.field, self.x * other, self.y * other)
        o = self._coerce(other)
        if o is None:
            if isinstance(other, QuadElem):
                return self._lift(other) * other
            return NotImplemented
        if not self.y and not o.y:
            return QuadElem._make(self.field, self.x * o.x, _ZERO)
        d = self.field.d
        return QuadElem._make(
            self.field,
            self.x * o.x + d * self.y * o.y,
            self.x * o.y + self.y * o.x,
        )

    __rmul__ = __mul__

    def inverse(self) -> QuadElem:
        n = self.norm()
        if not n:
            raise DivisionByZero("inverse of zero in Q(√d)")
        return QuadElem._make(self.field, self.x / n, -self.y / n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise DivisionByZero("division by zero")
            return QuadElem._make(self.field, self.x / other, self.y / other)
        o = self._coerce(other)
        if o is None:
            if isinstance(other, QuadElem):
                return self._lift(other) / other
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return TowerElem.lift(other) / self
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # structure -----------------------------------------------------------
    def conj(self) -> QuadElem:
        return QuadElem._make(self.field, self.x, -self.y)

    def norm(self) -> Fraction:
        return self.x * self.x - self.field.d * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x

    def is_zero(self) -> bool:
        return not self.x and not self.y

    def __bool__(self):
        return bool(self.x) or bool(self.y)

    def is_rational(self) -> bool:
        return not self.y

    def int_coords(self) -> tuple[Fraction, Fraction]:
        """Coordinates (p, q) with self = p + q·ω in the integral basis {1, ω}."""
        if self.field.d % 4 == 1 and self.field.d != 1:
            return (self.x - self.y, 2 * self.y)
        return (self.x, self.y)

    def is_integral(self) -> bool:
        p, q = self.int_coords()
        return p.denominator == 1 and q.denominator == 1

    def sign(self, e: Embedding) -> int:
        return quad_sign(self, e)

    def approx(self, e: Embedding) -> float:
        return self.x + e.root_sign * float(self.y) * math.sqrt(self.field.d) if self.y else float(self.x)

    def __eq__(self, other):
        if isinstance(other, QuadElem):
            if other.field != self.field:
                if self.y or other.y:
                    return False
            return self.x == other.x and self.y == other.y
        if isinstance(other, (int, Fraction)):
            return not self.y and self.x == other
        return NotImplemented

    def __hash__(self):
        if not self.y:
            return hash(self.x)
        return hash((self.field.d, self.x, self.y))

    def __repr__(self):
        return f"QuadElem({self.field.d}, {str(self.x)!r}, {str(self.y)!r})"

    def __str__(self):
        return format_quad(self)

    def to_json(self) -> dict:
        return {"d": self.field.d, "x": str(self.x), "y": str(self.y)}

    @classmethod
    def from_json(cls, data: dict) -> QuadElem:
        return cls(QuadField(int(data["d"])), _frac(str(data["x"])), _frac(str(data.get("y", "0"))))


QQ = QuadField(1)


def quad_sign(x: QuadElem, e: Embedding) -> int:
    """Exact sign of σ_e(x) = x ± y√d."""
    _check_embedding(x.field, e)
    sx = (x.x > 0) - (x.x < 0)
    sy = ((x.y > 0) - (x.y < 0)) * e.root_sign
    if not sy:
        return sx
    if not sx or sx == sy:
        return sy
    # opposite signs: compare x² with d·y²
    diff = x.x * x.x - x.field.d * x.y * x.y
    if diff > 0:
        return sx
    if diff < 0:
        return sy
    return 0


def format_quad(x: QuadElem) -> str:
    if not x.y:
        return str(x.x)
    coeff = abs(x.y)
    tail = "√d" if coeff == 1 else f"{coeff}√d"
    if not x.x:
        return ("-" if x.y < 0 else "") + tail
    return f"{x.x}{'-' if x.y < 0 else '+'}{tail}"


_TERM = re.compile(r"([+-])?(\d+(?:/\d+)?)?(\*?√d)?")


def parse_quad(text: str, field: QuadField) -> QuadElem:
    """Parse strings like ``"1"``, ``"-3/2"``, ``"0+1√d"``, ``"1-√d"``, ``"2√2"``.

    ``sqrt(d)``, ``sqrtd`` and ``√<d>`` with the literal value of d are accepted
    in place of ``√d``.
    """
    if not isinstance(text, str):
        raise ParseError(f"expected a string, got {type(text).__name__}")
    s = text.replace(" ", "").replace("sqrt(d)", "√d").replace("sqrtd", "√d")
    if field.d != 1:
        s = s.replace(f"sqrt({field.d})", "√d").replace(f"√{field.d}", "√d")
    s = s.replace("+-", "-").replace("-+", "-").replace("--", "+")
    if not s:
        raise ParseError("empty number")
    x, y = Fraction(0), Fraction(0)
    pos = 0
    seen = False
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos or (m.group(2) is None and m.group(3) is None):
            raise ParseError(f"cannot parse {text!r} as an element of {field}")
        if seen and m.group(1) is None:
            raise ParseError(f"cannot parse {text!r} as an element of {field}")
        sign = -1 if m.group(1) == "-" else 1
        coeff = Fraction(m.group(2)) if m.group(2) else Fraction(1)
        if m.group(3):
            if field.d == 1:
                raise ParseError(f"{text!r} uses √d but the field is Q")
            y += sign * coeff
        else:
            x += sign * coeff
        pos = m.end()
        seen = True
    return QuadElem(field, x, y)


def quad_sqrt(q: QuadElem) -> QuadElem | None:
    """An exact square root of q inside its own field, or None."""
    # rationals compare equal across fields, so the cache key carries d explicitly
    return _quad_sqrt(q.field.d, q.x, q.y)


@lru_cache(maxsize=4096)
def _quad_sqrt(d: int, x: Fraction, y: Fraction) -> QuadElem | None:
    f = QuadField(d)
    q = QuadElem._make(f, x, y)
    if not q.y:
        r = rational_sqrt(q.x)
        if r is not None:
            return QuadElem._make(f, r, _ZERO)
        if f.d == 1:
            return None
        r = rational_sqrt(q.x / f.d)
        return None if r is None else QuadElem._make(f, _ZERO, r)
    n = rational_sqrt(q.x * q.x - f.d * q.y * q.y)
    if n is None:
        return None
    for cand in (n, -n):
        p = rational_sqrt((q.x + cand) / 2)
        if p:
            root = QuadElem._make(f, p, q.y / (2 * p))
            if root * root == q:
                return root
    return None


# ---------------------------------------------------------------------------
# Q(√d)(√a)


class TowerElem:
    """u + v√a with u, v, a in Q(√d) and a ≠ 0.  Immutable.

    When a is a square in Q(√d) the quotient ring is not a field; such elements
    must be :meth:`reduced` under an embedding before they are divided.
    """

    __slots__ = ("a", "u", "v")

    def __init__(self, a: QuadElem, u, v=0):
        if not isinstance(a, QuadElem):
            raise TypeError("radicand must be a QuadElem")
        if a.is_zero():
            raise ValueError("radicand must be nonzero")
        u = _as_quad(u, a.field)
        v = _as_quad(v, a.field)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def _make(cls, a, u, v):
        obj = object.__new__(cls)
        object.__setattr__(obj, "a", a)
        object.__setattr__(obj, "u", u)
        object.__setattr__(obj, "v", v)
        return obj

    @classmethod
    def lift(cls, value, radicand: QuadElem | None = None, field: QuadField | None = None) -> TowerElem:
        """Embed a rational, QuadElem or TowerElem into a tower."""
        if isinstance(value, TowerElem):
            if radicand is None or (value.a == radicand and value.a.field == radicand.field):
                return value
            if value.v.is_zero():
                return cls._make(radicand, _as_quad(value.u, radicand.field), radicand.field.zero)
            raise ValueError("cannot move an element between different towers")
        if radicand is None:
            fld = value.field if isinstance(value, QuadElem) else (field or QQ)
            radicand = fld.one
        u = _as_quad(value, radicand.field)
        return cls._make(radicand, u, radicand.field.zero)

    def __setattr__(self, name, value):
        raise AttributeError("TowerElem is immutable")

    def __reduce__(self):
        return (TowerElem, (self.a, self.u, self.v))

    @property
    def field(self) -> QuadField:
        return self.a.field

    def _coerce(self, other) -> TowerElem | None:
        """``other`` inside this tower, or None when a wider tower is needed."""
        if isinstance(other, TowerElem):
            if other.a is self.a:
                return other
            if other.a == self.a and other.a.field == self.a.field and other.u.field == self.u.field:
                return other
            f = self.a.field
            if not other.v and (other.u.field == f or other.u.field.d == 1):
                return TowerElem._make(self.a, _as_quad(other.u, f), f.zero)
            return None
        if isinstance(other, (int, Fraction)):
            return TowerElem._make(self.a, _as_quad(other, self.a.field), self.a.field.zero)
        if isinstance(other, QuadElem):
            if other.field == self.a.field or other.field.d == 1:
                return TowerElem._make(self.a, _as_quad(other, self.a.field), self.a.field.zero)
            return None
        return None

    def _rebase(self, other) -> tuple[TowerElem, TowerElem]:
        """Both operands inside the smallest common tower (sharing one radicand object)."""
        if not isinstance(other, TowerElem):
            other = TowerElem.lift(other)
        fields = {t.field for t in (self.a, self.u, self.v, other.a, other.u, other.v) if t.field.d != 1}
        if len(fields) > 1:
            raise ValueError("tower elements over different quadratic fields")
        f = fields.pop() if fields else QQ
        if self.v and other.v and self.a != other.a:
            raise ValueError("tower elements with different radicands")
        rad = _as_quad(self.a if self.v or not other.v else other.a, f)

        def move(t):
            return TowerElem._make(rad, _as_quad(t.u, f), _as_quad(t.v, f))

        return move(self), move(other)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (TowerElem, QuadElem)):
                x, y = self._rebase(other)
                return x + y
            return NotImplemented
        return TowerElem._make(self.a, self.u + o.u, self.v + o.v)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (TowerElem, QuadElem)):
                x, y = self._rebase(other)
                return x - y
            return NotImplemented
        return TowerElem._make(self.a, self.u - o.u, self.v - o.v)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return TowerElem.lift(other) - self
        return o - self

    def __neg__(self):
        return TowerElem._make(self.a, -self.u, -self.v)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return TowerElem._make(self.a, self.u * other, self.v * other)
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (TowerElem, QuadElem)):
                x, y = self._rebase(other)
                return x * y
            return NotImplemented
        if not self.v and not o.v:
            return TowerElem._make(self.a, self.u * o.u, self.v)
        return TowerElem._make(
            self.a,
            self.u * o.u + self.a * self.v * o.v,
            self.u * o.v + self.v * o.u,
        )

    __rmul__ = __mul__

    def conj(self) -> TowerElem:
        return TowerElem._make(self.a, self.u, -self.v)

    def norm(self) -> QuadElem:
        """u² − a v², the relative norm down to Q(√d)."""
        if not self.v:
            return self.u * self.u
        return self.u * self.u - self.a * self.v * self.v

    def inverse(self) -> TowerElem:
        if self.is_zero():
            raise DivisionByZero("inverse of zero in the tower")
        if not self.v:
            return TowerElem._make(self.a, self.u.inverse(), self.v)
        n = self.norm()
        if n.is_zero():
            raise DivisionByZero("zero divisor: the radicand is a square; reduce under an embedding first")
        ninv = n.inverse()
        return TowerElem._make(self.a, self.u * ninv, -self.v * ninv)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise DivisionByZero("division by zero")
            return TowerElem._make(self.a, self.u / other, self.v / other)
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (TowerElem, QuadElem)):
                x, y = self._rebase(other)
                return x / y
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return TowerElem.lift(other) / self
        return o * self.inverse()

    def is_zero(self) -> bool:
        return self.u.is_zero() and self.v.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def in_base(self) -> bool:
        return self.v.is_zero()

    def is_rational(self) -> bool:
        return self.v.is_zero() and self.u.is_rational()

    def reduced(self, e: Embedding) -> TowerElem:
        """Rewrite with v = 0 when √a already lies in Q(√d), keeping the value under ``e``."""
        if not self.v:
            return self
        s = quad_sqrt(self.a)
        if s is None:
            return self
        if quad_sign(s, e) < 0:
            s = -s
        return TowerElem._make(self.a, self.u + self.v * s, self.a.field.zero)

    def sign(self, e: Embedding) -> int:
        return tower_sign(self, e)

    def approx(self, e: Embedding) -> float:
        av = self.a.approx(e)
        if self.v and av <= 0:
            raise NegativeRadicand(f"σ{e.index}(a) ≤ 0")
        return self.u.approx(e) + (self.v.approx(e) * math.sqrt(av) if self.v else 0.0)

    def __eq__(self, other):
        if isinstance(other, TowerElem):
            if other.a == self.a:
                return self.u == other.u and self.v == other.v
            return not self.v and not other.v and self.u == other.u
        if isinstance(other, (int, Fraction, QuadElem)):
            return not self.v and self.u == other
        return NotImplemented

    def __hash__(self):
        if not self.v:
            return hash(self.u)
        return hash((self.a, self.u, self.v))

    def __repr__(self):
        return f"TowerElem(a={self.a}, u={self.u}, v={self.v})"

    def __str__(self):
        if not self.v:
            return str(self.u)
        return f"({self.u})+({self.v})√({self.a})"


def _as_quad(value, field: QuadField) -> QuadElem:
    if isinstance(value, QuadElem):
        if value.field == field:
            return value
        if value.field.d == 1:
            return QuadElem._make(field, value.x, _ZERO)
        raise ValueError(f"cannot move {value} into {field}")
    if isinstance(value, (int, Fraction)):
        return QuadElem._make(field, Fraction(value), _ZERO)
    raise TypeError(f"cannot interpret {type(value).__name__} as an element of {field}")


def tower_sign(t: TowerElem, e: Embedding) -> int:
    """Exact sign of σ̃_e(u + v√a), with √a sent to the positive root."""
    if quad_sign(t.a, e) <= 0:
        raise NegativeRadicand(f"σ{e.index}({t.a}) ≤ 0; the branch of √a is undefined")
    su = quad_sign(t.u, e)
    if not t.v:
        return su
    sv = quad_sign(t.v, e)
    if not sv:
        return su
    if not su or su == sv:
        return sv
    diff = quad_sign(t.u * t.u - t.a * t.v * t.v, e)
    if diff > 0:
        return su
    if diff < 0:
        return sv
    return 0


def tower_compare(x: TowerElem, y: TowerElem, e: Embedding) -> int:
    return tower_sign(x - y, e)


# ---------------------------------------------------------------------------
# dyadic intervals


def _is_dyadic(q: Fraction) -> bool:
    den = q.denominator
    return den & (den - 1) == 0


def _round_out(lo: Fraction, hi: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    scale = 1 << bits
    return (Fraction(math.floor(lo * scale), scale), Fraction(math.ceil(hi * scale), scale))


def _sqrt_bounds(q: Fraction, k: int) -> tuple[Fraction, Fraction]:
    """Dyadic [lo, hi] of width ≤ 2^-k containing √q, q ≥ 0."""
    scale = 1 << (2 * k)
    n_lo = math.floor(q * scale)
    r = math.isqrt(n_lo)
    n_hi = math.ceil(q * scale)
    s = math.isqrt(n_hi)
    if s * s < n_hi:
        s += 1
    return (Fraction(r, 1 << k), Fraction(s, 1 << k))


def _imul(a: tuple, b: tuple) -> tuple:
    p = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(p), max(p))


def _quad_interval(x: QuadElem, e: Embedding, k: int) -> tuple[Fraction, Fraction]:
    if not x.y:
        return (x.x, x.x)
    lo, hi = _sqrt_bounds(Fraction(x.field.d), k)
    c = x.y * e.root_sign
    a, b = (c * lo, c * hi) if c > 0 else (c * hi, c * lo)
    return (x.x + a, x.x + b)


def _tower_interval(t: TowerElem, e: Embedding, k: int) -> tuple[Fraction, Fraction]:
    u = _quad_interval(t.u, e, k)
    if not t.v:
        return u
    alo, ahi = _quad_interval(t.a, e, k)
    while alo <= 0:
        if quad_sign(t.a, e) <= 0:
            raise NegativeRadicand(f"σ{e.index}({t.a}) ≤ 0")
        k += 8
        alo, ahi = _quad_interval(t.a, e, k)
    r = (_sqrt_bounds(alo, k)[0], _sqrt_bounds(ahi, k)[1])
    v = _quad_interval(t.v, e, k)
    w = _imul(v, r)
    return (u[0] + w[0], u[1] + w[1])


def _magnitude_bits(*values: Fraction) -> int:
    m = max((abs(v) for v in values), default=Fraction(0))
    return max(int(m).bit_length(), 0)


def embed_approx(x, e: Embedding, precision_bits: int) -> tuple[Fraction, Fraction]:
    """Dyadic interval of width ≤ 2^-precision_bits containing the embedded value."""
    if precision_bits < 1:
        raise ValueError("precision_bits must be ≥ 1")
    if isinstance(x, AlgebraicReal):
        if x.embedding != e:
            raise ValueError("AlgebraicReal carries a different embedding")
        y = x.refine(precision_bits)
        return (y.lo, y.hi)
    if isinstance(x, (int, Fraction)):
        q = Fraction(x)
        if _is_dyadic(q):
            return (q, q)
        return _round_out(q, q, precision_bits)
    if isinstance(x, QuadElem):
        _check_embedding(x.field, e)
        if not x.y and _is_dyadic(x.x):
            return (x.x, x.x)
        interval = lambda k: _quad_interval(x, e, k)  # noqa: E731
        extra = _magnitude_bits(x.y) + 4
    elif isinstance(x, TowerElem):
        _check_embedding(x.field, e)
        if quad_sign(x.a, e) <= 0:
            raise NegativeRadicand(f"σ{e.index}({x.a}) ≤ 0")
        if x.is_rational() and _is_dyadic(x.u.x):
            return (x.u.x, x.u.x)
        interval = lambda k: _tower_interval(x, e, k)  # noqa: E731
        extra = _magnitude_bits(x.u.y, x.v.x, x.v.y, x.a.x, x.a.y) + 6
    else:
        raise TypeError(f"cannot approximate {type(x).__name__}")
    target = Fraction(1, 1 << (precision_bits + 1))
    k = precision_bits + extra
    while True:
        lo, hi = interval(k)
        if hi - lo <= target:
            return _round_out(lo, hi, precision_bits + 2)
        k += 16


def format_dyadic(q: Fraction) -> str:
    den = q.denominator
    if den & (den - 1):
        raise ValueError(f"{q} is not dyadic")
    return f"{q.numerator}/2^{den.bit_length() - 1}"


def parse_dyadic(text: str) -> Fraction:
    m = re.fullmatch(r"\s*(-?\d+)\s*/\s*2\^(\d+)\s*", text)
    if not m:
        raise ParseError(f"not a dyadic rational: {text!r}")
    return Fraction(int(m.group(1)), 1 << int(m.group(2)))


# ---------------------------------------------------------------------------
# polynomials of degree ≤ 2 over the tower


Poly = tuple  # coefficients low → high, TowerElem entries


def _poly_eval(p: Sequence[TowerElem], q: Fraction) -> TowerElem:
    acc = p[-1]
    for c in reversed(p[:-1]):
        acc = acc * q + c
    return acc


def _poly_strip(p: Sequence[TowerElem]) -> list[TowerElem]:
    p = list(p)
    while p and p[-1].is_zero():
        p.pop()
    return p


def _poly_mod(a: list[TowerElem], b: list[TowerElem]) -> list[TowerElem]:
    a = list(a)
    lead_inv = b[-1].inverse()
    while len(a) >= len(b) and a:
        factor = a[-1] * lead_inv
        shift = len(a) - len(b)
        for idx, c in enumerate(b):
            a[idx + shift] = a[idx + shift] - factor * c
        a.pop()
        a = _poly_strip(a)
    return a


def poly_gcd(a: Sequence[TowerElem], b: Sequence[TowerElem]) -> list[TowerElem]:
    """Greatest common divisor over the tower field (not normalized)."""
    a, b = _poly_strip(a), _poly_strip(b)
    while b:
        a, b = b, _poly_mod(a, b)
    return a


def _common_radicand(polys: Iterable[Sequence[TowerElem]]) -> QuadElem | None:
    radicand = None
    for p in polys:
        for c in p:
            if c.v:
                if radicand is None:
                    radicand = c.a
                elif c.a != radicand:
                    return None
    return radicand


def _rebase_poly(p: Sequence[TowerElem], radicand: QuadElem) -> tuple[TowerElem, ...]:
    return tuple(TowerElem.lift(c, radicand) for c in p)


# ---------------------------------------------------------------------------
# algebraic reals


class AlgebraicReal:
    """A real root of a degree ≤ 2 polynomial over the tower, under one embedding.

    Invariant: either ``lo == hi`` and the polynomial vanishes there, or the
    polynomial takes strictly opposite signs at ``lo`` and ``hi`` (so the open
    interval holds exactly one root).  ``lo`` and ``hi`` are dyadic.
    """

    __slots__ = ("coeffs", "embedding", "lo", "hi", "_slo")

    def __init__(self, coeffs: Sequence, embedding: Embedding, lo, hi):
        lo, hi = _frac(lo), _frac(hi)
        if not (_is_dyadic(lo) and _is_dyadic(hi)) or lo > hi:
            raise ValueError("isolating interval must be an ordered pair of dyadics")
        coeffs = _normalize_poly(coeffs, embedding)
        slo = tower_sign(_poly_eval(coeffs, lo), embedding)
        if lo == hi:
            if slo:
                raise ValueError("degenerate interval is not a root")
        else:
            shi = tower_sign(_poly_eval(coeffs, hi), embedding)
            if slo * shi >= 0:
                raise ValueError("interval does not isolate a simple root")
        self._set(coeffs, embedding, lo, hi, slo)

    def _set(self, coeffs, embedding, lo, hi, slo):
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "embedding", embedding)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "_slo", slo)

    @classmethod
    def _make(cls, coeffs, embedding, lo, hi, slo):
        obj = object.__new__(cls)
        obj._set(coeffs, embedding, lo, hi, slo)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraicReal is immutable")

    # constructors --------------------------------------------------------
    @classmethod
    def from_rational(cls, q: RationalLike, field: QuadField = QQ, embedding: Embedding = SIGMA1) -> AlgebraicReal:
        return cls.from_tower(TowerElem.lift(_frac(q), field=field), embedding)

    @classmethod
    def from_tower(cls, t, e: Embedding) -> AlgebraicReal:
        """The embedded value of a tower (or field) element."""
        if not isinstance(t, TowerElem):
            t = TowerElem.lift(t if isinstance(t, QuadElem) else _frac(t))
        t = t.reduced(e)
        one = TowerElem.lift(1, t.a)
        coeffs = (-t, one)
        if t.is_rational() and _is_dyadic(t.u.x):
            return cls._make(coeffs, e, t.u.x, t.u.x, 0)
        lo, hi = embed_approx(t, e, 48)
        if lo == hi:  # dyadic value that is not visibly rational
            return cls._make(coeffs, e, lo, lo, 0)
        return cls._make(coeffs, e, lo, hi, -1)

    @classmethod
    def roots(cls, coeffs: Sequence, e: Embedding) -> list[AlgebraicReal]:
        """All real roots of a polynomial of degree 1 or 2, in increasing order."""
        p = _normalize_poly(coeffs, e)
        if len(p) == 2:
            return [cls.from_tower(-p[0] / p[1], e)]
        return _quadratic_roots(p, e)

    # accessors -----------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def radicand(self) -> QuadElem:
        return self.coeffs[-1].a

    def tower_value(self) -> TowerElem | None:
        """The value as a tower element when the defining polynomial is linear."""
        if len(self.coeffs) != 2:
            return None
        return -self.coeffs[0] / self.coeffs[1]

    def is_rational(self) -> bool:
        t = self.tower_value()
        return t is not None and t.is_rational()

    def as_fraction(self) -> Fraction | None:
        t = self.tower_value()
        if t is None or not t.is_rational():
            return None
        return t.u.x

    def width(self) -> Fraction:
        return self.hi - self.lo

    def sign_at(self, q: Fraction) -> int:
        return tower_sign(_poly_eval(self.coeffs, q), self.embedding)

    def refine(self, bits: int) -> AlgebraicReal:
        """Bisect until the interval width is at most 2^-bits."""
        target = Fraction(1, 1 << bits) if bits >= 0 else Fraction(1 << -bits)
        lo, hi, slo = self.lo, self.hi, self._slo
        if hi - lo <= target:
            return self
        t = self.tower_value()
        if t is not None:
            # linear: approximate the value directly
            nlo, nhi = embed_approx(t, self.embedding, max(bits, 1))
            nlo, nhi = max(nlo, lo), min(nhi, hi)
            if nlo == nhi:
                return AlgebraicReal._make(self.coeffs, self.embedding, nlo, nhi, 0)
            if nlo == lo or nhi == hi:
                pass
            else:
                s1 = self.sign_at(nlo)
                if s1 == 0:
                    return AlgebraicReal._make(self.coeffs, self.embedding, nlo, nlo, 0)
                s2 = self.sign_at(nhi)
                if s2 == 0:
                    return AlgebraicReal._make(self.coeffs, self.embedding, nhi, nhi, 0)
                if s1 * s2 < 0:
                    return AlgebraicReal._make(self.coeffs, self.embedding, nlo, nhi, s1)
        else:
            # quadratic: start from a tight bracket around a float estimate
            guess = self._newton_guess()
            if guess is not None:
                res = self._try_bracket(guess)
                if res is not None:
                    if res.lo == res.hi:
                        return res
                    lo, hi, slo = res.lo, res.hi, res._slo
        while hi - lo > target:
            mid = (lo + hi) / 2
            s = self.sign_at(mid)
            if s == 0:
                return AlgebraicReal._make(self.coeffs, self.embedding, mid, mid, 0)
            if s == slo:
                lo = mid
            else:
                hi = mid
        return AlgebraicReal._make(self.coeffs, self.embedding, lo, hi, slo)

    def _newton_guess(self) -> float | None:
        try:
            c = [x.approx(self.embedding) for x in self.coeffs]
        except (OverflowError, ZeroDivisionError):
            return None
        c0, c1, c2 = c
        disc = c1 * c1 - 4 * c2 * c0
        if disc < 0 or c2 == 0:
            return None
        sq = math.sqrt(disc)
        q = -0.5 * (c1 + math.copysign(sq, c1))
        cands = [q / c2] + ([c0 / q] if q else [])
        lo, hi = float(self.lo), float(self.hi)
        inside = [r for r in cands if lo <= r <= hi]
        if len(inside) != 1:
            return None
        return inside[0]

    def _try_bracket(self, guess: float) -> AlgebraicReal | None:
        g = Fraction(guess)
        scale = Fraction(max(1.0, abs(guess)))
        for eps_exp in (44, 36, 28):
            eps = scale / (1 << eps_exp)
            nlo, nhi = _round_out(g - eps, g + eps, eps_exp + 4 - int(scale).bit_length() + 1)
            if nlo < self.lo or nhi > self.hi or nhi - nlo >= self.hi - self.lo:
                continue
            s1 = self.sign_at(nlo)
            if s1 == 0:
                return AlgebraicReal._make(self.coeffs, self.embedding, nlo, nlo, 0)
            s2 = self.sign_at(nhi)
            if s2 == 0:
                return AlgebraicReal._make(self.coeffs, self.embedding, nhi, nhi, 0)
            if s1 * s2 < 0:
                return AlgebraicReal._make(self.coeffs, self.embedding, nlo, nhi, s1)
        return None

    def __float__(self):
        y = self.refine(60)
        return float((y.lo + y.hi) / 2)

    # comparisons ---------------------------------------------------------
    def compare(self, other: AlgebraicReal) -> int:
        return algreal_compare(self, other)

    def __lt__(self, other):
        return algreal_compare(self, _as_algreal(other, self.embedding)) < 0

    def __le__(self, other):
        return algreal_compare(self, _as_algreal(other, self.embedding)) <= 0

    def __gt__(self, other):
        return algreal_compare(self, _as_algreal(other, self.embedding)) > 0

    def __ge__(self, other):
        return algreal_compare(self, _as_algreal(other, self.embedding)) >= 0

    def __eq__(self, other):
        if isinstance(other, (AlgebraicReal, int, Fraction)):
            o = _as_algreal(other, self.embedding)
            if o.embedding != self.embedding:
                return False
            return algreal_compare(self, o) == 0
        return NotImplemented

    __hash__ = None  # equality is semantic; no cheap canonical hash

    def __repr__(self):
        q = self.as_fraction()
        if q is not None:
            return f"AlgebraicReal({q})"
        return f"AlgebraicReal(≈{float(self):.12g}, deg {self.degree}, {self.embedding})"

    def to_json(self) -> dict:
        return {
            "d": self.radicand.field.d,
            "radicand": str(self.radicand),
            "coeffs": [[str(c.u), str(c.v)] for c in self.coeffs],
            "embedding": self.embedding.index,
            "interval": [format_dyadic(self.lo), format_dyadic(self.hi)],
            "approx": float(self),
        }


def algreal_from_json(data: dict) -> AlgebraicReal:
    f = QuadField(data.get("d", 1))
    radicand = parse_quad(data.get("radicand", "1"), f)
    coeffs = [TowerElem(radicand, parse_quad(u, f), parse_quad(v, f)) for u, v in data["coeffs"]]
    lo, hi = (parse_dyadic(t) for t in data["interval"])
    return AlgebraicReal(coeffs, Embedding(data.get("embedding", 1)), lo, hi)


def _as_algreal(x, e: Embedding) -> AlgebraicReal:
    if isinstance(x, AlgebraicReal):
        return x
    return AlgebraicReal.from_rational(x, embedding=e)


def _normalize_poly(coeffs: Sequence, e: Embedding) -> tuple[TowerElem, ...]:
    towers = [c if isinstance(c, TowerElem) else TowerElem.lift(c if isinstance(c, QuadElem) else _frac(c)) for c in coeffs]
    radicand = _common_radicand([towers])
    if radicand is None:
        # all coefficients lie in the base field; choose any shared field
        fields = {c.field for c in towers if c.field.d != 1}
        if len(fields) > 1:
            raise ValueError("coefficients from different fields")
        fld = fields.pop() if fields else QQ
        radicand = fld.one
        towers = [TowerElem.lift(c, radicand) for c in towers]
    else:
        towers = list(_rebase_poly(towers, radicand))
    towers = [c.reduced(e) for c in towers]
    towers = _poly_strip(towers)
    if len(towers) < 2:
        raise ValueError("defining polynomial must have degree 1 or 2")
    if len(towers) > 3:
        raise ValueError("defining polynomial must have degree ≤ 2")
    if len(towers) == 3:
        c0, c1, c2 = towers
        disc = c1 * c1 - c0 * c2 * 4
        if disc.reduced(e).is_zero():
            towers = [c1, c2 * 2]
    return tuple(towers)


def _tower_sqrt(t: TowerElem, e: Embedding) -> TowerElem | None:
    """The nonnegative square root of t under e when it lies in the same tower."""
    if not t.v.is_zero():
        return None
    a = t.a
    if a.field != t.u.field:
        a = _as_quad(a, t.u.field)
    w = quad_sqrt(t.u)
    if w is not None:
        r = TowerElem.lift(w, a)
    else:
        w = quad_sqrt(t.u / a) if not a.is_zero() else None
        if w is None:
            return None
        r = TowerElem.lift(w, a) * TowerElem(a, 0, 1)
    return -r if tower_sign(r, e) < 0 else r


def _quadratic_roots(p: tuple, e: Embedding) -> list[AlgebraicReal]:
    c0, c1, c2 = p
    disc = (c1 * c1 - c0 * c2 * 4).reduced(e)
    sd = tower_sign(disc, e)
    if sd < 0:
        return []
    # the double-root case was removed by _normalize_poly
    root = _tower_sqrt(disc, e)
    if root is not None:
        pts = [AlgebraicReal.from_tower((-c1 + s * root) / (c2 * 2), e) for s in (-1, 1)]
        return sorted(pts, key=cmp_to_key(algreal_compare))
    lead = tower_sign(c2, e)
    vertex = (-c1 / (c2 * 2)).reduced(e)
    # a dyadic m strictly between the roots, where p has sign −lead
    bits = 8
    while True:
        vlo, vhi = embed_approx(vertex, e, bits)
        m = (vlo + vhi) / 2
        s = tower_sign(_poly_eval(p, m), e)
        if s == -lead:
            break
        if s == 0:
            other = (-c1 / c2 - TowerElem.lift(m, c2.a)).reduced(e)
            pts = [AlgebraicReal.from_tower(TowerElem.lift(m, c2.a), e), AlgebraicReal.from_tower(other, e)]
            return sorted(pts, key=cmp_to_key(algreal_compare))
        bits += 8
    # a dyadic bound B with both roots inside (−B, B)
    approx = [embed_approx(c, e, 8) for c in p]
    lead_lo = Fraction(0)
    lead_bits = 8
    while True:
        lead_lo = Fraction(0) if approx[2][0] <= 0 <= approx[2][1] else min(abs(approx[2][0]), abs(approx[2][1]))
        if lead_lo:
            break
        lead_bits += 16
        approx[2] = embed_approx(c2, e, lead_bits)
    big = max(max(abs(x) for x in approx[0]), max(abs(x) for x in approx[1]))
    bound = 1 + big / lead_lo
    B = Fraction(1 << (math.ceil(bound).bit_length() + 1))
    while tower_sign(_poly_eval(p, -B), e) != lead or tower_sign(_poly_eval(p, B), e) != lead:
        B *= 2
    left = AlgebraicReal._make(p, e, -B, m, lead)
    right = AlgebraicReal._make(p, e, m, B, -lead)
    return [left.refine(48), right.refine(48)]


def _same_number(x: AlgebraicReal, y: AlgebraicReal) -> bool | None:
    """Exact shared-root test for overlapping isolating intervals; None if undecidable."""
    radicand = _common_radicand([x.coeffs, y.coeffs])
    if radicand is None:
        radicand = x.radicand if x.radicand.field.d != 1 else y.radicand
    try:
        px = _rebase_poly(x.coeffs, radicand)
        py = _rebase_poly(y.coeffs, radicand)
    except ValueError:
        return None
    e = x.embedding
    px = tuple(c.reduced(e) for c in px)
    py = tuple(c.reduced(e) for c in py)
    lo, hi = max(x.lo, y.lo), min(x.hi, y.hi)
    if lo > hi:
        return False
    g = poly_gcd(px, py)
    if len(g) < 2:
        return False
    if len(g) == 2:
        rho = -g[0] / g[1]
        return tower_sign(rho - TowerElem.lift(lo, rho.a), e) >= 0 and tower_sign(
            TowerElem.lift(hi, rho.a) - rho, e
        ) >= 0
    return tower_sign(_poly_eval(g, lo), e) * tower_sign(_poly_eval(g, hi), e) <= 0


def algreal_compare(x: AlgebraicReal, y: AlgebraicReal) -> int:
    """Exact comparison: −1, 0 or +1."""
    if x.embedding != y.embedding:
        # a rational value is the same under every embedding
        if x.is_rational():
            x = AlgebraicReal.from_rational(x.as_fraction(), embedding=y.embedding)
        elif y.is_rational():
            y = AlgebraicReal.from_rational(y.as_fraction(), embedding=x.embedding)
        else:
            raise ValueError("cannot compare algebraic reals under different embeddings")
    if x.hi < y.lo:
        return -1
    if y.hi < x.lo:
        return 1
    if x.lo == x.hi and y.lo == y.hi:
        return 0  # both exact dyadics and overlapping means equal
    same = _same_number(x, y)
    if same:
        return 0
    bits = max(_width_bits(x), _width_bits(y)) + 4
    limit = 4096
    while True:
        x, y = x.refine(bits), y.refine(bits)
        if x.hi < y.lo:
            return -1
        if y.hi < x.lo:
            return 1
        if same is None and bits > 512:
            raise ArithmeticError("cannot decide equality of algebraic reals from different towers")
        if bits > limit:
            raise ArithmeticError("refinement did not separate distinct algebraic reals")
        bits += 16


def _width_bits(x: AlgebraicReal) -> int:
    w = x.hi - x.lo
    if not w:
        return 0
    return max(0, w.denominator.bit_length() - w.numerator.bit_length())


def algreal_sign(x: AlgebraicReal) -> int:
    if x.lo > 0:
        return 1
    if x.hi < 0:
        return -1
    if x.sign_at(Fraction(0)) == 0:
        return 0
    return algreal_compare(x, AlgebraicReal.from_tower(TowerElem.lift(0, x.radicand), x.embedding))
