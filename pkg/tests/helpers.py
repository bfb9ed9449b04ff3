"""Shared random generators for the test suite."""

import itertools
import random
from fractions import Fraction

import mpmath

from flatcycles.exactreal import QuadElem, QuadField
from flatcycles.quaternion import AlgebraDesc, QuatElem

Q2 = QuadField(2)
Q5 = QuadField(5)


def rand_frac(rng: random.Random, num: int = 9, den: int = 5) -> Fraction:
    return Fraction(rng.randint(-num, num), rng.randint(1, den))


def rand_quad(rng: random.Random, field: QuadField, num: int = 9, den: int = 5) -> QuadElem:
    y = rand_frac(rng, num, den) if field.d != 1 else 0
    return QuadElem(field, rand_frac(rng, num, den), y)


def rand_int_quad(rng: random.Random, field: QuadField, bound: int = 4, nonzero: bool = False):
    while True:
        x = rng.randint(-bound, bound)
        y = rng.randint(-bound, bound) if field.d != 1 else 0
        if not nonzero or x or y:
            return field.from_int_coords(x, y)


def rand_algebra(rng: random.Random, field: QuadField, bound: int = 4) -> AlgebraDesc:
    return AlgebraDesc(field, rand_int_quad(rng, field, bound, True), rand_int_quad(rng, field, bound, True))


def rand_quat(rng: random.Random, alg: AlgebraDesc, num: int = 6, den: int = 3) -> QuatElem:
    return QuatElem(alg, *(rand_quad(rng, alg.field, num, den) for _ in range(4)))


def rand_int_quat(rng: random.Random, alg: AlgebraDesc, bound: int = 3) -> QuatElem:
    return QuatElem(alg, *(rand_int_quad(rng, alg.field, bound) for _ in range(4)))


def isotropy_oracle(alg: AlgebraDesc, e, bound: int = 2) -> bool:
    """Certified brute force: the real norm form is isotropic iff it takes both signs on small integer vectors."""
    iv = mpmath.iv
    iv.prec = 80
    root = iv.sqrt(iv.mpf(alg.field.d)) * e.root_sign if alg.field.d != 1 else iv.mpf(0)

    def emb(q):
        return iv.mpf(q.x.numerator) / q.x.denominator + iv.mpf(q.y.numerator) / q.y.denominator * root

    a, b = emb(alg.a), emb(alg.b)
    signs = set()
    for v in itertools.product(range(-bound, bound + 1), repeat=4):
        if not any(v):
            continue
        val = v[0] ** 2 - a * v[1] ** 2 - b * v[2] ** 2 + a * b * v[3] ** 2
        if val.a > 0:
            signs.add(1)
        elif val.b < 0:
            signs.add(-1)
        else:
            # small-height values of Q(√d) are either 0 or far from 0 at 80 bits,
            # so an interval straddling 0 is an exact zero: isotropy outright
            return True
        if len(signs) == 2:
            return True
    return False
