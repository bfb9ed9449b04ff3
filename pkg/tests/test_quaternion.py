import itertools
from fractions import Fraction

import mpmath
import pytest
import sympy

from flatcycles.errors import AlgebraMismatch, NegativeRadicand, NotInOrder, NotInvertible, NotNormalizable, NotSplit
from flatcycles.exactreal import QQ, SIGMA1, SIGMA2, QuadElem, embed_approx
from flatcycles.quaternion import (
    AlgebraDesc,
    GroupSpec,
    OrderSpec,
    QuatElem,
    congruence_period,
    congruence_window,
    enumerate_norm_one,
    in_congruence_subgroup,
    is_polar_regular,
    is_split_at,
    normalize_positive_a,
    quat_conj,
    quat_inverse,
    quat_mul,
    reduce_mod,
    reduced_norm,
    scaling_equiv,
    tau,
)

from helpers import Q2, isotropy_oracle, rand_algebra, rand_int_quad, rand_quat

S = sympy.Symbol("s")  # stands for √a


def _sym(q: QuadElem):
    r = sympy.sqrt(q.field.d) if q.field.d != 1 else 0
    return sympy.Rational(q.x.numerator, q.x.denominator) + sympy.Rational(q.y.numerator, q.y.denominator) * r


def oracle_product(x: QuatElem, y: QuatElem) -> list:
    """Multiply through the 2×2 model over F[s]/(s² − a) in sympy and read coordinates back."""
    alg = x.algebra
    a, b = _sym(alg.a), _sym(alg.b)

    def mat(z):
        z0, z1, z2, z3 = (_sym(c) for c in z.coords)
        return sympy.Matrix([[z0 + z1 * S, z2 + z3 * S], [b * (z2 - z3 * S), z0 - z1 * S]])

    m = (mat(x) * mat(y)).applyfunc(lambda t: sympy.expand(sympy.expand(t).subs(S ** 2, a)))
    c0 = sympy.expand((m[0, 0] + m[1, 1]) / 2)
    c1 = sympy.expand((m[0, 0] - m[1, 1]) / (2 * S))
    c2 = sympy.expand((m[0, 1] + m[1, 0] / b) / 2)
    c3 = sympy.expand((m[0, 1] - m[1, 0] / b) / (2 * S))
    return [sympy.radsimp(c) for c in (c0, c1, c2, c3)]


# ---------------------------------------------------------------- multiplication


def test_basis_relations():
    alg = AlgebraDesc.parse(2, "3+1√d", "-1+1√d")
    i, j, k = alg.i, alg.j, alg.k
    assert i * j == k
    assert j * i == -k
    assert i * i == alg.elem(alg.a)
    assert j * j == alg.elem(alg.b)
    x = alg.elem(1, 2, 3, 4)
    assert x * alg.one == x and alg.one * x == x


def test_product_matches_matrix_model(rng):
    for field in (QQ, Q2):
        alg = rand_algebra(rng, field)
        for _ in range(15):
            x, y = rand_quat(rng, alg), rand_quat(rng, alg)
            got = [_sym(c) for c in quat_mul(x, y).coords]
            want = oracle_product(x, y)
            assert all(sympy.simplify(g - w) == 0 for g, w in zip(got, want))


def test_algebra_mismatch():
    a1 = AlgebraDesc.parse(1, "1", "1")
    a2 = AlgebraDesc.parse(1, "-1", "1")
    with pytest.raises(AlgebraMismatch):
        quat_mul(a1.i, a2.i)


def test_associativity(rng):
    alg = rand_algebra(rng, Q2)
    for _ in range(100):
        x, y, z = (rand_quat(rng, alg) for _ in range(3))
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z


# ---------------------------------------------------------------- norm, conj, inverse


def test_reduced_norm_examples():
    alg = AlgebraDesc.parse(2, "1", "1")
    assert reduced_norm(alg.one) == Q2.one
    x0, x1 = Q2.parse("5-1√d"), Q2.parse("2/3")
    assert reduced_norm(alg.elem(x0, x1)) == x0 * x0 - x1 * x1


def test_norm_formula(rng):
    alg = rand_algebra(rng, Q2)
    for _ in range(100):
        x = rand_quat(rng, alg)
        x0, x1, x2, x3 = x.coords
        assert reduced_norm(x) == x0 * x0 - alg.a * x1 * x1 - alg.b * x2 * x2 + alg.ab * x3 * x3


def test_conj_and_inverse():
    alg = AlgebraDesc.parse(1, "1", "1")
    assert quat_conj(alg.one) == alg.one
    with pytest.raises(NotInvertible):
        quat_inverse(alg.elem(1, 1))
    alg2 = AlgebraDesc.parse(2, "3+1√d", "-1")
    assert quat_inverse(alg2.i) == alg2.elem(0, alg2.a.inverse())


def test_conj_inverse_identities(rng):
    alg = rand_algebra(rng, Q2)
    for _ in range(100):
        x = rand_quat(rng, alg)
        assert x * quat_conj(x) == alg.elem(reduced_norm(x))
        if not reduced_norm(x).is_zero():
            assert x * quat_inverse(x) == alg.one
            assert quat_inverse(x) * x == alg.one


# ---------------------------------------------------------------- splitting


def test_split_examples():
    assert is_split_at(AlgebraDesc.parse(1, "1", "1"), SIGMA1)
    assert not is_split_at(AlgebraDesc.parse(1, "-1", "-1"), SIGMA1)
    alg = AlgebraDesc.parse(2, "0+1√d", "-1")
    assert is_split_at(alg, SIGMA1) and not is_split_at(alg, SIGMA2)
    assert alg.r == 1


def test_split_agrees_with_isotropy_oracle(rng):
    for _ in range(10):
        field = rng.choice([QQ, Q2])
        alg = rand_algebra(rng, field, 3)
        for e in field.embeddings():
            assert is_split_at(alg, e) == isotropy_oracle(alg, e, 1)


# ---------------------------------------------------------------- scaling and normalization


def test_scaling_identity():
    alg = AlgebraDesc.parse(2, "3", "-1+1√d")
    tgt, iso = scaling_equiv(alg, 1)
    assert tgt == alg and iso.is_identity()


def test_scaling_example(rng):
    alg = AlgebraDesc.parse(1, "-4", "-9")
    tgt, iso = scaling_equiv(alg, Fraction(1, 2))
    assert (tgt.a, tgt.b) == (QQ.from_int_coords(-1), QuadElem(QQ, Fraction(-9, 4)))
    for _ in range(100):
        x = rand_quat(rng, alg)
        y = iso.to_target(x)
        assert reduced_norm(y) == reduced_norm(x)
        assert iso.to_source(y) == x
        z = rand_quat(rng, alg)
        assert iso.to_target(x * z) == y * iso.to_target(z)


def test_scaling_preserves_splitting(rng):
    for _ in range(50):
        field = rng.choice([QQ, Q2])
        alg = rand_algebra(rng, field, 5)
        c = rand_int_quad(rng, field, 4, nonzero=True)
        tgt, _ = scaling_equiv(alg, c)
        assert tgt.split_embeddings == alg.split_embeddings


def test_normalize_examples():
    alg = AlgebraDesc.parse(2, "1", "1")
    tgt, iso = normalize_positive_a(alg)
    assert tgt == alg and iso.is_identity()
    tgt, iso = normalize_positive_a(AlgebraDesc.parse(1, "-1", "1"))
    assert tgt == AlgebraDesc.parse(1, "1", "-1")
    ram = AlgebraDesc.parse(1, "-1", "-1")
    assert normalize_positive_a(ram)[0] == ram


def test_normalize_result_is_isomorphic(rng):
    for _ in range(30):
        alg = rand_algebra(rng, Q2, 4)
        try:
            tgt, iso = normalize_positive_a(alg)
        except NotNormalizable:
            continue
        assert tgt.is_normalized()
        assert tgt.split_embeddings == alg.split_embeddings
        x, y = rand_quat(rng, alg), rand_quat(rng, alg)
        assert iso.to_target(x * y) == iso.to_target(x) * iso.to_target(y)
        assert reduced_norm(iso.to_target(x)) == reduced_norm(x)


def test_normalize_failure_is_reported():
    # split at both places, but a < 0 at σ2 and b < 0 at σ1, so the swap alone fails
    alg = AlgebraDesc.parse(2, "0+1√d", "0-1√d")
    assert alg.r == 2
    with pytest.raises(NotNormalizable):
        normalize_positive_a(alg, search_bound=0)
    tgt, iso = normalize_positive_a(alg, search_bound=3)
    assert tgt.is_normalized() and tgt.r == 2


# ---------------------------------------------------------------- tau


def test_tau_examples():
    alg = AlgebraDesc.parse(2, "2+1√d", "-3")
    for e in alg.split_embeddings:
        assert tau(alg, e, alg.one).is_scalar(1)
        m = tau(alg, e, alg.i)
        a11, a12, a21, a22 = m.entries
        assert a12.is_zero() and a21.is_zero()
        assert a11 * a11 == alg.a and a11 == -a22 and a11.sign(e) > 0
        m = tau(alg, e, alg.j)
        a11, a12, a21, a22 = m.entries
        assert a11.is_zero() and a22.is_zero() and a12 == 1 and a21 == alg.b


def test_tau_errors():
    ram = AlgebraDesc.parse(1, "-1", "-1")
    with pytest.raises(NotSplit):
        tau(ram, SIGMA1, ram.one)
    alg = AlgebraDesc.parse(1, "-1", "1")
    with pytest.raises(NegativeRadicand):
        tau(alg, SIGMA1, alg.one)


def test_tau_additive(rng):
    alg = AlgebraDesc.parse(2, "1", "1")
    for _ in range(50):
        x, y = rand_quat(rng, alg), rand_quat(rng, alg)
        for e in alg.split_embeddings:
            assert tau(alg, e, x + y) == tau(alg, e, x) + tau(alg, e, y)


# ---------------------------------------------------------------- units


def _brute_units(alg: AlgebraDesc, h: int) -> set:
    f = alg.field
    rank = f.degree
    out = set()
    for ints in itertools.product(range(-h, h + 1), repeat=4 * rank):
        coords = [f.from_int_coords(*(ints[2 * k:2 * k + 2] if rank == 2 else (ints[k],))) for k in range(4)]
        x = QuatElem(alg, *coords)
        if reduced_norm(x) == f.one:
            out.add(tuple(x.int_coords()))
    return out


@pytest.mark.parametrize("d,a,b,h", [(1, "1", "1", 3), (1, "-1", "3", 3), (2, "1", "1", 1), (5, "1", "-1", 1)])
def test_enumeration_matches_brute_force(d, a, b, h):
    alg = AlgebraDesc.parse(d, a, b)
    units = enumerate_norm_one(GroupSpec(OrderSpec(alg), 1, h))
    keys = [tuple(x.int_coords()) for x in units]
    assert keys == sorted(keys)
    assert set(keys) == _brute_units(alg, h)


def test_enumeration_examples():
    alg = AlgebraDesc.parse(1, "1", "1")
    units = enumerate_norm_one(GroupSpec(OrderSpec(alg), 1, 1))
    assert alg.one in units and -alg.one in units
    for x in units:
        assert quat_inverse(x) in units
        assert -x in units
    alg2 = AlgebraDesc.parse(2, "1", "1")
    units2 = enumerate_norm_one(GroupSpec(OrderSpec(alg2), 1, 3))
    x = alg2.elem(3, Q2.parse("0+2√d"))
    assert x in units2 and reduced_norm(x) == Q2.one
    assert all(reduced_norm(u) == Q2.one for u in units2)


def test_enumeration_closed_under_inverse_in_window():
    alg = AlgebraDesc.parse(2, "1", "1")
    h = 3
    units = enumerate_norm_one(GroupSpec(OrderSpec(alg), 1, h))
    keys = {tuple(x.int_coords()) for x in units}
    for x in units:
        inv = quat_inverse(x)
        if max(abs(c) for c in inv.int_coords()) <= h:
            assert tuple(inv.int_coords()) in keys


# ---------------------------------------------------------------- congruence subgroups


def test_congruence_examples():
    alg = AlgebraDesc.parse(1, "1", "1")
    order = OrderSpec(alg)
    x = alg.elem(1, 2)
    for m in (1, 2, 3, 7):
        assert in_congruence_subgroup(alg.one, GroupSpec(order, m))
    assert in_congruence_subgroup(x, GroupSpec(order, 2))
    assert not in_congruence_subgroup(x, GroupSpec(order, 4))
    assert in_congruence_subgroup(-alg.one, GroupSpec(order, 2))
    with pytest.raises(NotInOrder):
        in_congruence_subgroup(alg.elem(Fraction(1, 2)), GroupSpec(order, 2))


def test_congruence_subgroup_closed_on_slice():
    alg = AlgebraDesc.parse(2, "1", "1")
    g = GroupSpec(OrderSpec(alg), 2, 3)
    window = congruence_window(g)
    sample = window[:: max(1, len(window) // 40)]
    for x in sample:
        assert in_congruence_subgroup(quat_inverse(x), g)
        for y in sample:
            assert in_congruence_subgroup(x * y, g)


def test_congruence_period():
    alg = AlgebraDesc.parse(2, "1", "1")
    x = alg.elem(3, Q2.parse("0+2√d"))
    k = congruence_period(x, 4)
    g = GroupSpec(OrderSpec(alg), 4)
    assert in_congruence_subgroup(_power(x, k), g)
    for j in range(1, k):
        assert not in_congruence_subgroup(_power(x, j), g)


def _power(x, k):
    y = x.algebra.one
    for _ in range(k):
        y = y * x
    return y


def test_reduce_mod():
    alg = AlgebraDesc.parse(2, "1", "1")
    x = alg.elem(Q2.parse("3+2√d"), -1)
    assert reduce_mod(x, 2) == (1, 0, 1, 0, 0, 0, 0, 0)


# ---------------------------------------------------------------- polar regularity


def test_polar_regular_examples():
    alg = AlgebraDesc.parse(2, "1", "1")
    assert not is_polar_regular(alg.one)
    assert is_polar_regular(alg.elem(3, Q2.parse("0+2√d")))
    alg2 = AlgebraDesc.parse(2, "3+1√d", "-1")
    assert is_polar_regular(alg2.i)
    with pytest.raises(NotInvertible):
        is_polar_regular(AlgebraDesc.parse(1, "1", "1").elem(1, 1))


def _mp_matrix(m, e):
    rows = []
    for t in m.entries:
        lo, hi = embed_approx(t, e, 200)
        rows.append(mpmath.mpf(lo.numerator) / lo.denominator / 2 + mpmath.mpf(hi.numerator) / hi.denominator / 2)
    return mpmath.matrix([[rows[0], rows[1]], [rows[2], rows[3]]])


def test_polar_regular_matches_eigen_oracle(rng):
    mpmath.mp.dps = 50
    alg = AlgebraDesc.parse(2, "1", "1")
    units = enumerate_norm_one(GroupSpec(OrderSpec(alg), 1, 2))
    for x in rng.sample(units, 80):
        flags = []
        for e in alg.split_embeddings:
            ev, _ = mpmath.eig(_mp_matrix(tau(alg, e, x), e))
            real = all(abs(mpmath.im(v)) < mpmath.mpf(10) ** -20 for v in ev)
            flags.append(real and abs(ev[0] - ev[1]) > mpmath.mpf(10) ** -20)
        assert is_polar_regular(x) == all(flags)
