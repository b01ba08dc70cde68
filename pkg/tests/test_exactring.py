import pytest
from hypothesis import given, settings, strategies as st

from bubbletree.exactring import (
    QQ,
    ParseError,
    PolyRing,
    PrimeField,
    RingMismatch,
    field_from_spec,
    graded_parts,
    poly_arith,
    substitute,
)

R = PolyRing(("x", "y", "z"))
COX = PolyRing(("X", "Y", "Z", "T"), (1, 1, 1, -1))


def polys(ring=R, max_terms=4, max_deg=3):
    exps = st.tuples(*[st.integers(0, max_deg)] * ring.nvars)
    coeffs = st.integers(-5, 5)
    return st.dictionaries(exps, coeffs, max_size=max_terms).map(
        lambda d: sum((ring.monomial(e, c) for e, c in d.items()), ring.zero)
    )


def test_parse_basic():
    p = R.parse("y^2+z^4")
    assert p == R.var("y") ** 2 + R.var("z") ** 4
    assert p.total_degree() == 4
    assert not p.is_homogeneous()
    assert R.parse("z^4*(x^2+y^2)") == R.var("z") ** 4 * (R.var("x") ** 2 + R.var("y") ** 2)


def test_parse_rational_and_errors():
    assert R.parse("1/2*x - 3/4") == R.var("x").scale(QQ(1) / 2) - R.const(QQ(3) / 4)
    with pytest.raises(ParseError):
        R.parse("x +")
    with pytest.raises(ParseError) as exc:
        R.parse("x + w")
    assert exc.value.pos == 4


def test_weights():
    X, Y, Z, T = COX.gens()
    assert (X * T).weight() == 0
    assert T.weight() == -1
    assert (X * Y * T).is_homogeneous()


def test_prime_field():
    F = field_from_spec("fp:7")
    S = R.with_field(F)
    p = S.parse("3*x") * S.const(5)
    assert p == S.var("x")
    assert field_from_spec("q") is QQ
    assert isinstance(field_from_spec("fp"), PrimeField)
    with pytest.raises(ValueError):
        field_from_spec("reals")


def test_order_and_initial_form():
    p = R.parse("x^2 + y^3 + x*y*z")
    assert p.order() == 2
    assert p.initial_form() == R.parse("x^2")


def test_ring_mismatch():
    with pytest.raises(RingMismatch):
        poly_arith(R.var("x"), COX.var("X"), "add")


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a - a == R.zero
    assert a * b == b * a


@settings(max_examples=60, deadline=None)
@given(polys())
def test_str_roundtrip(p):
    assert R.parse(str(p)) == p


@settings(max_examples=40, deadline=None)
@given(polys(), polys())
def test_substitution_is_homomorphism(a, b):
    m = {"x": R.parse("x + y"), "y": R.parse("z^2"), "z": R.parse("x*y - 1")}
    assert substitute(a * b, m, R) == substitute(a, m, R) * substitute(b, m, R)
    assert substitute(a + b, m, R) == substitute(a, m, R) + substitute(b, m, R)


@settings(max_examples=40, deadline=None)
@given(polys())
def test_graded_parts_sum(p):
    parts = graded_parts(p)
    assert sum((q for _, q in parts), R.zero) == p
    assert all(q.is_homogeneous() for _, q in parts)
    assert [w for w, _ in parts] == sorted(w for w, _ in parts)
