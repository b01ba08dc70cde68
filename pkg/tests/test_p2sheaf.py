import pytest
from hypothesis import given, settings, strategies as st

from bubbletree.p2sheaf import (
    STABLE,
    STRICTLY_SEMISTABLE,
    UNSTABLE,
    ChernData,
    P2Sheaf,
    chern,
    chern_from_resolution,
    free_summand_near,
    free_summand_section,
    h0,
    ideal_local_data,
    is_semistable,
    max_destabilizer,
    p2_ring,
    points_of,
    restrict_to_line,
    sheaf_equal,
    singular_points,
)

S = p2_ring()
X, Y, Z = S.gens()


def line_bundles(*twists):
    """O(t_1) + ... as a free module: generator degree -t."""
    return P2Sheaf.from_columns(S, [-t for t in twists], [])


def ideal_sheaf(gens, twist=0):
    """I(twist) for an ideal with two generators forming a complete intersection."""
    f, g = gens
    a, b = f.total_degree(), g.total_degree()
    return P2Sheaf.from_columns(S, [a - twist, b - twist], [[g, -f]])


def plus_point():
    """O + I_[0,0,1]."""
    return P2Sheaf.from_columns(S, [0, 1, 1], [[S.zero, Y, -X]])


def tangent_twisted():
    """Cokernel of O(-2) -> O(-1)^3 by (X, Y, Z), which is T(-2)."""
    return P2Sheaf.from_columns(S, [1, 1, 1], [[X, Y, Z]])


def test_sections_of_line_bundles():
    assert [h0(line_bundles(0), d) for d in range(-1, 4)] == [0, 1, 3, 6, 10]
    assert h0(ideal_sheaf([X, Y]), 1) == 2


def test_chern_of_line_bundles_and_sums():
    assert chern(line_bundles(2)) == ChernData(1, 2, 0)
    assert chern(line_bundles(1, -1)) == ChernData(2, 0, -1)
    assert chern(ideal_sheaf([X**2, Y**3])) == ChernData(1, 0, 6)


def test_tangent_sheaf():
    T = tangent_twisted()
    ch = chern(T)
    assert (ch.rank, ch.c1, ch.c2, ch.delta) == (2, -1, 1, 3)
    assert chern_from_resolution(T) == ch
    assert is_semistable(T) == STABLE
    assert T.is_locally_free()
    assert restrict_to_line(T, Z).types == (0, -1)


def test_twist_changes_chern_data():
    T = tangent_twisted()
    assert chern(T.twist(1)) == chern(T).twisted(1)
    assert chern(T.twist(1)).delta == 3


def test_semistability_of_split_sheaves():
    assert is_semistable(line_bundles(0, 0)) == STRICTLY_SEMISTABLE
    assert is_semistable(line_bundles(1, -1)) == UNSTABLE
    assert is_semistable(line_bundles(0, -1)) == UNSTABLE
    d = max_destabilizer(line_bundles(1, -1))
    assert (d.degree, d.quotient_degree) == (1, -1)


def test_plus_point_sheaf():
    F = plus_point()
    assert chern(F) == ChernData(2, 0, 1)
    assert is_semistable(F) == STRICTLY_SEMISTABLE
    assert F.double_dual_is_free()
    assert sorted(F.double_dual_degrees()) == [0, 0]
    [(P, charge)] = singular_points(F)
    assert P.label() == "[0,0,1]" and charge == 1
    sq = free_summand_section(F)
    assert sq is not None and sq.ideal_strings() == ["X", "Y"]
    assert free_summand_near(F, P, 1) is not None


def test_cone_of_sections_is_singular():
    F = P2Sheaf.from_columns(S, [1, 1, 0], [[X, Y, S.zero]])
    assert not F.is_locally_free()
    assert [(P.label(), c) for P, c in singular_points(F)] == [("[0,0,1]", 1)]


def test_points_of_irrational_pair():
    pts = points_of([Z, X**2 - Y**2 - Y**2])
    assert [P.residue_degree for P in pts] == [2]


def test_points_of_rational_pairs():
    pts = points_of([Z * (X - Y), X * Y])
    assert sorted(P.label() for P in pts) == ["[0,0,1]", "[0,1,0]", "[1,0,0]"]


def test_local_data_of_curvilinear_ideal():
    I = [X * Z - Y**2, X * Y, X**2]
    [P] = points_of(I)
    data = ideal_local_data(I, P)
    assert data["colength"] == 3
    assert data["generators"] == 2
    assert data["syzygies"] == 1


def test_local_data_of_fat_point():
    I = [X**2, X * Y, Y**2]
    [P] = points_of(I)
    data = ideal_local_data(I, P)
    assert (data["colength"], data["generators"], data["syzygies"]) == (3, 3, 2)


@pytest.mark.parametrize("a,b,free", [(1, 0, True), (1, 1, True), (0, 1, False)])
def test_section_family(a, b, free):
    F = P2Sheaf.from_columns(S, [-1, -2, -3], [[X, Y**2, (Z**3).scale(a) + (Y * Z**2).scale(b)]])
    assert F.is_locally_free() is free


def test_sheaf_equal_distinguishes():
    assert sheaf_equal(plus_point(), plus_point().twist(0))
    assert not sheaf_equal(plus_point(), line_bundles(0, 0))
    assert not sheaf_equal(line_bundles(1, -1), line_bundles(0, 0))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(-2, 2))
def test_whitney_for_complete_intersections(a, b, t):
    """0 -> O(t-a-b) -> O(t-a) + O(t-b) -> I(t) -> 0."""
    A = line_bundles(t - a - b)
    B = line_bundles(t - a, t - b)
    C = ideal_sheaf([X**a, Y**b], t)
    cA, cB, cC = chern(A), chern(B), chern(C)
    assert cB.rank == cA.rank + cC.rank
    assert cB.c1 == cA.c1 + cC.c1
    assert cB.c2 == cA.c2 + cC.c2 + cA.c1 * cC.c1
    assert cC.c2 == a * b


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(-2, 3))
def test_whitney_for_curves(d, t):
    """0 -> O(t-d) -> O(t) -> O_C(t) -> 0 for a curve of degree d."""
    A = line_bundles(t - d)
    B = line_bundles(t)
    C = P2Sheaf.from_columns(S, [-t], [[X**d + Y**d]])
    cA, cB, cC = chern(A), chern(B), chern(C)
    assert cC.rank == 0 and cC.c1 == d
    assert cB.c1 == cA.c1 + cC.c1
    assert cB.c2 == cA.c2 + cC.c2 + cA.c1 * cC.c1


@settings(max_examples=15, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_split_bundle_splitting_and_stability(a, b):
    F = line_bundles(a, b)
    assert sorted(restrict_to_line(F, Z).types, reverse=True) == sorted([a, b], reverse=True)
    expected = STRICTLY_SEMISTABLE if a == b else UNSTABLE
    assert is_semistable(F) == expected
