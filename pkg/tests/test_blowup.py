import pytest

from bubbletree.blowup import (
    BlowupModel,
    exceptional_restriction,
    is_reflexive,
    naive_extension,
    p1_splitting,
    pushforward,
    stripping_assignment,
    twist,
    zero_assignment,
    entry_orders,
)
from bubbletree.p2sheaf import chern, is_semistable, STABLE


def test_model_blow_down():
    m = BlowupModel()
    X, Y, Z, T = m.cox.gens()
    assert m.blow_down(m.cox.parse("X*T")) is not None
    assert (X * T).weight() == 0


def test_assignments_feasible(corpus):
    for name, E in corpus.items():
        ords = entry_orders(E)
        for a in (stripping_assignment(E), zero_assignment(E)):
            assert a.feasible(ords), name
        assert stripping_assignment(E).residual(ords) <= zero_assignment(E).residual(ords)


def test_naive_extension_of_tangent_family(corpus):
    M = naive_extension(corpus["xyz"])
    assert is_reflexive(M)
    F = exceptional_restriction(M)
    ch = chern(F)
    assert ch.delta == 3 and ch.c1 % 2 == 1
    assert is_semistable(F) == STABLE


def test_twist_shifts_first_chern_class(corpus):
    M = naive_extension(corpus["xyz2"])
    c = chern(exceptional_restriction(M)).c1
    assert chern(exceptional_restriction(twist(M, 1))).c1 == c - 2
    assert chern(exceptional_restriction(twist(M, -2))).c1 == c + 4


@pytest.mark.parametrize("assign", ["strip", "zero"])
def test_pushforward_recovers_family(corpus, assign):
    for name, E in corpus.items():
        a = stripping_assignment(E) if assign == "strip" else zero_assignment(E)
        M = naive_extension(E, a)
        assert is_reflexive(M), name
        assert pushforward(M).equals_family, name


def test_splitting_on_strict_transform(corpus):
    assert p1_splitting(twist(naive_extension(corpus["xyz"]), 0)).rank == 2
