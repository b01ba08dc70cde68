import pytest

from bubbletree.blowup import zero_assignment
from bubbletree.family import transform
from bubbletree.p2sheaf import (
    STABLE,
    STRICTLY_SEMISTABLE,
    chern,
    h0_profile,
    sheaf_equal,
    singular_points,
)
from bubbletree.pipeline import (
    BARREN,
    CONE,
    FERTILE,
    StepLimitExceeded,
    bubble_report,
    classify,
    families_equal,
    normalize_to_fertile,
    semistabilize,
    step_cap,
)

from conftest import column
from test_p2sheaf import plus_point

VERDICTS = {
    "xyz": BARREN,
    "xyz2": FERTILE,
    "xyz3": CONE,
    "xyz4": CONE,
    "height2_m3": FERTILE,
    "height2_m4": FERTILE,
    "height2_m5": FERTILE,
    "section": FERTILE,
    "cubic": FERTILE,
    "double": FERTILE,
}


@pytest.mark.parametrize("name", sorted(VERDICTS))
def test_verdicts(corpus, name):
    rep = classify(corpus[name])
    assert rep.verdict == VERDICTS[name]
    assert rep.k_generic <= rep.k
    assert all(rep.flags.values())


def test_semistable_tangent(corpus):
    sx = semistabilize(corpus["xyz"])
    assert sx.stability == STABLE
    assert (sx.chern.c1, sx.chern.delta) == (-1, 3)
    assert sx.steps == []


def test_semistable_instanton(corpus):
    sx = semistabilize(corpus["xyz2"])
    assert (sx.chern.rank, sx.chern.c1, sx.chern.c2, sx.chern.delta) == (2, 0, 1, 4)
    assert sx.stability in (STABLE, STRICTLY_SEMISTABLE)
    assert sx.restriction.is_locally_free()


def test_semistable_cone(corpus):
    for name in ("xyz3", "xyz4"):
        sx = semistabilize(corpus[name])
        assert sheaf_equal(sx.restriction, plus_point())


def test_loop_steps_follow_formula(corpus):
    sx = semistabilize(corpus["xyz4"])
    assert len(sx.steps) >= 1
    for s in sx.steps:
        assert s.delta_after == s.predicted_delta
        assert s.delta_after >= s.delta_before + 1


def test_step_cap_enforced(corpus):
    with pytest.raises(StepLimitExceeded):
        semistabilize(corpus["xyz4"], max_steps=0)


@pytest.mark.parametrize("name", ["xyz4", "height2_m4", "section", "cubic"])
def test_uniqueness_across_assignments(corpus, name):
    E = corpus[name]
    a = semistabilize(E)
    b = semistabilize(E, zero_assignment(E))
    assert sheaf_equal(a.restriction, b.restriction)


def _coordinate_free(F):
    ch = chern(F)
    return (
        ch,
        h0_profile(F, -2, 4),
        sorted((P.residue_degree, c) for P, c in singular_points(F)),
        F.double_dual_is_free(),
    )


@pytest.mark.parametrize("name", ["xyz2", "xyz3", "height2_m4", "section"])
def test_uniqueness_under_coordinate_change(corpus, name):
    g = [[2, 1, 0], [1, 1, 0], [0, 3, 1]]  # fixes the plane z = 0
    E = corpus[name]
    a = semistabilize(E)
    b = semistabilize(transform(E, g))
    assert _coordinate_free(a.restriction) == _coordinate_free(b.restriction)


def test_bubble_report_height_two(corpus):
    rep = bubble_report(corpus["height2_m4"])
    assert rep.chern.c2 == 2
    assert [(s.point.label(), s.charge) for s in rep.singular] == [("[0,0,1]", 1)]
    assert rep.smooth_charge == 1
    assert rep.height == ">=2"


def test_bubble_report_rejects_barren(corpus):
    with pytest.raises(ValueError):
        bubble_report(corpus["xyz"])


def test_normalize_ladders(corpus):
    tr = normalize_to_fertile(corpus["xyz"])
    assert (tr.stage_a_steps, tr.stage_b_steps) == (1, 0)
    assert families_equal(tr.final.family, corpus["xyz2"])
    tr = normalize_to_fertile(corpus["xyz4"])
    assert (tr.stage_a_steps, tr.stage_b_steps) == (0, 2)
    assert families_equal(tr.final.family, corpus["xyz2"])
    assert normalize_to_fertile(corpus["xyz2"]).steps == 0


def test_normalize_longer_ladder():
    tr = normalize_to_fertile(column("x", "y", "z^6"))
    assert tr.stage_b_steps == 4
    assert {e.report.k for e in tr.entries} == {1}


def test_normalize_needs_splitting(corpus):
    with pytest.raises(ValueError):
        normalize_to_fertile(corpus["double"])


def test_step_cap_value():
    assert step_cap(1) == 12
