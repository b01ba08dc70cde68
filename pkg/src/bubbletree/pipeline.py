"""End-to-end drivers: the semistabilization loop, the barren/cone/fertile
trichotomy, bubble reports and the ladder that turns a family into a fertile one.

Every equivalence the theory guarantees is recomputed independently and compared;
a disagreement raises :class:`ConsistencyError` rather than being reported softly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

from .blowup import (
    BlowupModule,
    TwistAssignment,
    elementary_modification_up,
    exceptional_restriction,
    naive_extension,
    p1_splitting,
    pushforward,
    twist,
)
from .exactring import Poly, substitute
from .family import (
    IDEAL_FACTOR,
    TRIVIAL_FACTOR,
    FamilyPresentation,
    central_restriction,
    find_splitting,
    generic_multiplicity,
    multiplicity,
    modify_family,
    require_valid,
    same_presentation,
)
from .p2sheaf import (
    UNSTABLE,
    ChernData,
    P2Sheaf,
    PointOnP2,
    SectionQuotient,
    SplittingType,
    chern,
    free_summand_near,
    free_summand_section,
    h0,
    ideal_local_data,
    is_semistable,
    max_destabilizer,
    points_of,
    restrict_to_line,
    sheaf_equal,
    singular_points,
)

BARREN = "barren"
CONE = "cone"
FERTILE = "fertile"


class ConsistencyError(RuntimeError):
    """Two independent computations of the same invariant disagree."""


class StepLimitExceeded(RuntimeError):
    pass


def step_cap(k: int) -> int:
    return 4 * k + 8


# ---------------------------------------------------------------------------
# Semistabilization
# ---------------------------------------------------------------------------


@dataclass
class LoopStep:
    delta_before: int
    delta_after: int
    destabilizer_degree: int
    quotient_degree: int

    @property
    def predicted_delta(self) -> int:
        return self.delta_before + 2 * (self.destabilizer_degree - self.quotient_degree) - 1

    def as_dict(self):
        return {
            "delta_before": self.delta_before,
            "delta_after": self.delta_after,
            "destabilizer_degree": self.destabilizer_degree,
            "quotient_degree": self.quotient_degree,
        }


@dataclass
class Visited:
    """An extension met along the loop, kept for the equivalence checks."""

    chern: ChernData
    splitting: SplittingType


@dataclass
class SemistableExtension:
    extension: BlowupModule
    restriction: P2Sheaf
    chern: ChernData
    stability: str
    k: int
    steps: List[LoopStep] = field(default_factory=list)
    visited: List[Visited] = field(default_factory=list)

    def deltas(self) -> List[int]:
        return [v.chern.delta for v in self.visited]


def renormalize(M: BlowupModule) -> BlowupModule:
    """Twist so that c1 of the exceptional restriction lies in {0, -1}."""
    c1 = chern(exceptional_restriction(M)).c1
    k = math.ceil(c1 / 2)
    return twist(M, k) if k else M


def semistabilize(
    E: FamilyPresentation,
    assignment: Optional[TwistAssignment] = None,
    max_steps: Optional[int] = None,
    k: Optional[int] = None,
) -> SemistableExtension:
    require_valid(E)
    if k is None:
        k = multiplicity(E)
    cap = step_cap(k) if max_steps is None else max_steps
    M = renormalize(naive_extension(E, assignment))
    steps: List[LoopStep] = []
    visited: List[Visited] = []
    while True:
        F = exceptional_restriction(M)
        ch = chern(F)
        if ch.c1 not in (0, -1):
            raise ConsistencyError(f"renormalization left c1 = {ch.c1}")
        if ch.delta > 4 * k:
            raise ConsistencyError(f"discriminant {ch.delta} exceeds 4k = {4 * k}")
        visited.append(Visited(ch, p1_splitting(M)))
        verdict = is_semistable(F)
        if verdict != UNSTABLE:
            return SemistableExtension(M, F, ch, verdict, k, steps, visited)
        if len(steps) >= cap:
            raise StepLimitExceeded(f"semistabilization did not stop within {cap} steps")
        d = max_destabilizer(F)
        M = renormalize(elementary_modification_up(M, d.kernel_gens))
        after = chern(exceptional_restriction(M)).delta
        step = LoopStep(ch.delta, after, d.degree, d.quotient_degree)
        if after != step.predicted_delta or after < ch.delta + 1:
            raise ConsistencyError(
                f"step changed the discriminant {ch.delta} -> {after}, expected {step.predicted_delta}"
            )
        steps.append(step)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def trivial_at_infinity(ch: ChernData, k: int) -> bool:
    """The discriminant side of the equivalence: Delta = 4k."""
    return ch.delta == 4 * k


@dataclass
class ClassificationReport:
    verdict: str
    k: int
    k_generic: int
    chern: ChernData
    splitting: SplittingType
    double_dual_free: bool
    flags: dict
    semistable: SemistableExtension

    @property
    def restriction(self) -> P2Sheaf:
        return self.semistable.restriction

    def as_dict(self):
        return {
            "verdict": self.verdict,
            "k": self.k,
            "k_generic": self.k_generic,
            "chern": self.chern.as_dict(),
            "stability": self.semistable.stability,
            "p1_splitting": self.splitting.as_dict(),
            "double_dual_free": self.double_dual_free,
            "flags": dict(sorted(self.flags.items())),
            "loop": [s.as_dict() for s in self.semistable.steps],
        }


def check_equivalences(sx: SemistableExtension) -> dict:
    """Cross-check trivial splitting against Delta = 4k and c2 <= k on every visited extension."""
    k = sx.k
    for v in sx.visited:
        if v.splitting.is_trivial() != trivial_at_infinity(v.chern, k):
            raise ConsistencyError(
                f"splitting {v.splitting.types} disagrees with Delta = {v.chern.delta}, k = {k}"
            )
        if v.chern.c2 > k:
            raise ConsistencyError(f"c2 = {v.chern.c2} exceeds k = {k}")
    deltas = sx.deltas()
    if any(b <= a for a, b in zip(deltas, deltas[1:])):
        raise ConsistencyError(f"discriminant not increasing along the loop: {deltas}")
    if deltas and deltas[-1] != max(deltas):
        raise ConsistencyError("semistable endpoint does not carry the largest discriminant")
    return {
        "splitting_matches_discriminant": True,
        "c2_bounded_by_k": True,
        "endpoint_maximal": True,
        "step_formula": True,
    }


def classify(
    E: FamilyPresentation,
    seed: int = 0,
    samples: int = 5,
    assignment: Optional[TwistAssignment] = None,
    max_steps: Optional[int] = None,
) -> ClassificationReport:
    require_valid(E)
    k = multiplicity(E)
    gm = generic_multiplicity(E, samples=samples, seed=seed)
    sx = semistabilize(E, assignment, max_steps=max_steps, k=k)
    F = sx.restriction
    Z = F.ring.var("Z")
    split = restrict_to_line(F, Z)
    if split != p1_splitting(sx.extension):
        raise ConsistencyError("line restriction and strict-transform restriction disagree")
    flags = check_equivalences(sx)
    if gm.k_generic > k:
        raise ConsistencyError(f"generic multiplicity {gm.k_generic} exceeds k = {k}")
    trivial = split.is_trivial()
    dd_free = F.double_dual_is_free()
    if not trivial:
        verdict = BARREN
    elif dd_free:
        verdict = CONE
    else:
        verdict = FERTILE
    if trivial and sx.chern.c2 != k:
        raise ConsistencyError(f"trivial at infinity but c2 = {sx.chern.c2} != k = {k}")
    flags["pushforward_recovers_family"] = pushforward(sx.extension).equals_family
    if not flags["pushforward_recovers_family"]:
        raise ConsistencyError("pushforward of the extension differs from the family")
    return ClassificationReport(verdict, k, gm.k_generic, sx.chern, split, dd_free, flags, sx)


# ---------------------------------------------------------------------------
# Bubbles
# ---------------------------------------------------------------------------


@dataclass
class SingularPointData:
    point: PointOnP2
    charge: int
    local_model: List[List[str]]
    free_summand_near: bool

    def as_dict(self):
        return {
            "point": self.point.label(),
            "ideal": self.point.generators(),
            "residue_degree": self.point.residue_degree,
            "charge": self.charge,
            "local_model": self.local_model,
            "free_summand_near": self.free_summand_near,
        }


@dataclass
class QuotientPointData:
    point: PointOnP2
    colength: int
    generators: int
    syzygies: int
    local_generators: List[str]

    @property
    def complete_intersection(self) -> bool:
        return self.generators == 2 and self.syzygies == 1

    def as_dict(self):
        return {
            "point": self.point.label(),
            "colength": self.colength,
            "local_generators": self.generators,
            "local_syzygies": self.syzygies,
            "generator_list": self.local_generators,
        }


@dataclass
class BubbleReport:
    verdict: str
    bubble: P2Sheaf
    chern: ChernData
    stability: str
    locally_free: bool
    singular: List[SingularPointData]
    smooth_charge: int
    h0: int
    section: Optional[SectionQuotient]
    quotient_points: List[QuotientPointData]

    @property
    def height(self) -> str:
        return "1" if self.locally_free else ">=2"

    def as_dict(self):
        return {
            "verdict": self.verdict,
            "chern": self.chern.as_dict(),
            "stability": self.stability,
            "locally_free": self.locally_free,
            "height": self.height,
            "singular_points": [s.as_dict() for s in self.singular],
            "smooth_charge": self.smooth_charge,
            "h0": self.h0,
            "section_quotient": None if self.section is None else {
                "twist": self.section.twist,
                "ideal": self.section.ideal_strings(),
                "points": [q.as_dict() for q in self.quotient_points],
            },
            "presentation": presentation_strings(self.bubble),
        }


def presentation_strings(F: P2Sheaf) -> dict:
    M = F.module
    return {
        "degrees": list(M.degrees),
        "relations": [[str(c[i]) for c in M.relations] for i in range(M.ngens)],
    }


def _dehomogenize(p: Poly, point: PointOnP2) -> str:
    coords = point.rational_coordinates()
    j = max(i for i, c in enumerate(coords) if c != 0) if coords else 2
    name = p.ring.names[j]
    return str(substitute(p, {name: p.ring.const(1)}, p.ring))


def local_model(F: P2Sheaf, point: PointOnP2) -> List[List[str]]:
    """The presentation matrix restricted to the affine chart containing the point."""
    M = F.module
    return [[_dehomogenize(c[i], point) for c in M.relations] for i in range(M.ngens)]


def bubble_report(E: FamilyPresentation, report: Optional[ClassificationReport] = None, near_degree: int = 3) -> BubbleReport:
    if report is None:
        report = classify(E)
    if report.verdict == BARREN:
        raise ValueError("bubble report requested for a barren family")
    F = report.restriction
    ch = report.chern
    sing = []
    for P, charge in singular_points(F):
        near = free_summand_near(F, P, near_degree) is not None
        sing.append(SingularPointData(P, charge, local_model(F, P), near))
    smooth = chern(F.double_dual()).c2
    total = sum(s.charge * s.point.residue_degree for s in sing) + smooth
    if total != ch.c2:
        raise ConsistencyError(f"local charges {total} do not add up to c2 = {ch.c2}")
    if ch.c2 != report.k:
        raise ConsistencyError(f"bubble c2 = {ch.c2} differs from k = {report.k}")
    sections = h0(F, 0)
    sq = free_summand_section(F) if sections > 0 else None
    qpts = []
    if sq is not None:
        for P in points_of(sq.ideal):
            data = ideal_local_data(sq.ideal, P)
            qpts.append(QuotientPointData(P, data["colength"], data["generators"], data["syzygies"], data["local_generators"]))
    return BubbleReport(
        report.verdict, F, ch, report.semistable.stability, not sing, sing, smooth, sections, sq, qpts
    )


# ---------------------------------------------------------------------------
# Normalization ladder
# ---------------------------------------------------------------------------

START = "start"


@dataclass
class TraceEntry:
    direction: str
    family: FamilyPresentation
    report: ClassificationReport

    def as_dict(self):
        return {
            "direction": self.direction,
            "family": self.family.entry_strings(),
            "verdict": self.report.verdict,
            "k": self.report.k,
            "delta": self.report.chern.delta,
        }


@dataclass
class NormalizationTrace:
    entries: List[TraceEntry]
    stage_a_steps: int
    stage_b_steps: int

    @property
    def final(self) -> TraceEntry:
        return self.entries[-1]

    @property
    def steps(self) -> int:
        return self.stage_a_steps + self.stage_b_steps

    def stage(self, direction: str) -> List[TraceEntry]:
        return [e for e in self.entries if e.direction == direction]

    def as_dict(self):
        return {
            "stage_a_steps": self.stage_a_steps,
            "stage_b_steps": self.stage_b_steps,
            "final_verdict": self.final.report.verdict,
            "final_family": self.final.family.entry_strings(),
            "entries": [e.as_dict() for e in self.entries],
        }


def _ladder_step(E: FamilyPresentation, direction: str, degree_bound: int) -> FamilyPresentation:
    w = find_splitting(central_restriction(E), degree_bound)
    if w is None:
        raise ConsistencyError("the O + I splitting was lost along the ladder")
    E2 = modify_family(E, w, direction)
    require_valid(E2)
    return E2


def normalize_to_fertile(
    E: FamilyPresentation,
    max_steps: Optional[int] = None,
    seed: int = 0,
    degree_bound: int = 3,
) -> NormalizationTrace:
    require_valid(E)
    if find_splitting(central_restriction(E), degree_bound) is None:
        raise ValueError("the central restriction does not split off a trivial summand")
    rep = classify(E, seed=seed)
    k = rep.k
    cap = step_cap(k) if max_steps is None else max_steps
    entries = [TraceEntry(START, E, rep)]

    def advance(direction):
        nonlocal E, rep
        prev = rep
        E = _ladder_step(E, direction, degree_bound)
        rep = classify(E, seed=seed)
        if rep.k != k:
            raise ConsistencyError(f"multiplicity changed from {k} to {rep.k}")
        entries.append(TraceEntry(direction, E, rep))
        return prev

    a = 0
    while rep.verdict == BARREN:
        if a >= cap:
            raise StepLimitExceeded(f"stage A exceeded {cap} steps")
        prev = advance(IDEAL_FACTOR)
        a += 1
        if rep.chern.delta < prev.chern.delta:
            raise ConsistencyError("discriminant decreased during stage A")
        if prev.verdict == CONE and rep.verdict == CONE and not sheaf_equal(prev.restriction, rep.restriction):
            raise ConsistencyError("consecutive cones differ in stage A")
    b = 0
    while rep.verdict == CONE:
        if b >= cap:
            raise StepLimitExceeded(f"stage B exceeded {cap} steps")
        if free_summand_section(rep.restriction) is None:
            raise ConsistencyError("cone restriction lacks the O-section shape")
        prev = advance(TRIVIAL_FACTOR)
        b += 1
        if rep.chern.delta != prev.chern.delta:
            raise ConsistencyError("discriminant changed during stage B")
    if rep.verdict != FERTILE:
        raise ConsistencyError(f"ladder ended on a {rep.verdict} family")
    return NormalizationTrace(entries, a, b)


def families_equal(A: FamilyPresentation, B: FamilyPresentation) -> bool:
    """Column spans agree after permuting and re-signing the free basis."""
    return same_presentation(A, B)
