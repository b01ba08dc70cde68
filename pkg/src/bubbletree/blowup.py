"""The blow-up of affine 3-space at the origin, through its Cox ring.

Sheaves on the blow-up are T-torsion-free graded modules over k[X,Y,Z,T] with
weights (1,1,1,-1); the blow-down is x = XT, y = YT, z = ZT, the exceptional
plane is {T = 0} and the strict transform of the central plane is {Z = 0}.

Sign convention: a generator of weight w spans a copy of O(w), where O(1) is
the line bundle of the exceptional divisor.  Its restriction to the
exceptional plane is O(-w), so twisting by O(k) lowers c1 of a rank-two
restriction by 2k.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .exactring import QQ, Poly, PolyRing, change_ring, monomials_of_degree, substitute
from .family import FamilyPresentation
from .gbengine import (
    DoubleDual,
    FreeModule,
    GradedModule,
    Vec,
    groebner,
    lift,
    preimage,
    minimal_generators,
    minimize_relations,
    present_submodule,
    prune,
    saturate,
    vec_is_zero,
)
from .p2sheaf import P2Sheaf, SplittingType, splitting_type

log = logging.getLogger(__name__)


class BlowupModel:
    """Rings and maps of the Cox-ring model."""

    def __init__(self, field=QQ):
        self.field = field
        self.cox = PolyRing(("X", "Y", "Z", "T"), (1, 1, 1, -1), field)
        self.plane = PolyRing(("X", "Y", "Z"), field=field)
        self.strict = PolyRing(("X", "Y", "T"), (1, 1, -1), field)
        self.line = PolyRing(("X", "Y"), field=field)
        self.T = self.cox.var("T")

    def blow_down(self, p: Poly) -> Poly:
        """Image of a polynomial in x, y, z under x = XT, y = YT, z = ZT."""
        X, Y, Z, T = self.cox.gens()
        names = p.ring.names
        return substitute(p, {names[0]: X * T, names[1]: Y * T, names[2]: Z * T}, self.cox)

    def __eq__(self, other):
        return isinstance(other, BlowupModel) and self.field == other.field

    def __hash__(self):
        return hash(("blowup", repr(self.field)))


@dataclass(frozen=True)
class TwistAssignment:
    rows: Tuple[int, ...]
    cols: Tuple[int, ...]

    def feasible(self, ords: Sequence[Sequence[Optional[int]]]) -> bool:
        for i, row in enumerate(ords):
            for j, o in enumerate(row):
                if o is not None and self.cols[j] - self.rows[i] > o:
                    return False
        return True

    def residual(self, ords) -> int:
        """Total power of T left in the entries after stripping."""
        return sum(o + self.rows[i] - self.cols[j] for i, row in enumerate(ords) for j, o in enumerate(row) if o is not None)


def entry_orders(E: FamilyPresentation) -> List[List[Optional[int]]]:
    return [[None if p.is_zero() else p.order() for p in row] for row in E.rows()]


def _cols_for(rows: Sequence[int], ords) -> Tuple[int, ...]:
    cols = []
    for j in range(len(ords[0]) if ords else 0):
        vals = [ords[i][j] + rows[i] for i in range(len(ords)) if ords[i][j] is not None]
        cols.append(min(vals) if vals else 0)
    return tuple(cols)


def zero_assignment(E: FamilyPresentation) -> TwistAssignment:
    ords = entry_orders(E)
    rows = (0,) * E.nrows
    return TwistAssignment(rows, _cols_for(rows, ords))


def stripping_assignment(E: FamilyPresentation) -> TwistAssignment:
    """Row twists leaving the least total T-power, ties to the lexicographically smallest.

    For fixed row twists the best column twist is ``s_j = min_i (ord_ij + t_i)``;
    row twists are searched in a box large enough to reach every optimum.
    """
    ords = entry_orders(E)
    if not ords or not ords[0]:
        return TwistAssignment((0,) * E.nrows, ())
    top = max((o for row in ords for o in row if o is not None), default=0) + 1
    best = None
    for rows in itertools.product(range(top + 1), repeat=E.nrows):
        a = TwistAssignment(rows, _cols_for(rows, ords))
        key = (a.residual(ords), rows)
        if best is None or key < best[0]:
            best = (key, a)
    return best[1]


class BlowupModule:
    """Graded module over the Cox ring, plus its chart map to the original family.

    ``chart[i]`` is the image of generator i on the chart T = 1, written over the
    generators of ``family``.
    """

    def __init__(self, model: BlowupModel, module: GradedModule, family: FamilyPresentation, chart: List[Vec]):
        self.model = model
        self.module = module
        self.family = family
        self.chart = chart

    @property
    def degrees(self):
        return self.module.free.degrees

    def __repr__(self):
        return f"BlowupModule(degrees={self.degrees}, relations={len(self.module.relations)})"


def _strip_T(p: Poly, shift: int, model: BlowupModel) -> Poly:
    """``p(XT, YT, ZT) * T^shift`` with every T-exponent nonnegative."""
    terms = {}
    for e, c in p.terms.items():
        k = sum(e) + shift
        if k < 0:
            raise ValueError("twist assignment is not feasible")
        terms[(e[0], e[1], e[2], k)] = model.field(c) if model.field != p.ring.field else c
    return Poly(model.cox, terms)


def remove_T_torsion(model: BlowupModel, free: FreeModule, relations: Sequence[Vec]) -> List[Vec]:
    sat = saturate(list(relations), [model.T], free)
    if groebner(sat, free).same_module(groebner(list(relations), free)):
        return list(relations)
    return minimal_generators(sat, free)


def naive_extension(E: FamilyPresentation, assignment: Optional[TwistAssignment] = None, model: Optional[BlowupModel] = None) -> BlowupModule:
    model = model or BlowupModel(E.ring.field)
    a = assignment or stripping_assignment(E)
    if not a.feasible(entry_orders(E)):
        raise ValueError("twist assignment is not feasible")
    free = FreeModule(model.cox, a.rows)
    cols = []
    for j, col in enumerate(E.columns):
        cols.append([_strip_T(p, a.rows[i] - a.cols[j], model) for i, p in enumerate(col)])
    cols = remove_T_torsion(model, free, cols)
    chart = [[E.ring.one if k == i else E.ring.zero for k in range(E.nrows)] for i in range(E.nrows)]
    return reflexive_hull(BlowupModule(model, GradedModule(free, cols), E, chart))


def is_reflexive(M: BlowupModule) -> bool:
    D = DoubleDual(M.module)
    return _canonical_is_iso(M.module, D)


def _canonical_is_iso(module: GradedModule, D: DoubleDual) -> bool:
    kernel = preimage(D.canonical, GradedModule(D.ambient, []))
    G = groebner(module.relations, module.free)
    if not all(G.contains(v) for v in kernel):
        return False
    img = groebner(D.image_gens(), D.ambient)
    return all(img.contains(g) for g in D.gens)


def reflexive_hull(M: BlowupModule) -> BlowupModule:
    """``M**`` over the Cox ring; the irrelevant locus has codimension three, so this
    is the module of the reflexive hull of the sheaf."""
    D = DoubleDual(M.module)
    if _canonical_is_iso(M.module, D):
        return M
    model = M.model
    fam = M.family
    R = fam.ring
    gens = D.gens
    H = present_submodule(gens, D.ambient)
    H = prune(H, embedding=gens)
    gens = H.embedding
    H = minimize_relations(H)
    # chart images: on T = 1 the canonical map is an isomorphism, so solve there
    to_chart = {"X": R.gens()[0], "Y": R.gens()[1], "Z": R.gens()[2], "T": R.one}
    rows = [[substitute(p, to_chart, R) for p in row] for row in D.canonical]
    chart_free = FreeModule(R, [0] * D.ambient.rank)
    chart = []
    for g in gens:
        target = [substitute(p, to_chart, R) for p in g]
        c = lift(target, rows, chart_free)
        if c is None:
            raise ValueError("reflexive hull differs from the family away from the exceptional plane")
        chart.append(_combine(c, M.chart, fam))
    log.debug("reflexive hull: %d -> %d generators", M.module.ngens, H.ngens)
    return BlowupModule(model, GradedModule(H.free, H.relations), fam, chart)


def _combine(coeffs: Sequence[Poly], images: Sequence[Vec], fam: FamilyPresentation) -> Vec:
    out = [fam.ring.zero] * fam.nrows
    for c, img in zip(coeffs, images):
        if c.is_zero():
            continue
        for k in range(fam.nrows):
            if not img[k].is_zero():
                out[k] = out[k] + c * img[k]
    return out


def trivial_extension(model: BlowupModel, E: FamilyPresentation) -> BlowupModule:
    """Pullback of a free family: no relations."""
    if E.columns:
        raise ValueError("trivial extension needs a free family")
    free = FreeModule(model.cox, [0] * E.nrows)
    chart = [[E.ring.one if k == i else E.ring.zero for k in range(E.nrows)] for i in range(E.nrows)]
    return BlowupModule(model, GradedModule(free, []), E, chart)


def exceptional_restriction(M: BlowupModule) -> P2Sheaf:
    """``M / TM`` over k[X,Y,Z]."""
    model = M.model
    cols = [[_set_T_zero(p, model.plane) for p in c] for c in M.module.relations]
    return P2Sheaf(GradedModule(FreeModule(model.plane, M.degrees), cols))


def _set_T_zero(p: Poly, target: PolyRing, drop: int = 3) -> Poly:
    terms = {}
    for e, c in p.terms.items():
        if e[drop] == 0:
            terms[tuple(a for i, a in enumerate(e) if i != drop)] = c
    return Poly(target, terms)


def twist(M: BlowupModule, k: int) -> BlowupModule:
    """Tensor with ``O(k)``: every generator weight goes up by k."""
    if k == 0:
        return M
    free = FreeModule(M.model.cox, [d + k for d in M.degrees])
    return BlowupModule(M.model, GradedModule(free, M.module.relations), M.family, M.chart)


def elementary_modification_up(M: BlowupModule, kernel_gens: Sequence[Vec]) -> BlowupModule:
    """Kernel of ``M -> ι_*Q`` where ``Q = (M/TM) / ⟨kernel_gens⟩``.

    ``kernel_gens`` are vectors over the generators of ``M/TM`` (polynomials in
    X, Y, Z).  The kernel is generated by their lifts and by ``T e_i``.
    """
    model = M.model
    free = M.module.free
    rels = M.module.relations
    T = model.T
    n = free.rank
    gens = []
    for v in kernel_gens:
        gens.append([change_ring(p, model.cox) for p in v])
    for i in range(n):
        e = [model.cox.zero] * n
        e[i] = T
        gens.append(e)
    gens = minimal_generators(gens, free, rels)
    P = present_submodule(gens, free, rels)
    P = prune(P, embedding=gens)
    emb = P.embedding
    P = minimize_relations(P)
    chart = [_chart_image(v, M) for v in emb]
    return BlowupModule(model, GradedModule(P.free, P.relations), M.family, chart)


def _chart_image(v: Vec, M: BlowupModule) -> Vec:
    """Image on T = 1 of a vector over M's generators, over the family's generators."""
    fam = M.family
    R = fam.ring
    X, Y, Z = R.gens()
    out = [R.zero] * fam.nrows
    for coeff, img in zip(v, M.chart):
        if coeff.is_zero():
            continue
        c = substitute(coeff, {"X": X, "Y": Y, "Z": Z, "T": R.one}, R)
        for k in range(fam.nrows):
            if not img[k].is_zero():
                out[k] = out[k] + c * img[k]
    return out


@dataclass
class Pushforward:
    module: GradedModule
    generators: List[Vec]
    equals_family: bool
    degree_bound: int
    stabilized: bool


def pushforward(M: BlowupModule, degree_bound: Optional[int] = None) -> Pushforward:
    """Weight-zero part of M as a module over k[x,y,z], inside the original family.

    The weight-zero part of ``S·e_i`` (weight ``g``) is spanned over the weight-zero
    subring by ``X^a e_i`` with ``|a| = -g`` when ``g <= 0`` and by ``T^g e_i`` when
    ``g > 0``, so the generating set is finite and collected exactly.
    """
    fam = M.family
    R = fam.ring
    if degree_bound is None:
        degs = [p.total_degree() for c in fam.columns for p in c if not p.is_zero()]
        degree_bound = 2 * max(degs, default=0) + 6
    gens = []
    for g, img in zip(M.degrees, M.chart):
        if g > 0:
            gens.append(list(img))
            continue
        if -g > degree_bound:
            raise RuntimeError(f"pushforward needs generators beyond degree bound {degree_bound}")
        for mono in _monomials(R, -g):
            gens.append([mono * p for p in img])
    gens = [v for v in gens if not vec_is_zero(v)]
    G = groebner(gens + fam.columns, fam.free)
    equal = G.is_whole()
    module = present_submodule(gens, fam.free, fam.columns)
    return Pushforward(module, gens, equal, degree_bound, True)


def _monomials(R: PolyRing, d: int) -> List[Poly]:
    return [R.monomial(e) for e in monomials_of_degree(R.nvars, d)]


def restrict_to_strict_transform(M: BlowupModule) -> GradedModule:
    """``M / ZM`` over k[X,Y,T]."""
    model = M.model
    cols = [[_set_T_zero(p, model.strict, drop=2) for p in c] for c in M.module.relations]
    return GradedModule(FreeModule(model.strict, M.degrees), cols)


def restrict_to_p1(M: BlowupModule) -> GradedModule:
    """``M / (Z, T) M`` over k[X,Y]."""
    model = M.model
    cols = []
    for c in M.module.relations:
        col = []
        for p in c:
            terms = {(e[0], e[1]): a for e, a in p.terms.items() if e[2] == 0 and e[3] == 0}
            col.append(Poly(model.line, terms))
        cols.append(col)
    return GradedModule(FreeModule(model.line, M.degrees), cols)


def p1_splitting(M: BlowupModule) -> SplittingType:
    return splitting_type(restrict_to_p1(M))
