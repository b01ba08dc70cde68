"""Coherent sheaves on the projective plane and on lines inside it.

A sheaf is represented by a finitely presented graded module over k[X,Y,Z].
Global sections of twists are read off the saturation of the image of the
module in its double dual, which is the correct answer for sheaves whose only
module torsion has finite length (every sheaf the pipeline produces).
"""

from __future__ import annotations

import itertools
import math
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import comb
from typing import List, Optional, Sequence, Tuple

import sympy

from .exactring import QQ, Poly, PolyRing, change_ring, monomials_of_degree, substitute
from .gbengine import (
    DoubleDual,
    FreeModule,
    GradedModule,
    NotFinite,
    Vec,
    _divides,
    colength,
    count_standard_monomials,
    lift,
    torsion,
    free_resolution,
    hilbert_function,
    hilbert_numerator,
    hilbert_polynomial,
    ideal_gb,
    minimal_generators,
    minimal_presentation,
    preimage,
    present_submodule,
    prune,
    saturate,
    syzygy_vectors,
    vec_degree,
    vec_is_zero,
)

log = logging.getLogger(__name__)

P2_NAMES = ("X", "Y", "Z")


def p2_ring(field=QQ) -> PolyRing:
    return PolyRing(P2_NAMES, field=field)


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChernData:
    rank: int
    c1: int
    c2: int
    delta: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "delta", 4 * self.c2 - self.c1 * self.c1)

    def twisted(self, k: int) -> "ChernData":
        """Chern data of ``F(k)`` for a rank-r sheaf ``F``."""
        r = self.rank
        return ChernData(r, self.c1 + r * k, self.c2 + (r - 1) * self.c1 * k + r * (r - 1) // 2 * k * k)

    def as_dict(self):
        return {"rank": self.rank, "c1": self.c1, "c2": self.c2, "delta": self.delta}


@dataclass(frozen=True)
class SplittingType:
    types: Tuple[int, ...]
    torsion: int = 0

    @property
    def rank(self) -> int:
        return len(self.types)

    def is_trivial(self) -> bool:
        return self.torsion == 0 and all(a == 0 for a in self.types)

    def as_dict(self):
        return {"types": list(self.types), "torsion": self.torsion}


@dataclass(frozen=True)
class PointOnP2:
    """Closed point given by its homogeneous prime ideal (reduced GB)."""

    ideal: Tuple[Poly, ...]
    residue_degree: int

    def generators(self) -> List[str]:
        return sorted(str(p) for p in self.ideal)

    def rational_coordinates(self) -> Optional[Tuple]:
        """Projective coordinates of a rational point, scaled so the last nonzero one is 1."""
        if self.residue_degree != 1:
            return None
        for j in (2, 1, 0):
            sol = _solve_linear_point(list(self.ideal), j)
            if sol is not None:
                return tuple(sol)
        return None

    def label(self) -> str:
        c = self.rational_coordinates()
        if c is not None:
            fmt = self.ideal[0].ring.field.fmt
            return "[" + ",".join(fmt(x) for x in c) + "]"
        return "V(" + ", ".join(self.generators()) + ")"

    def __eq__(self, other):
        return isinstance(other, PointOnP2) and self.generators() == other.generators()

    def __hash__(self):
        return hash(tuple(self.generators()))

    def __repr__(self):
        return f"PointOnP2({self.label()}, deg={self.residue_degree})"


def _solve_linear_point(ideal: Sequence[Poly], j: int):
    """Coordinates with x_j = 1 if the ideal is generated by linear forms vanishing there."""
    ring = ideal[0].ring
    F = ring.field
    pt = [None, None, None]
    pt[j] = F.one
    rows = []
    for p in ideal:
        if p.total_degree() != 1 or not p.is_homogeneous():
            return None
        rows.append([p.terms.get(tuple(1 if k == i else 0 for k in range(3)), F.zero) for i in range(3)])
    unknown = [i for i in range(3) if i != j]
    # solve rows[.][u0]*a + rows[.][u1]*b = -rows[.][j]
    sol = _solve_2x2(rows, unknown, j, F)
    if sol is None:
        return None
    pt[unknown[0]], pt[unknown[1]] = sol
    for p in ideal:
        if p.evaluate(pt) != 0:
            return None
    return pt


def _solve_2x2(rows, unknown, j, F):
    for r1, r2 in itertools.combinations(rows, 2):
        a, b, c = r1[unknown[0]], r1[unknown[1]], -r1[j]
        d, e, f = r2[unknown[0]], r2[unknown[1]], -r2[j]
        det = a * e - b * d
        if det != 0:
            return ((c * e - b * f) / det, (a * f - c * d) / det)
    return None


# ---------------------------------------------------------------------------
# The sheaf type
# ---------------------------------------------------------------------------


class P2Sheaf:
    """Coherent sheaf on ℙ² given by a graded module over k[X,Y,Z]."""

    def __init__(self, module: GradedModule):
        ring = module.ring
        if ring.nvars != 3 or any(w != 1 for w in ring.weights):
            raise ValueError("P2Sheaf needs a standard graded ring in three variables")
        module.relation_degrees()  # raises on an inhomogeneous presentation
        self.module = module

    @classmethod
    def from_columns(cls, ring: PolyRing, gen_degrees: Sequence[int], columns: Sequence[Vec]) -> "P2Sheaf":
        return cls(GradedModule(FreeModule(ring, gen_degrees), columns))

    @property
    def ring(self) -> PolyRing:
        return self.module.ring

    def twist(self, k: int) -> "P2Sheaf":
        """``F(k)``: generator degrees drop by k."""
        F = FreeModule(self.ring, [d - k for d in self.module.free.degrees])
        return P2Sheaf(GradedModule(F, self.module.relations))

    # -- hull and sections --------------------------------------------------
    @cached_property
    def _dd(self) -> DoubleDual:
        return DoubleDual(self.module)

    @cached_property
    def rank(self) -> int:
        return chern(self).rank

    def double_dual_gens(self) -> Tuple[List[Vec], FreeModule]:
        return self._dd.gens, self._dd.ambient

    def double_dual(self) -> "P2Sheaf":
        return P2Sheaf(present_submodule(self._dd.gens, self._dd.ambient))

    @cached_property
    def _sections(self) -> List[Vec]:
        """Generators of ``Γ_*(F)`` inside the ambient free module of ``F**``."""
        D = self._dd
        img = D.image_gens()
        if not img:
            return []
        m = list(self.ring.gens())
        sat = saturate(img, m, D.ambient)
        return minimal_generators(sat, D.ambient)

    def section_generators(self) -> Tuple[List[Vec], FreeModule]:
        return self._sections, self._dd.ambient

    def has_curve_torsion(self) -> bool:
        """True when the module torsion is not of finite length."""
        T = torsion(self.module)
        return T.ngens > 0 and hilbert_polynomial(T).degree() >= 0

    def is_locally_free(self) -> bool:
        return not singular_points(self)

    def double_dual_is_free(self) -> bool:
        return not syzygy_vectors(self._dd.gens, self._dd.ambient)

    def double_dual_degrees(self) -> List[int]:
        return sorted(vec_degree(g, self._dd.ambient.degrees) for g in self._dd.gens)

    def __repr__(self):
        return f"P2Sheaf({self.module!r})"


def _submodule_hf(gens: Sequence[Vec], free: FreeModule, d: int) -> int:
    total = sum(_hf_free_rank1(d - g, free.ring.nvars) for g in free.degrees)
    return total - hilbert_function(GradedModule(free, gens), d)


def _hf_free_rank1(d: int, n: int) -> int:
    if d < 0:
        return 0
    return comb(d + n - 1, n - 1)


def h0(F: P2Sheaf, d: int) -> int:
    """``dim H⁰(F(d))`` for a sheaf without torsion along curves."""
    gens, amb = F.section_generators()
    if not gens:
        return 0
    return _submodule_hf(gens, amb, d)


def h0_double_dual(F: P2Sheaf, d: int) -> int:
    gens, amb = F.double_dual_gens()
    if not gens:
        return 0
    return _submodule_hf(gens, amb, d)


# ---------------------------------------------------------------------------
# Chern data
# ---------------------------------------------------------------------------


def chern_from_numerator(K: dict) -> ChernData:
    r = sum(K.values())
    s1 = sum(c * a for a, c in K.items())
    s2 = sum(c * a * a for a, c in K.items())
    c1 = -s1
    twice = c1 * c1 - s2
    if twice % 2:
        raise ValueError("non-integral second Chern class")
    return ChernData(r, c1, twice // 2)


def chern(F: P2Sheaf) -> ChernData:
    return chern_from_numerator(hilbert_numerator(F.module))


def chern_from_resolution(F: P2Sheaf) -> ChernData:
    """Multiply ``(1 - g h)^{±1}`` over the twists of a free resolution, modulo h³."""
    res = free_resolution(F.module)
    c = [Fraction(1), Fraction(0), Fraction(0)]
    rank = 0
    for i, free in enumerate(res.frees):
        sign = 1 if i % 2 == 0 else -1
        rank += sign * free.rank
        for g in free.degrees:
            f = [Fraction(1), Fraction(-g), Fraction(0)] if sign > 0 else [Fraction(1), Fraction(g), Fraction(g * g)]
            c = [c[0] * f[0], c[0] * f[1] + c[1] * f[0], c[0] * f[2] + c[1] * f[1] + c[2] * f[0]]
    if any(x.denominator != 1 for x in c):
        raise ValueError("non-integral Chern class")
    return ChernData(rank, int(c[1]), int(c[2]))


# ---------------------------------------------------------------------------
# Stability
# ---------------------------------------------------------------------------

STABLE = "stable"
STRICTLY_SEMISTABLE = "strictly_semistable"
UNSTABLE = "unstable"


def _min_hull_degree(F: P2Sheaf) -> Optional[int]:
    gens, amb = F.double_dual_gens()
    degs = [vec_degree(g, amb.degrees) for g in gens]
    return min(degs) if degs else None


def is_semistable(F: P2Sheaf) -> str:
    """Slope (semi)stability of a rank-two sheaf, after twisting c₁ into {0, -1}.

    ``F**`` is torsion-free, so ``F**_e ≠ 0`` exactly for ``e`` at or above the
    smallest generator degree; the destabilizing tests reduce to that number.
    """
    ch = chern(F)
    if ch.rank != 2:
        raise ValueError(f"expected rank 2, got {ch.rank}")
    if ch.c1 not in (0, -1):
        k = -math.ceil(ch.c1 / 2)
        F, ch = F.twist(k), ch.twisted(k)
    m = _min_hull_degree(F)
    if ch.c1 == 0:
        if m <= -1:
            return UNSTABLE
        return STABLE if m >= 1 else STRICTLY_SEMISTABLE
    return UNSTABLE if m <= 0 else STABLE


@dataclass
class Destabilizer:
    L: P2Sheaf
    Q: P2Sheaf
    degree: int
    section: Vec
    kernel_gens: List[Vec]

    @property
    def quotient_degree(self) -> int:
        return chern(self.Q).c1


def max_destabilizer(F: P2Sheaf) -> Destabilizer:
    """Maximal destabilizing rank-one subsheaf, its quotient and its degree."""
    if is_semistable(F) != UNSTABLE:
        raise ValueError("max_destabilizer called on a semistable sheaf")
    gens, amb = F.double_dual_gens()
    degs = [vec_degree(g, amb.degrees) for g in gens]
    m = min(degs)
    section = gens[degs.index(m)]
    D = F._dd
    M = F.module
    pre = preimage(D.canonical, GradedModule(amb, []), sub=[section])
    lgens = minimal_generators(pre, M.free, M.relations)
    L = P2Sheaf(present_submodule(lgens, M.free, M.relations))
    Q = P2Sheaf(GradedModule(M.free, list(M.relations) + lgens))
    log.debug("destabilizer of degree %d with %d generators", -m, len(lgens))
    return Destabilizer(L, Q, -m, section, lgens)


# ---------------------------------------------------------------------------
# Lines
# ---------------------------------------------------------------------------


def splitting_type(N: GradedModule) -> SplittingType:
    """Splitting type of a sheaf on ℙ¹ given by a graded module over two variables."""
    if N.ring.nvars != 2:
        raise ValueError("splitting_type needs a two-variable ring")
    D = DoubleDual(N)
    gens, amb = D.gens, D.ambient
    if syzygy_vectors(gens, amb):
        raise ValueError("double dual over ℙ¹ is not free")
    degs = [vec_degree(g, amb.degrees) for g in gens]
    types = tuple(sorted((-d for d in degs), reverse=True))
    hp_n = hilbert_polynomial(N)
    free_part = GradedModule(FreeModule(N.ring, degs), [])
    hp_f = hilbert_polynomial(free_part)
    diff = [a - b for a, b in itertools.zip_longest(hp_n.coefficients, hp_f.coefficients, fillvalue=Fraction(0))]
    if any(c != 0 for c in diff[1:]):
        raise ValueError("rank mismatch between a sheaf on ℙ¹ and its double dual")
    t = diff[0] if diff else 0
    return SplittingType(types, int(t))


def line_restriction(F: P2Sheaf, line: Poly) -> GradedModule:
    """``F|_ℓ`` as a module over the two variables left after solving ``ℓ = 0``."""
    ring = F.ring
    if line.is_zero() or line.total_degree() != 1 or not line.is_homogeneous():
        raise ValueError("line must be a nonzero linear form")
    pivot = max(i for i in range(3) if line.terms.get(tuple(1 if k == i else 0 for k in range(3))))
    pe = tuple(1 if k == pivot else 0 for k in range(3))
    c = line.terms[pe]
    rest = line - ring.monomial(pe, c)
    names = [n for i, n in enumerate(ring.names) if i != pivot]
    R1 = PolyRing(names, field=ring.field)
    image = change_ring(rest.scale(-1 / c), ring) if not rest.is_zero() else ring.zero
    img1 = Poly(R1, {tuple(a for k, a in enumerate(e) if k != pivot): v for e, v in image.terms.items()})
    mapping = {ring.names[pivot]: img1}
    for n in names:
        mapping[n] = R1.var(n)
    rels = [[substitute(p, mapping, R1) for p in col] for col in F.module.relations]
    return GradedModule(FreeModule(R1, F.module.free.degrees), rels)


def restrict_to_line(F: P2Sheaf, line: Poly) -> SplittingType:
    return splitting_type(line_restriction(F, line))


# ---------------------------------------------------------------------------
# Singular points
# ---------------------------------------------------------------------------


def _det(rows: List[List[Poly]], ring: PolyRing) -> Poly:
    n = len(rows)
    if n == 0:
        return ring.one
    if n == 1:
        return rows[0][0]
    total = ring.zero
    for j in range(n):
        a = rows[0][j]
        if a.is_zero():
            continue
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        term = a * _det(minor, ring)
        total = total + term if j % 2 == 0 else total - term
    return total


def fitting_ideal(M: GradedModule, k: int) -> List[Poly]:
    """``Fitt_k``: the ``(g-k)``-minors of the presentation, ``g`` = number of generators."""
    ring = M.ring
    g = M.ngens
    size = g - k
    if size <= 0:
        return [ring.one]
    A = M.relations
    if len(A) < size:
        return []
    out = []
    for rows in itertools.combinations(range(g), size):
        for cols in itertools.combinations(range(len(A)), size):
            d = _det([[A[c][r] for c in cols] for r in rows], ring)
            if not d.is_zero():
                out.append(d)
    return out


def singular_points(F: P2Sheaf) -> List[Tuple[PointOnP2, int]]:
    """Points where a torsion-free rank-two sheaf is not locally free, with local charges."""
    M = minimal_presentation(F.module)
    fitt = fitting_ideal(M, 2)
    if not fitt:
        raise ValueError("Fitting ideal vanishes: sheaf is not torsion-free of rank two")
    pts = points_of(fitt)
    if not pts:
        return []
    D = F._dd
    img = D.image_gens()
    base = hilbert_polynomial(GradedModule(D.ambient, img))
    out = []
    for P in pts:
        sat = saturate(img, list(P.ideal), D.ambient)
        hp = hilbert_polynomial(GradedModule(D.ambient, sat))
        diff = [a - b for a, b in itertools.zip_longest(base.coefficients, hp.coefficients, fillvalue=Fraction(0))]
        if any(c != 0 for c in diff[1:]):
            raise ValueError("local contribution is not of finite length")
        length = diff[0]
        if length % P.residue_degree:
            raise ValueError("local length not divisible by the residue degree")
        out.append((P, int(length) // P.residue_degree))
    return [(P, c) for P, c in out if c > 0]


def points_of(ideal: Sequence[Poly]) -> List[PointOnP2]:
    """Closed points of the zero-dimensional projective scheme ``V(ideal)``, as primes."""
    ring = ideal[0].ring
    X, Y, Z = ring.gens()
    F = ring.field
    pts: List[PointOnP2] = []
    # chart Z = 1
    A2 = PolyRing(("X", "Y"), field=F)
    aff = [substitute(p, {"X": A2.var("X"), "Y": A2.var("Y"), "Z": A2.one}, A2) for p in ideal]
    for gens, deg in affine_primes(aff):
        hom = homogenize(gens, ring, "Z")
        pts.append(PointOnP2(tuple(hom), deg))
    # line Z = 0, chart Y = 1
    A1 = PolyRing(("X",), field=F)
    aff1 = [substitute(p, {"X": A1.var("X"), "Y": A1.one, "Z": A1.zero}, A1) for p in ideal]
    for gens, deg in affine_primes(aff1):
        hom = homogenize(gens, ring, "Y") + [Z]
        pts.append(PointOnP2(tuple(_reduced_gb(hom)), deg))
    # the point [1:0:0]
    if all(p.evaluate([1, 0, 0]) == 0 for p in ideal):
        pts.append(PointOnP2(tuple(_reduced_gb([Y, Z])), 1))
    return pts


def _reduced_gb(polys: Sequence[Poly]) -> List[Poly]:
    return [v[0] for v in ideal_gb(list(polys)).vectors()]


def homogenize(gens: Sequence[Poly], ring: PolyRing, var: str) -> List[Poly]:
    """Homogenize a degree-compatible GB of an affine ideal into ``ring`` using ``var``."""
    G = _reduced_gb(gens)
    idx = ring.index(var)
    out = []
    for g in G:
        d = g.total_degree()
        terms = {}
        for e, c in g.terms.items():
            ne = [0] * ring.nvars
            for n, a in zip(g.ring.names, e):
                ne[ring.index(n)] = a
            ne[idx] = d - sum(e)
            terms[tuple(ne)] = c
        out.append(Poly(ring, terms))
    return _reduced_gb(out)


# -- zero-dimensional affine decomposition ---------------------------------


def _to_sympy(p: Poly, sym_vars):
    F = p.ring.field
    expr = 0
    for e, c in p.terms.items():
        coeff = sympy.Rational(int(c.numerator), int(c.denominator)) if F == QQ else int(c.v)
        term = coeff
        for v, a in zip(sym_vars, e):
            term = term * v**a
        expr += term
    return expr


def _from_sympy_univariate(expr, var_sym, ring: PolyRing, target: Poly) -> Poly:
    """Evaluate a univariate sympy polynomial at ``target``."""
    F = ring.field
    sp = sympy.Poly(expr, var_sym)
    out = ring.zero
    power = ring.one
    coeffs = list(reversed(sp.all_coeffs()))
    for c in coeffs:
        if c != 0:
            if F == QQ:
                r = sympy.Rational(c)
                val = F(int(r.p)) / F(int(r.q))
            else:
                val = F(int(c) % F.p)
            out = out + power.scale(val)
        power = power * target
    return out


def _minpoly_coeffs(G, basis, elem: Poly):
    """Coefficients (low to high, monic) of the minimal polynomial of ``elem`` in ``R/I``."""
    ring = elem.ring
    F = ring.field
    pos = {e: i for i, e in enumerate(basis)}
    vecs = []  # echelon rows: (pivot, vector, combination)
    power = ring.one
    k = 0
    while True:
        nf = G.normal_form([power])[0]
        v = [F.zero] * len(basis)
        for e, c in nf.terms.items():
            v[pos[e]] = c
        comb = [F.zero] * (k + 1)
        comb[k] = F.one
        for piv, row, rc in vecs:
            if v[piv] != 0:
                f = v[piv] / row[piv]
                v = [a - f * b for a, b in zip(v, row)]
                comb = [a - f * (rc[i] if i < len(rc) else F.zero) for i, a in enumerate(comb)]
        nz = next((i for i, a in enumerate(v) if a != 0), None)
        if nz is None:
            return comb
        vecs.append((nz, v, comb))
        power = G.normal_form([power * elem])[0]
        k += 1


def affine_primes(gens: Sequence[Poly]) -> List[Tuple[List[Poly], int]]:
    """Prime components of a zero-dimensional affine ideal with their residue degrees."""
    gens = [g for g in gens if not g.is_zero()]
    ring = gens[0].ring if gens else None
    if ring is None:
        raise ValueError("positive-dimensional locus")
    G = ideal_gb(gens)
    if G.is_whole():
        return []
    lead = [e for _, e in G.leading_terms()]
    try:
        count_standard_monomials(lead, ring.nvars)
    except NotFinite:
        raise ValueError("positive-dimensional non-free locus") from None
    t = sympy.Symbol("t")
    modulus = None if ring.field == QQ else ring.field.p
    # radical: adjoin square-free parts of the univariate eliminants
    rad = list(G.vectors())
    rad = [v[0] for v in rad]
    for i, v in enumerate(ring.gens()):
        basis = _standard_monomials(G, ring.nvars)
        mp = _minpoly_coeffs(G, basis, v)
        expr = _coeffs_to_sympy(mp, t, ring.field)
        sqf = sympy.sqf_part(sympy.Poly(expr, t, modulus=modulus)).as_expr()
        rad.append(_from_sympy_univariate(sqf, t, ring, v))
    G = ideal_gb(rad)
    basis = _standard_monomials(G, ring.nvars)
    dim = len(basis)
    # separating linear form
    for c in _small_ints():
        elem = ring.gens()[0]
        for j, v in enumerate(ring.gens()[1:], start=1):
            elem = elem + v.scale(ring.field(c ** j))
        mp = _minpoly_coeffs(G, basis, elem)
        if len(mp) - 1 == dim:
            break
    expr = _coeffs_to_sympy(mp, t, ring.field)
    _, factors = sympy.factor_list(sympy.Poly(expr, t, modulus=modulus))
    out = []
    for fac, _mult in factors:
        q = _from_sympy_univariate(fac.as_expr(), t, ring, elem)
        P = _reduced_gb(rad + [q])
        out.append((P, int(sympy.degree(fac.as_expr(), t))))
    out.sort(key=lambda pd: sorted(str(p) for p in pd[0]))
    return out


def _small_ints():
    yield 0
    k = 1
    while True:
        yield k
        yield -k
        k += 1


def _coeffs_to_sympy(coeffs, t, F):
    expr = 0
    for i, c in enumerate(coeffs):
        if F == QQ:
            val = sympy.Rational(int(c.numerator), int(c.denominator))
        else:
            val = int(c.v)
        expr += val * t**i
    return expr


def _standard_monomials(G, nvars: int):
    lead = [e for _, e in G.leading_terms()]
    out = []
    d = 0
    while True:
        layer = [m for m in monomials_of_degree(nvars, d) if not any(_divides(g, m) for g in lead)]
        if not layer:
            return out
        out.extend(layer)
        d += 1


# ---------------------------------------------------------------------------
# Sections onto free summands
# ---------------------------------------------------------------------------


@dataclass
class SectionQuotient:
    section: Vec
    ideal: List[Poly]
    twist: int

    def ideal_strings(self) -> List[str]:
        return sorted(str(p) for p in self.ideal)


def rank_one_as_ideal(M: GradedModule) -> Tuple[List[Poly], int]:
    """A torsion-free rank-one module as ``I(twist)`` with ``I`` saturated."""
    D = DoubleDual(M)
    if len(D.gens) != 1 or syzygy_vectors(D.gens, D.ambient):
        raise ValueError("rank-one module with non-free double dual")
    (g,) = D.gens
    amb_deg = vec_degree(g, D.ambient.degrees)
    # the hull is R·g; express each canonical image as a multiple of g
    ring = M.ring
    piv = next(i for i, p in enumerate(g) if not p.is_zero())
    elems = []
    for row in D.canonical:
        if vec_is_zero(row):
            continue
        q, r = _divide_exact(row[piv], g[piv])
        elems.append(q)
    m = list(ring.gens())
    ideal = [v[0] for v in saturate([[e] for e in elems], m, FreeModule(ring, [0]))]
    ideal = _reduced_gb(ideal)
    return ideal, -amb_deg


def _divide_exact(a: Poly, b: Poly):
    c = lift([a], [[b]], FreeModule(a.ring, [0]))
    if c is None:
        raise ValueError("non-exact division")
    return c[0], a.ring.zero


def free_summand_section(F: P2Sheaf) -> Optional[SectionQuotient]:
    """A degree-0 section with torsion-free quotient, and the quotient as an ideal sheaf."""
    if h0(F, 0) == 0:
        return None
    gens, amb = F.section_generators()
    degs = [vec_degree(g, amb.degrees) for g in gens]
    zero = [g for g, d in zip(gens, degs) if d == 0]
    if zero:
        s = zero[0]
    else:
        j = min(range(len(gens)), key=lambda i: degs[i])
        s = [p * (F.ring.var("Z") ** (-degs[j])) for p in gens[j]]
    Q = present_submodule(gens, amb, [s])
    Q = prune(Q)
    ideal, tw = rank_one_as_ideal(Q)
    return SectionQuotient(s, ideal, tw)


def free_summand_near(F: P2Sheaf, point: PointOnP2, max_degree: int) -> Optional[Vec]:
    """A section of degree at most ``max_degree`` generating a free summand near ``point``."""
    gens, amb = F.section_generators()
    P = ideal_gb(list(point.ideal))
    for g in gens:
        if vec_degree(g, amb.degrees) > max_degree:
            continue
        if any(not P.contains([p]) for p in g):
            return g
    return None


def local_number_of_generators(F: P2Sheaf, point: PointOnP2) -> int:
    """``dim F ⊗ k(p)`` for a rational point."""
    c = point.rational_coordinates()
    if c is None:
        raise ValueError("local generator count needs a rational point")
    M = minimal_presentation(F.module)
    vals = [[p.evaluate(c) for p in col] for col in M.relations]
    return M.ngens - _rank(vals, M.ngens, F.ring.field)


def _rank(cols, nrows, Fld) -> int:
    rows = [[cols[j][i] for j in range(len(cols))] for i in range(nrows)]
    rank = 0
    ncols = len(cols)
    for c in range(ncols):
        piv = next((r for r in range(rank, nrows) if rows[r][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(nrows):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c] / rows[rank][c]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def ideal_local_data(ideal: Sequence[Poly], point: PointOnP2) -> dict:
    """Colength and number of minimal generators of a homogeneous ideal at a rational point."""
    c = point.rational_coordinates()
    if c is None:
        raise ValueError("local data needs a rational point")
    ring = ideal[0].ring
    j = max(i for i in range(3) if c[i] != 0)
    others = [i for i in range(3) if i != j]
    A2 = PolyRing(tuple(ring.names[i] for i in others), field=ring.field)
    mapping = {ring.names[j]: A2.one}
    for k, i in enumerate(others):
        mapping[ring.names[i]] = A2.var(ring.names[i]) + A2.const(c[i] / c[j])
    aff = [substitute(p, mapping, A2) for p in ideal]
    aff = [p for p in aff if not p.is_zero()]
    mloc = list(A2.gens())
    local = _local_component(aff, mloc)
    L = colength(local)
    prod = [a * b for a in local for b in mloc]
    L2 = colength(prod)
    mu = L2 - L
    chosen: List[Poly] = []
    for g in sorted(local, key=lambda p: (p.total_degree(), str(p))):
        if len(chosen) == mu:
            break
        if colength(chosen + prod + [g]) < colength(chosen + prod):
            chosen.append(g)
    syz = syzygy_vectors([[g] for g in chosen], FreeModule(A2, [0]))
    return {"colength": L, "generators": mu, "local_generators": [str(g) for g in chosen], "syzygies": len(syz)}


def _local_component(aff: Sequence[Poly], mloc: Sequence[Poly]) -> List[Poly]:
    """Component of a zero-dimensional ideal supported at the origin: ``I + m^N`` for large N."""
    G = ideal_gb(list(aff))
    lead = [e for _, e in G.leading_terms()]
    n = count_standard_monomials(lead, len(mloc)) + 1
    ring = aff[0].ring
    powers = [ring.monomial(e) for e in monomials_of_degree(ring.nvars, n)]
    return _reduced_gb(list(aff) + powers)


# ---------------------------------------------------------------------------
# Sheaf equality
# ---------------------------------------------------------------------------


def h0_profile(F: P2Sheaf, lo: int, hi: int) -> List[int]:
    return [h0(F, d) for d in range(lo, hi + 1)]


def sheaf_invariants(F: P2Sheaf, bound: Optional[int] = None) -> dict:
    """Invariants compared by :func:`sheaf_equal`."""
    ch = chern(F)
    if bound is None:
        bound = abs(ch.c1) + ch.c2 + 2
    inv = {
        "chern": ch.as_dict(),
        "h0": h0_profile(F, -bound, bound),
        "h0_hull": [h0_double_dual(F, d) for d in range(-bound, bound + 1)],
        "singular": sorted((P.generators(), c) for P, c in singular_points(F)),
    }
    if ch.rank == 2 and ch.c1 == 0:
        sq = free_summand_section(F)
        inv["section_quotient"] = None if sq is None else (sq.ideal_strings(), sq.twist)
    return inv


def sheaf_equal(F: P2Sheaf, G: P2Sheaf) -> bool:
    """Equality of Chern data, section profiles of the sheaf and its hull, singular
    points with charges and, for c1 = 0, the ideal cut out by a section."""
    return sheaf_invariants(F) == sheaf_invariants(G)
