"""Rank-two families on the germ of affine 3-space at the origin.

A family is the cokernel of a polynomial matrix over k[x,y,z] with two more
rows than columns.  The central plane is {z = 0}.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .exactring import QQ, Poly, PolyRing, substitute
from .gbengine import (
    DoubleDual,
    FreeModule,
    GradedModule,
    NotFinite,
    Vec,
    colength,
    dual_generators,
    groebner,
    ideal_gb,
    lift,
    minimal_generators,
    minimize_relations,
    module_colength,
    preimage,
    present_submodule,
    prune,
    syzygy_vectors,
    vec_is_zero,
)
from .p2sheaf import fitting_ideal

log = logging.getLogger(__name__)

GERM_NAMES = ("x", "y", "z")


def germ_ring(field=QQ) -> PolyRing:
    return PolyRing(GERM_NAMES, field=field)


class InvalidFamily(ValueError):
    pass


class StaleWitness(ValueError):
    pass


class FamilyPresentation:
    """``E = coker(M)`` for a ``b x a`` matrix ``M`` over k[x,y,z], given by its columns."""

    def __init__(self, ring: PolyRing, nrows: int, columns: Sequence[Vec], label: str = ""):
        self.ring = ring
        self.nrows = nrows
        self.columns = [list(c) for c in columns]
        for c in self.columns:
            if len(c) != nrows:
                raise ValueError("column length does not match the number of rows")
        self.label = label

    @classmethod
    def from_rows(cls, ring: PolyRing, rows: Sequence[Sequence], label: str = "") -> "FamilyPresentation":
        rows = [[ring(p) for p in r] for r in rows]
        ncols = len(rows[0]) if rows else 0
        return cls(ring, len(rows), [[r[j] for r in rows] for j in range(ncols)], label)

    @property
    def ncols(self) -> int:
        return len(self.columns)

    def rows(self) -> List[List[Poly]]:
        return [[c[i] for c in self.columns] for i in range(self.nrows)]

    @property
    def free(self) -> FreeModule:
        return FreeModule(self.ring, [0] * self.nrows)

    @property
    def module(self) -> GradedModule:
        return GradedModule(self.free, self.columns)

    def entry_strings(self) -> List[List[str]]:
        return [[str(p) for p in r] for r in self.rows()]

    def relabeled(self, label: str) -> "FamilyPresentation":
        return FamilyPresentation(self.ring, self.nrows, self.columns, label)

    def __repr__(self):
        return f"FamilyPresentation({self.label or ''} {self.entry_strings()})"


def same_presentation(A: FamilyPresentation, B: FamilyPresentation) -> bool:
    """Equal relation modules up to permuting generators and changing their signs."""
    if A.nrows != B.nrows:
        return False
    GA = groebner(A.columns, A.free)
    n = B.nrows
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            if signs[0] == -1 and n > 0:
                # an overall sign does not change the module
                continue
            cols = [[c[perm[i]].scale(signs[i]) for i in range(n)] for c in B.columns]
            if GA.same_module(groebner(cols, B.free)):
                return True
    return False


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class Diagnostics:
    valid: bool
    checks: dict = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)


def validate(E: FamilyPresentation) -> Diagnostics:
    """Check rank two, injectivity, reflexivity and that the singular locus is at most the origin."""
    checks = {}
    failures = []
    checks["shape"] = E.nrows - E.ncols == 2
    if not checks["shape"]:
        failures.append(f"shape {E.nrows}x{E.ncols}: need exactly two more rows than columns")
        return Diagnostics(False, checks, failures)
    syz = syzygy_vectors(E.columns, E.free) if E.columns else []
    checks["injective"] = not syz
    if syz:
        failures.append("matrix is not injective; kernel contains " + str([str(p) for p in syz[0]]))
    D = DoubleDual(E.module)
    G = groebner(E.columns, E.free)
    kernel = preimage(D.canonical, GradedModule(D.ambient, []))
    tf = all(G.contains(v) for v in kernel)
    img = groebner(D.image_gens(), D.ambient)
    onto = all(img.contains(g) for g in D.gens)
    checks["reflexive"] = tf and onto
    if not tf:
        failures.append("cokernel has torsion")
    elif not onto:
        failures.append("cokernel is not reflexive: E -> E** is not onto")
    fitt = fitting_ideal(E.module, 2)
    try:
        L = colength(fitt, at_origin=True) if fitt else None
        ok = L is not None
    except (NotFinite, ValueError) as exc:
        ok = False
        failures.append(f"singular locus not contained in the origin ({exc})")
    checks["singular_locus_at_origin"] = ok
    return Diagnostics(all(checks.values()), checks, failures)


def require_valid(E: FamilyPresentation) -> None:
    d = validate(E)
    if not d.valid:
        raise InvalidFamily("; ".join(d.failures))


# ---------------------------------------------------------------------------
# Central restriction
# ---------------------------------------------------------------------------


def plane_ring(E: FamilyPresentation) -> PolyRing:
    return PolyRing(E.ring.names[:2], field=E.ring.field)


@dataclass
class CentralRestriction:
    module: GradedModule
    torsion_free: bool
    k: Optional[int]
    hull: DoubleDual

    def dual_generators(self) -> List[Vec]:
        return self.hull.dual_gens


def central_restriction(E: FamilyPresentation) -> CentralRestriction:
    """``E|_{z=0}`` over k[x,y] with its multiplicity ``k = length(E|** / E|)``."""
    A2 = plane_ring(E)
    zname = E.ring.names[2]
    mapping = {zname: A2.zero}
    for n in E.ring.names[:2]:
        mapping[n] = A2.var(n)
    cols = [[substitute(p, mapping, A2) for p in c] for c in E.columns]
    N = GradedModule(FreeModule(A2, [0] * E.nrows), cols)
    D = DoubleDual(N)
    kernel = preimage(D.canonical, GradedModule(D.ambient, []))
    G = groebner(N.relations, N.free)
    tf = all(G.contains(v) for v in kernel)
    k = None
    if tf:
        Q = present_submodule(D.gens, D.ambient, D.image_gens())
        k = module_colength(Q)
    return CentralRestriction(N, tf, k, D)


def multiplicity(E: FamilyPresentation) -> int:
    R = central_restriction(E)
    if not R.torsion_free:
        raise InvalidFamily("restriction to the central plane has torsion")
    return R.k


# ---------------------------------------------------------------------------
# Splitting off the trivial factor
# ---------------------------------------------------------------------------


@dataclass
class SplittingWitness:
    section: Vec
    projection: Vec
    ideal: List[Poly]
    ideal_colength: int

    def ideal_strings(self) -> List[str]:
        return sorted(str(p) for p in self.ideal)


def _candidate_sections(n: int, bound: int):
    """Constant coefficient vectors: unit vectors first, then small integer combinations."""
    for i in range(n):
        yield tuple(1 if j == i else 0 for j in range(n))
    rng = range(-bound, bound + 1)
    seen = set()
    for size in range(2, n + 1):
        for support in itertools.combinations(range(n), size):
            for vals in itertools.product([v for v in rng if v], repeat=size):
                a = [0] * n
                for i, v in zip(support, vals):
                    a[i] = v
                a = tuple(a)
                if a not in seen:
                    seen.add(a)
                    yield a


def find_splitting(R: CentralRestriction, degree_bound: int = 3) -> Optional[SplittingWitness]:
    """A section spanning a free summand, with a projection back onto it.

    Only the constant part of a section decides whether it spans a free summand
    at the origin, so candidates are constant combinations of the generators.
    """
    if not R.torsion_free:
        raise InvalidFamily("splitting search needs a torsion-free restriction")
    N = R.module
    ring = N.ring
    K = R.dual_generators()
    n = N.ngens
    if not K:
        return None
    origin = [0] * ring.nvars
    K0 = [[K[l][i].evaluate(origin) for i in range(n)] for l in range(len(K))]
    for a in _candidate_sections(n, degree_bound):
        if all(sum((row[i] * a[i] for i in range(n)), ring.field.zero) == 0 for row in K0):
            continue
        s = [ring.const(c) for c in a]
        values = [sum((K[l][i] * s[i] for i in range(n)), ring.zero) for l in range(len(K))]
        coeffs = lift([ring.one], [[v] for v in values], FreeModule(ring, [0]))
        if coeffs is None:
            continue
        pi = [sum((K[l][j] * coeffs[l] for l in range(len(K))), ring.zero) for j in range(n)]
        w = _witness(N, s, pi)
        if w is not None:
            return w
    return None


def _witness(N: GradedModule, s: Vec, pi: Vec) -> Optional[SplittingWitness]:
    ring = N.ring
    rels = list(N.relations) + [s]
    Q = GradedModule(N.free, rels)
    psi_gens, dual_free = dual_generators(Q)
    psi_gens = minimal_generators(psi_gens, dual_free)
    if len(psi_gens) != 1:
        return None
    (psi,) = psi_gens
    # the quotient must embed: the kernel of psi is exactly the relations
    Gq = groebner(rels, N.free)
    ker = preimage([[p] for p in psi], GradedModule(FreeModule(ring, [0]), []))
    if not all(Gq.contains(v) for v in ker):
        return None
    ideal = [p for p in psi if not p.is_zero()]
    G = ideal_gb(ideal)
    ideal = [v[0] for v in G.vectors()]
    try:
        L = colength(ideal, at_origin=True)
    except (NotFinite, ValueError):
        return None
    return SplittingWitness(s, pi, ideal, L)


def check_witness(E: FamilyPresentation, w: SplittingWitness) -> bool:
    R = central_restriction(E)
    N = R.module
    ring = N.ring
    if len(w.section) != N.ngens or len(w.projection) != N.ngens:
        return False
    if sum((a * b for a, b in zip(w.projection, w.section)), ring.zero) != ring.one:
        return False
    for r in N.relations:
        if not sum((a * b for a, b in zip(w.projection, r)), ring.zero).is_zero():
            return False
    return True


# ---------------------------------------------------------------------------
# Elementary modifications downstairs
# ---------------------------------------------------------------------------

IDEAL_FACTOR = "ideal_factor"
TRIVIAL_FACTOR = "trivial_factor"


def _lift_plane(p: Poly, ring: PolyRing) -> Poly:
    return substitute(p, {n: ring.var(n) for n in p.ring.names}, ring)


def _family_from_submodule(E: FamilyPresentation, gens: List[Vec], label: str) -> FamilyPresentation:
    gens = minimal_generators(gens, E.free, E.columns)
    M = present_submodule(gens, E.free, E.columns)
    M = prune(M)
    M = minimize_relations(M)
    return FamilyPresentation(E.ring, M.ngens, M.relations, label)


def modify_family(E: FamilyPresentation, w: SplittingWitness, direction: str) -> FamilyPresentation:
    """Kernel of ``E -> ι_*I`` (ideal_factor) or ``E -> ι_*O`` (trivial_factor)."""
    if not check_witness(E, w):
        raise StaleWitness("witness does not split the current central restriction")
    ring = E.ring
    z = ring.var(ring.names[2])
    n = E.nrows
    if direction == IDEAL_FACTOR:
        s = [_lift_plane(p, ring) for p in w.section]
        gens = []
        for i in range(n):
            v = [ring.zero] * n
            v[i] = z
            gens.append(v)
        gens.append(s)
    elif direction == TRIVIAL_FACTOR:
        pi = [_lift_plane(p, ring) for p in w.projection]
        syz = syzygy_vectors([[p] for p in pi] + [[z]], FreeModule(ring, [0]))
        gens = [v[:n] for v in syz if not vec_is_zero(v[:n])]
    else:
        raise ValueError(f"unknown direction {direction!r}")
    label = f"{E.label}>{direction}" if E.label else direction
    return _family_from_submodule(E, gens, label)


# ---------------------------------------------------------------------------
# Generic multiplicity
# ---------------------------------------------------------------------------


def random_coordinate_change(rng: random.Random, size: int = 3, spread: int = 50) -> List[List[int]]:
    while True:
        g = [[rng.randint(-spread, spread) for _ in range(size)] for _ in range(size)]
        if _int_det(g) != 0:
            return g


def _int_det(m) -> int:
    n = len(m)
    if n == 1:
        return m[0][0]
    return sum((-1) ** j * m[0][j] * _int_det([r[:j] + r[j + 1 :] for r in m[1:]]) for j in range(n) if m[0][j])


def transform(E: FamilyPresentation, g: Sequence[Sequence[int]], label: str = "") -> FamilyPresentation:
    """Pull back along the linear change of coordinates ``x_i -> sum g_ij x_j``."""
    ring = E.ring
    xs = ring.gens()
    mapping = {}
    for i, n in enumerate(ring.names):
        img = ring.zero
        for j in range(3):
            if g[i][j]:
                img = img + xs[j].scale(ring.field(g[i][j]))
        mapping[n] = img
    cols = [[substitute(p, mapping, ring) for p in c] for c in E.columns]
    return FamilyPresentation(ring, E.nrows, cols, label or E.label)


@dataclass
class GenericMultiplicity:
    k_generic: int
    samples: List[Tuple[List[List[int]], int]]
    resampled: int


def generic_multiplicity(E: FamilyPresentation, samples: int = 5, seed: int = 0, max_tries: int = 50) -> GenericMultiplicity:
    """Minimum multiplicity over seeded random planes through the origin."""
    rng = random.Random(seed)
    out = []
    bad = 0
    while len(out) < samples:
        if bad > max_tries:
            raise RuntimeError("too many degenerate planes")
        g = random_coordinate_change(rng)
        R = central_restriction(transform(E, g))
        if not R.torsion_free:
            bad += 1
            continue
        out.append((g, R.k))
    return GenericMultiplicity(min(k for _, k in out), out, bad)
