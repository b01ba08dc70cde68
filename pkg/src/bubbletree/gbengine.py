"""Groebner bases for submodules of free modules over a polynomial ring.

Vectors are lists of :class:`Poly`; a submodule is given by a list of generating
vectors.  Internally a vector is a flat dict ``(position, exponent) -> coeff``.

Module orders are term-over-position with grevlex on exponents, refined by an
integer shift per position (the generator degree when the ring is standard
graded) and optionally by a block number per position: a term in a higher
block beats every term in a lower block, which makes elimination of whole
blocks (syzygies, lifts, preimages) a single GB computation.
"""

from __future__ import annotations

import heapq
import logging
import threading
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from .exactring import Poly, PolyRing, monomials_of_degree

log = logging.getLogger(__name__)

Term = Tuple[int, Tuple[int, ...]]
Vec = List[Poly]


# ---------------------------------------------------------------------------
# Free modules and presentations
# ---------------------------------------------------------------------------


class FreeModule:
    """Free module ``⊕ R·e_i`` with ``deg(e_i) = degrees[i]``."""

    def __init__(self, ring: PolyRing, degrees: Sequence[int]):
        self.ring = ring
        self.degrees = tuple(int(d) for d in degrees)

    @property
    def rank(self) -> int:
        return len(self.degrees)

    def zero(self) -> Vec:
        return [self.ring.zero] * self.rank

    def basis(self, i: int) -> Vec:
        v = self.zero()
        v[i] = self.ring.one
        return v

    def __eq__(self, other):
        return isinstance(other, FreeModule) and self.ring == other.ring and self.degrees == other.degrees

    def __repr__(self):
        return f"FreeModule(rank={self.rank}, degrees={self.degrees})"


def standard_graded(ring: PolyRing) -> bool:
    return all(w == 1 for w in ring.weights)


def vec_degree(v: Vec, degrees: Sequence[int]) -> Optional[int]:
    """Degree of a homogeneous vector; ``None`` for zero, ValueError if inhomogeneous."""
    ring = None
    found = set()
    for p, d in zip(v, degrees):
        if p.terms:
            ring = p.ring
            for e in p.terms:
                found.add(ring.weight(e) + d)
    if not found:
        return None
    if len(found) > 1:
        raise ValueError("vector is not homogeneous")
    return found.pop()


def vec_is_zero(v: Vec) -> bool:
    return all(not p.terms for p in v)


def matrix_from_rows(rows: Sequence[Sequence[Poly]]) -> List[Vec]:
    """Columns of a matrix given row by row."""
    if not rows:
        return []
    return [[row[j] for row in rows] for j in range(len(rows[0]))]


def mat_vec(cols: Sequence[Vec], coeffs: Sequence[Poly], rank: int, ring: PolyRing) -> Vec:
    out = [ring.zero] * rank
    for col, c in zip(cols, coeffs):
        if not c.terms:
            continue
        for i in range(rank):
            if col[i].terms:
                out[i] = out[i] + col[i] * c
    return out


class GradedModule:
    """Cokernel of ``relations`` (columns) inside the free module ``free``.

    For a graded module each relation column ``r`` is homogeneous: the entry in
    row ``i`` has weight ``deg(r) - free.degrees[i]``.
    """

    def __init__(self, free: FreeModule, relations: Sequence[Vec] = ()):
        self.free = free
        self.relations = [list(r) for r in relations if not vec_is_zero(r)]
        for r in self.relations:
            if len(r) != free.rank:
                raise ValueError("relation length does not match the free module rank")
        self._gb = None
        self._lock = threading.Lock()

    @property
    def ring(self) -> PolyRing:
        return self.free.ring

    @property
    def ngens(self) -> int:
        return self.free.rank

    @property
    def degrees(self):
        return self.free.degrees

    def relation_degrees(self) -> List[Optional[int]]:
        return [vec_degree(r, self.free.degrees) for r in self.relations]

    def is_graded(self) -> bool:
        try:
            self.relation_degrees()
        except ValueError:
            return False
        return True

    def gb(self) -> "SubmoduleGB":
        with self._lock:
            if self._gb is None:
                self._gb = groebner(self.relations, self.free)
        return self._gb

    def __repr__(self):
        return f"GradedModule(gens={self.free.degrees}, relations={len(self.relations)})"


# ---------------------------------------------------------------------------
# Module orders
# ---------------------------------------------------------------------------


class ModuleOrder:
    """Term-over-position grevlex, with position shifts and elimination blocks."""

    def __init__(self, shifts: Sequence[int], blocks: Sequence[int] | None = None):
        self.shifts = tuple(shifts)
        self.blocks = tuple(blocks) if blocks is not None else (0,) * len(self.shifts)
        self._cache: Dict[Term, tuple] = {}

    def key(self, t: Term):
        k = self._cache.get(t)
        if k is None:
            pos, e = t
            k = (self.blocks[pos], sum(e) + self.shifts[pos], tuple(-a for a in reversed(e)), -pos)
            self._cache[t] = k
        return k

    def describe(self):
        return {"kind": "term-over-position grevlex", "shifts": self.shifts, "blocks": self.blocks}


def default_shifts(free: FreeModule) -> Tuple[int, ...]:
    if standard_graded(free.ring):
        return free.degrees
    return (0,) * free.rank


# ---------------------------------------------------------------------------
# Internal vector helpers
# ---------------------------------------------------------------------------


def _to_internal(v: Vec, offset: int = 0) -> Dict[Term, object]:
    d = {}
    for i, p in enumerate(v):
        for e, c in p.terms.items():
            d[(i + offset, e)] = c
    return d


def _to_vector(d: Dict[Term, object], ring: PolyRing, rank: int, offset: int = 0) -> Vec:
    parts: List[Dict] = [dict() for _ in range(rank)]
    for (pos, e), c in d.items():
        parts[pos - offset][e] = c
    return [Poly(ring, t) for t in parts]


def _divides(a, b) -> bool:
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


class _Basis:
    """Growing list of monic module elements indexed by leading position."""

    def __init__(self, order: ModuleOrder):
        self.order = order
        self.elems: List[Dict[Term, object]] = []
        self.leads: List[Term] = []
        self.by_pos: Dict[int, List[int]] = {}
        self.active: List[bool] = []

    def add(self, d) -> int:
        lt = max(d, key=self.order.key)
        c = d[lt]
        if c != 1:
            inv = 1 / c
            d = {t: a * inv for t, a in d.items()}
        self.elems.append(d)
        self.leads.append(lt)
        self.active.append(True)
        self.by_pos.setdefault(lt[0], []).append(len(self.elems) - 1)
        return len(self.elems) - 1

    def reducer(self, t: Term) -> Optional[int]:
        pos, e = t
        for i in self.by_pos.get(pos, ()):
            if self.active[i] and _divides(self.leads[i][1], e):
                return i
        return None

    def reduce(self, v: Dict[Term, object], full: bool = True, skip: int = -1) -> Dict[Term, object]:
        key = self.order.key
        v = dict(v)
        rem = {}
        while v:
            t = max(v, key=key)
            c = v[t]
            pos, e = t
            gi = None
            for i in self.by_pos.get(pos, ()):
                if i != skip and self.active[i] and _divides(self.leads[i][1], e):
                    gi = i
                    break
            if gi is None:
                rem[t] = c
                del v[t]
                if not full:
                    rem.update(v)
                    return rem
                continue
            q = tuple(a - b for a, b in zip(e, self.leads[gi][1]))
            for (gp, ge), gc in self.elems[gi].items():
                tt = (gp, tuple(a + b for a, b in zip(ge, q)))
                nv = v.get(tt)
                if nv is None:
                    v[tt] = -c * gc
                else:
                    nv = nv - c * gc
                    if nv == 0:
                        del v[tt]
                    else:
                        v[tt] = nv
        return rem


def _spoly(f, ltf: Term, g, ltg: Term) -> Dict[Term, object]:
    lcm = tuple(max(a, b) for a, b in zip(ltf[1], ltg[1]))
    qf = tuple(a - b for a, b in zip(lcm, ltf[1]))
    qg = tuple(a - b for a, b in zip(lcm, ltg[1]))
    out: Dict[Term, object] = {}
    for (p, e), c in f.items():
        out[(p, tuple(a + b for a, b in zip(e, qf)))] = c
    for (p, e), c in g.items():
        t = (p, tuple(a + b for a, b in zip(e, qg)))
        nv = out.get(t)
        if nv is None:
            out[t] = -c
        else:
            nv = nv - c
            if nv == 0:
                del out[t]
            else:
                out[t] = nv
    return out


def _buchberger(gens: Sequence[Dict[Term, object]], order: ModuleOrder) -> List[Dict[Term, object]]:
    """Reduced Groebner basis (monic, sorted ascending by leading term)."""
    key = order.key
    B = _Basis(order)
    pairs: list = []
    pending = set()

    def push_pairs(j):
        ltj = B.leads[j]
        for i in range(j):
            if not B.active[i] or B.leads[i][0] != ltj[0]:
                continue
            lcm = tuple(max(a, b) for a, b in zip(B.leads[i][1], ltj[1]))
            heapq.heappush(pairs, (key((ltj[0], lcm)), i, j))
            pending.add((i, j))

    start = [g for g in gens if g]
    start.sort(key=lambda g: key(max(g, key=key)))
    for g in start:
        r = B.reduce(g)
        if r:
            push_pairs(B.add(r))

    while pairs:
        _, i, j = heapq.heappop(pairs)
        if (i, j) not in pending:
            continue
        pending.discard((i, j))
        lti, ltj = B.leads[i], B.leads[j]
        lcm = tuple(max(a, b) for a, b in zip(lti[1], ltj[1]))
        skip = False
        for k, ltk in enumerate(B.leads):
            if k == i or k == j or ltk[0] != lti[0] or not _divides(ltk[1], lcm):
                continue
            if (min(i, k), max(i, k)) not in pending and (min(j, k), max(j, k)) not in pending:
                skip = True
                break
        if skip:
            continue
        r = B.reduce(_spoly(B.elems[i], lti, B.elems[j], ltj))
        if r:
            push_pairs(B.add(r))

    # minimalize, then interreduce
    n = len(B.elems)
    for i in range(n):
        for j in range(n):
            if i != j and B.active[j] and B.leads[i][0] == B.leads[j][0] and _divides(B.leads[j][1], B.leads[i][1]):
                if B.leads[i] != B.leads[j] or j < i:
                    B.active[i] = False
                    break
    keep = [i for i in range(n) if B.active[i]]
    out = []
    for i in keep:
        B.active[i] = False
        r = B.reduce(B.elems[i])
        B.active[i] = True
        lt = max(r, key=key)
        inv = 1 / r[lt]
        out.append({t: c * inv for t, c in r.items()})
    out.sort(key=lambda g: key(max(g, key=key)))
    return out


# ---------------------------------------------------------------------------
# Public Groebner interface
# ---------------------------------------------------------------------------


class SubmoduleGB:
    """Reduced Groebner basis of a submodule of ``free``."""

    def __init__(self, free: FreeModule, basis: List[Dict[Term, object]], order: ModuleOrder):
        self.free = free
        self.order = order
        self._basis = basis
        self._B = _Basis(order)
        for g in basis:
            self._B.add(g)

    @property
    def ring(self):
        return self.free.ring

    def __len__(self):
        return len(self._basis)

    def vectors(self) -> List[Vec]:
        return [_to_vector(g, self.ring, self.free.rank) for g in self._basis]

    def leading_terms(self) -> List[Term]:
        return list(self._B.leads)

    def lead_ideals(self) -> List[List[Tuple[int, ...]]]:
        """Per position, the minimal generators of the leading monomial ideal."""
        per = [[] for _ in range(self.free.rank)]
        for pos, e in self._B.leads:
            per[pos].append(e)
        return per

    def normal_form(self, v: Vec) -> Vec:
        return _to_vector(self._B.reduce(_to_internal(v)), self.ring, self.free.rank)

    def contains(self, v: Vec) -> bool:
        return not self._B.reduce(_to_internal(v))

    def contains_all(self, vs: Sequence[Vec]) -> bool:
        return all(self.contains(v) for v in vs)

    def is_whole(self) -> bool:
        return all(self.contains(self.free.basis(i)) for i in range(self.free.rank))

    def spairs_reduce_to_zero(self) -> bool:
        B = self._B
        for j in range(len(B.elems)):
            for i in range(j):
                if B.leads[i][0] != B.leads[j][0]:
                    continue
                if B.reduce(_spoly(B.elems[i], B.leads[i], B.elems[j], B.leads[j])):
                    return False
        return True

    def canonical(self):
        """Hashable canonical form of the reduced basis."""
        return tuple(sorted(tuple(sorted((t, str(c)) for t, c in g.items())) for g in self._basis))

    def same_module(self, other: "SubmoduleGB") -> bool:
        return self.contains_all(other.vectors()) and other.contains_all(self.vectors())


def groebner(gens: Sequence[Vec], free: FreeModule, order: ModuleOrder | None = None) -> SubmoduleGB:
    order = order or ModuleOrder(default_shifts(free))
    basis = _buchberger([_to_internal(g) for g in gens if not vec_is_zero(g)], order)
    return SubmoduleGB(free, basis, order)


def ideal_gb(gens: Sequence[Poly]) -> SubmoduleGB:
    gens = [g for g in gens]
    ring = gens[0].ring
    return groebner([[g] for g in gens], FreeModule(ring, [0]))


def normal_form(v: Vec, G: SubmoduleGB) -> Vec:
    return G.normal_form(v)


def _sugar_degree(v: Vec, shifts: Sequence[int]) -> int:
    best = 0
    first = True
    for p, s in zip(v, shifts):
        for e in p.terms:
            d = sum(e) + s
            if first or d > best:
                best, first = d, False
    return best


def _elimination_gb(target_cols: Sequence[Vec], free: FreeModule):
    """GB of the graph ``{(g_j, e_j)}`` with the target block eliminated first."""
    ring = free.ring
    b = free.rank
    n = len(target_cols)
    shifts0 = default_shifts(free)
    shifts = list(shifts0) + [_sugar_degree(g, shifts0) for g in target_cols]
    blocks = [1] * b + [0] * n
    order = ModuleOrder(shifts, blocks)
    gens = []
    for j, g in enumerate(target_cols):
        d = _to_internal(g)
        d[(b + j, (0,) * ring.nvars)] = ring.field.one
        gens.append(d)
    basis = _buchberger(gens, order)
    return basis, order


def syzygy_vectors(gens: Sequence[Vec], free: FreeModule) -> List[Vec]:
    """Generators of ``{c : sum c_j gens[j] = 0}``."""
    n = len(gens)
    if n == 0:
        return []
    b = free.rank
    basis, order = _elimination_gb(gens, free)
    out = []
    for g in basis:
        lt = max(g, key=order.key)
        if lt[0] >= b:
            out.append(_to_vector(g, free.ring, n, offset=b))
    return out


def syzygies(gens: Sequence[Vec], free: FreeModule) -> GradedModule:
    """Module whose relation columns generate all syzygies of ``gens``.

    Its free module has one generator per input vector, of the vector's degree,
    so its cokernel is the image of ``gens``.
    """
    F1 = FreeModule(free.ring, _column_degrees(gens, free))
    return GradedModule(F1, syzygy_vectors(gens, free))


def lift(v: Vec, gens: Sequence[Vec], free: FreeModule) -> Optional[Vec]:
    """Coefficients ``c`` with ``sum c_j gens[j] = v``, or ``None`` if ``v`` is not in the span."""
    ring = free.ring
    b, n = free.rank, len(gens)
    if vec_is_zero(v):
        return [ring.zero] * n
    if n == 0:
        return None
    basis, order = _elimination_gb(gens, free)
    B = _Basis(order)
    for g in basis:
        B.add(g)
    r = B.reduce(_to_internal(v))
    if any(pos < b for pos, _ in r):
        return None
    return [-p for p in _to_vector(r, ring, n, offset=b)]


def submodule_equal(gens1: Sequence[Vec], gens2: Sequence[Vec], free: FreeModule) -> bool:
    return groebner(gens1, free).same_module(groebner(gens2, free))


# ---------------------------------------------------------------------------
# Presentations and maps
# ---------------------------------------------------------------------------


def _column_degrees(cols: Sequence[Vec], free: FreeModule) -> List[int]:
    out = []
    for c in cols:
        try:
            d = vec_degree(c, free.degrees)
        except ValueError:
            d = None
        out.append(0 if d is None else d)
    return out


def present_submodule(gens: Sequence[Vec], free: FreeModule, relations: Sequence[Vec] = ()) -> GradedModule:
    """Present ``(⟨gens⟩ + ⟨relations⟩) / ⟨relations⟩`` on the given generators."""
    gens = [g for g in gens]
    n = len(gens)
    degs = _column_degrees(gens, free)
    F = FreeModule(free.ring, degs)
    syz = syzygy_vectors(list(gens) + list(relations), free)
    rels = [s[:n] for s in syz if not vec_is_zero(s[:n])]
    return GradedModule(F, rels)


def preimage(phi_cols: Sequence[Vec], target: GradedModule, sub: Sequence[Vec] = ()) -> List[Vec]:
    """Generators of ``{v : Φ v ∈ ⟨sub⟩ + im(target)}`` where Φ has columns ``phi_cols``.

    ``phi_cols[k]`` is the image of the k-th source basis vector in the target's free module.
    """
    n = len(phi_cols)
    syz = syzygy_vectors(list(phi_cols) + list(sub) + target.relations, target.free)
    return [s[:n] for s in syz if not vec_is_zero(s[:n])]


def kernel_of_map(source: GradedModule, target: GradedModule, phi_cols: Sequence[Vec]) -> GradedModule:
    """Kernel of the map ``source -> target`` sending generator k to ``phi_cols[k]``.

    The result carries ``embedding``: the kernel generators as vectors over the
    source's generators.  Raises ValueError if the matrix does not define a map.
    """
    ring = source.ring
    tgb = target.gb()
    for r in source.relations:
        img = mat_vec(phi_cols, r, target.ngens, ring)
        if not tgb.contains(img):
            raise ValueError("matrix does not induce a well-defined map")
    pre = minimal_generators(preimage(phi_cols, target), source.free, source.relations)
    K = present_submodule(pre, source.free, source.relations)
    K = prune(K, embedding=pre)
    return K


def prune(M: GradedModule, embedding: Optional[List[Vec]] = None) -> GradedModule:
    """Drop generators killed by a relation with a nonzero constant entry.

    ``embedding`` (one vector per generator) is transformed alongside and stored
    on the result as ``M.embedding``.
    """
    ring = M.ring
    rels = [list(r) for r in M.relations]
    degs = list(M.free.degrees)
    emb = [list(e) for e in embedding] if embedding is not None else None
    alive = list(range(len(degs)))
    changed = True
    while changed:
        changed = False
        for ri, r in enumerate(rels):
            piv = None
            for i in alive:
                p = r[i]
                if p.terms and p.is_constant():
                    piv = i
                    break
            if piv is None:
                continue
            c = r[piv].constant_coeff()
            # e_piv = -(1/c) * sum_{k != piv} r_k e_k
            sub = [ring.zero if k == piv else r[k].scale(-1 / c) for k in range(len(degs))]
            new_rels = []
            for rj, s in enumerate(rels):
                if rj == ri:
                    continue
                a = s[piv]
                if a.terms:
                    s = [s[k] + a * sub[k] if k != piv else ring.zero for k in range(len(degs))]
                else:
                    s = list(s)
                if not vec_is_zero(s):
                    new_rels.append(s)
            rels = new_rels
            alive.remove(piv)
            changed = True
            break
    F = FreeModule(ring, [degs[i] for i in alive])
    out = GradedModule(F, [[r[i] for i in alive] for r in rels])
    if emb is not None:
        out.embedding = [emb[i] for i in alive]
    return out


def minimize_relations(M: GradedModule) -> GradedModule:
    """Remove relations that lie in the span of the others (increasing degree)."""
    if not M.relations:
        return M
    shifts = default_shifts(M.free)
    order = sorted(range(len(M.relations)), key=lambda j: (_sugar_degree(M.relations[j], shifts), j))
    kept: List[Vec] = []
    for j in order:
        r = M.relations[j]
        if kept and groebner(kept, M.free).contains(r):
            continue
        kept.append(r)
    out = GradedModule(M.free, kept)
    if hasattr(M, "embedding"):
        out.embedding = M.embedding
    return out


def minimal_generators(gens: Sequence[Vec], free: FreeModule, relations: Sequence[Vec] = ()) -> List[Vec]:
    """Drop generators lying in the span of earlier ones plus ``relations``.

    Generators are visited by increasing degree, so in the graded case the
    survivors form a minimal generating set of the image modulo ``relations``.
    """
    shifts = default_shifts(free)
    degs = []
    for g in gens:
        try:
            d = vec_degree(g, free.degrees)
        except ValueError:
            d = None
        degs.append(_sugar_degree(g, shifts) if d is None else d)
    idx = sorted((j for j in range(len(gens)) if not vec_is_zero(gens[j])), key=lambda j: (degs[j], j))
    kept: List[Vec] = []
    for j in idx:
        span = kept + list(relations)
        if span and groebner(span, free).contains(gens[j]):
            continue
        kept.append(gens[j])
    if not standard_graded(free.ring):
        # degrees no longer bound redundancy from one side, so sweep back once
        i = len(kept) - 1
        while i >= 0 and len(kept) > 1:
            rest = kept[:i] + kept[i + 1 :] + list(relations)
            if groebner(rest, free).contains(kept[i]):
                del kept[i]
            i -= 1
    return kept


def minimize_generators(M: GradedModule, embedding: Optional[List[Vec]] = None) -> GradedModule:
    """Prune unit entries and redundant relations, carrying ``embedding`` along."""
    M = prune(M, embedding)
    emb = getattr(M, "embedding", None)
    out = minimize_relations(M)
    if emb is not None:
        out.embedding = emb
    return out


def minimal_presentation(M: GradedModule) -> GradedModule:
    """Presentation with no unit entries and no redundant relations."""
    N = prune(M)
    # reduce the relations so that hidden unit entries surface
    G = groebner(N.relations, N.free)
    N = prune(GradedModule(N.free, G.vectors()))
    return minimize_relations(N)


def is_free(M: GradedModule) -> bool:
    return not minimal_presentation(M).relations


# ---------------------------------------------------------------------------
# Colon, intersection, saturation
# ---------------------------------------------------------------------------


def intersect(gens1: Sequence[Vec], gens2: Sequence[Vec], free: FreeModule) -> List[Vec]:
    if not gens1 or not gens2:
        return []
    syz = syzygy_vectors(list(gens1) + list(gens2), free)
    n = len(gens1)
    out = []
    for s in syz:
        v = mat_vec(gens1, s[:n], free.rank, free.ring)
        if not vec_is_zero(v):
            out.append(v)
    return out


def colon_element(gens: Sequence[Vec], f: Poly, free: FreeModule) -> List[Vec]:
    """Generators of ``(N : f) = {v : f v ∈ N}``."""
    b = free.rank
    scaled = []
    for i in range(b):
        v = free.zero()
        v[i] = f
        scaled.append(v)
    syz = syzygy_vectors(scaled + list(gens), free)
    return [s[:b] for s in syz if not vec_is_zero(s[:b])]


def saturate_element(gens: Sequence[Vec], f: Poly, free: FreeModule, max_iter: int = 64) -> List[Vec]:
    cur = groebner(gens, free)
    for _ in range(max_iter):
        nxt = colon_element(cur.vectors(), f, free)
        G = groebner(nxt, free)
        if G.same_module(cur):
            return cur.vectors()
        cur = G
    raise RuntimeError("saturation did not stabilize")


def saturate(gens: Sequence[Vec], ideal: Sequence[Poly], free: FreeModule) -> List[Vec]:
    """``(N : J^∞)`` as the intersection of ``(N : f^∞)`` over generators f of J."""
    ideal = [f for f in ideal if f.terms]
    if any(f.is_constant() for f in ideal):
        return groebner(gens, free).vectors()
    if not gens:
        return []
    result = None
    for f in ideal:
        S = saturate_element(gens, f, free)
        result = S if result is None else intersect(result, S, free)
    return groebner(result, free).vectors()


def saturate_ideal(ideal: Sequence[Poly], by: Sequence[Poly]) -> List[Poly]:
    ring = ideal[0].ring
    F = FreeModule(ring, [0])
    return [v[0] for v in saturate([[f] for f in ideal], by, F)]


# ---------------------------------------------------------------------------
# Colength and Hilbert functions
# ---------------------------------------------------------------------------


class NotFinite(ValueError):
    pass


def count_standard_monomials(lead_exps: Sequence[Tuple[int, ...]], nvars: int, limit: int = 10**6) -> int:
    """Number of monomials outside a monomial ideal (which must have finite colength)."""
    if any(sum(e) == 0 for e in lead_exps):
        return 0
    for i in range(nvars):
        if not any(e[i] > 0 and sum(e) == e[i] for e in lead_exps):
            raise NotFinite("not finite at point: no pure power of a variable among leading terms")
    total = 0
    d = 0
    while True:
        c = 0
        for m in monomials_of_degree(nvars, d):
            if not any(_divides(g, m) for g in lead_exps):
                c += 1
        if c == 0:
            return total
        total += c
        d += 1
        if total > limit:
            raise NotFinite("colength exceeds limit")


def colength(ideal: Sequence[Poly], at_origin: bool = False) -> int:
    """``dim_k R/I`` for an ideal of finite colength; with ``at_origin`` the support must be {0}."""
    ideal = [f for f in ideal if f.terms]
    if not ideal:
        raise NotFinite("not finite at point: zero ideal")
    ring = ideal[0].ring
    G = ideal_gb(ideal)
    lead = [e for _, e in G.leading_terms()]
    L = count_standard_monomials(lead, ring.nvars)
    if at_origin and L > 0:
        for i in range(ring.nvars):
            e = [0] * ring.nvars
            e[i] = L
            if not G.contains([ring.monomial(tuple(e))]):
                raise ValueError("support is not contained in the origin")
    return L


def module_colength(M: GradedModule) -> int:
    """``dim_k`` of a finite-length module ``coker``."""
    if M.ngens == 0:
        return 0
    G = M.gb()
    total = 0
    for exps in G.lead_ideals():
        total += count_standard_monomials(exps, M.ring.nvars)
    return total


def _monomial_numerator(gens: Tuple[Tuple[int, ...], ...]) -> Dict[int, int]:
    """K-polynomial numerator of ``R/(gens)`` in the standard grading."""
    gens = _minimal_monomials(gens)
    return dict(_numerator_cached(tuple(sorted(gens))))


def _minimal_monomials(gens):
    gens = sorted(set(gens), key=lambda e: (sum(e), e))
    out = []
    for g in gens:
        if not any(_divides(h, g) for h in out):
            out.append(g)
    return out


_NUM_CACHE: Dict[tuple, tuple] = {}


def _numerator_cached(gens: tuple) -> tuple:
    if gens in _NUM_CACHE:
        return _NUM_CACHE[gens]
    if not gens:
        res = ((0, 1),)
    else:
        m = gens[-1]
        rest = tuple(sorted(_minimal_monomials(gens[:-1])))
        colon = tuple(sorted(_minimal_monomials([tuple(max(a - b, 0) for a, b in zip(g, m)) for g in rest])))
        n1 = dict(_numerator_cached(rest))
        n2 = _numerator_cached(colon)
        dm = sum(m)
        for d, c in n2:
            n1[d + dm] = n1.get(d + dm, 0) - c
        res = tuple(sorted((d, c) for d, c in n1.items() if c != 0))
    _NUM_CACHE[gens] = res
    return res


def hilbert_numerator(M: GradedModule) -> Dict[int, int]:
    """``K(t)`` with Hilbert series ``K(t)/(1-t)^n`` (standard graded rings only)."""
    if not standard_graded(M.ring):
        raise ValueError("Hilbert series needs a standard graded ring")
    out: Dict[int, int] = {}
    G = M.gb()
    for pos, exps in enumerate(G.lead_ideals()):
        shift = M.free.degrees[pos]
        for d, c in _monomial_numerator(tuple(exps)).items():
            out[d + shift] = out.get(d + shift, 0) + c
    return {d: c for d, c in out.items() if c}


def hilbert_function(M: GradedModule, d: int) -> int:
    """``dim_k M_d`` by counting standard monomials."""
    if not standard_graded(M.ring):
        raise ValueError("Hilbert function needs a standard graded ring")
    G = M.gb()
    n = M.ring.nvars
    total = 0
    for pos, exps in enumerate(G.lead_ideals()):
        for m in monomials_of_degree(n, d - M.free.degrees[pos]):
            if not any(_divides(g, m) for g in exps):
                total += 1
    return total


class HilbertPolynomial:
    """``P(d) = sum_a c_a binom(d - a + n - 1, n - 1)``, valid for ``d >= bound``."""

    def __init__(self, numerator: Dict[int, int], nvars: int):
        self.numerator = dict(numerator)
        self.nvars = nvars
        top = max(numerator) if numerator else 0
        self.bound = top - nvars + 1
        # coefficients in the monomial basis of d, computed by interpolation
        pts = [(self.bound + 10 + i) for i in range(nvars)]
        vals = [self._eval_binomial(p) for p in pts]
        self.coefficients = _interpolate(pts, vals)

    def _eval_binomial(self, d: int) -> int:
        n = self.nvars
        s = 0
        for a, c in self.numerator.items():
            s += c * comb(d - a + n - 1, n - 1) if d - a + n - 1 >= 0 else 0
        return s

    def __call__(self, d) -> Fraction:
        return sum((c * Fraction(d) ** i for i, c in enumerate(self.coefficients)), Fraction(0))

    def degree(self) -> int:
        for i in range(len(self.coefficients) - 1, -1, -1):
            if self.coefficients[i] != 0:
                return i
        return -1

    def __eq__(self, other):
        return isinstance(other, HilbertPolynomial) and self.coefficients == other.coefficients

    def __repr__(self):
        terms = [f"{c}*d^{i}" for i, c in enumerate(self.coefficients) if c]
        return "HP(" + (" + ".join(terms) or "0") + ")"


def _interpolate(xs, ys) -> List[Fraction]:
    """Monomial-basis coefficients of the interpolating polynomial."""
    n = len(xs)
    coeffs = [Fraction(0)] * n
    for i in range(n):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j in range(n):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for k in range(len(basis) - 1):
                basis[k] -= xs[j] * basis[k + 1]
            denom *= xs[i] - xs[j]
        for k in range(n):
            coeffs[k] += Fraction(ys[i]) * basis[k] / denom
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def hilbert_polynomial(M: GradedModule) -> HilbertPolynomial:
    return HilbertPolynomial(hilbert_numerator(M), M.ring.nvars)


# ---------------------------------------------------------------------------
# Duals, Hom, torsion, resolutions
# ---------------------------------------------------------------------------


def dual_generators(M: GradedModule) -> Tuple[List[Vec], FreeModule]:
    """Generators of ``M* = ker(A^T)`` inside the dual free module (degrees negated)."""
    ring = M.ring
    dual_free = FreeModule(ring, [-d for d in M.free.degrees])
    if not M.relations:
        return [dual_free.basis(i) for i in range(M.ngens)], dual_free
    rel_degs = _column_degrees(M.relations, M.free)
    F1dual = FreeModule(ring, [-d for d in rel_degs])
    rows = [[r[i] for r in M.relations] for i in range(M.ngens)]
    syz = syzygy_vectors(rows, F1dual)
    # syzygies are expressed on the dual basis, whose degrees match dual_free
    return syz, dual_free


def dual(M: GradedModule) -> GradedModule:
    gens, F = dual_generators(M)
    gens = minimal_generators(gens, F)
    out = present_submodule(gens, F)
    out.embedding = gens
    return minimize_generators(out, gens)


class DoubleDual:
    """``M**`` realized as a submodule of a free module, with the canonical map.

    ``dual_gens`` are generators ``K_l`` of ``M*``; ``M**`` sits inside the free
    module ``ambient`` dual to those generators, and the canonical map sends
    generator i of M to row i of K.
    """

    def __init__(self, M: GradedModule):
        self.source = M
        ring = M.ring
        K, dF = dual_generators(M)
        K = minimal_generators(K, dF)
        Mstar = present_submodule(K, FreeModule(ring, [-d for d in M.free.degrees]))
        Mstar = prune(Mstar, embedding=K)
        K = Mstar.embedding
        self.dual_gens = K
        self.dual_module = Mstar
        self.ambient = FreeModule(ring, [-d for d in Mstar.free.degrees])
        dd_gens, _ = dual_generators(Mstar)
        self.gens = minimal_generators(dd_gens, self.ambient)
        self.canonical = [[K[l][i] for l in range(len(K))] for i in range(M.ngens)]

    def module(self) -> GradedModule:
        return minimize_generators(present_submodule(self.gens, self.ambient), self.gens)

    def image_gens(self) -> List[Vec]:
        return [c for c in self.canonical if not vec_is_zero(c)]


def double_dual(M: GradedModule):
    """``(M**, canonical map)`` with the map given as images of M's generators."""
    D = DoubleDual(M)
    return D.module(), D


def hom_module(M: GradedModule, N: GradedModule) -> GradedModule:
    """``Hom(M, N)``: maps ``φ: F0 -> G0`` with ``φ(im A) ⊂ im B``, modulo ``B∘ψ``.

    Generators are flattened ``G0 x F0`` matrices, index ``i * f0 + k`` for entry (i, k).
    """
    ring = M.ring
    f0, g0 = M.ngens, N.ngens
    HomF = FreeModule(ring, [N.free.degrees[i] - M.free.degrees[k] for i in range(g0) for k in range(f0)])
    if f0 == 0 or g0 == 0:
        return GradedModule(FreeModule(ring, []))
    A = M.relations
    # images of basis matrices E_{ik} under φ -> (φ a_j)_j in ⊕_j G0
    nA = len(A)
    if nA == 0:
        gens = [HomF.basis(t) for t in range(g0 * f0)]
    else:
        big = FreeModule(ring, [N.free.degrees[i] for _ in range(nA) for i in range(g0)])
        cols = []
        for i in range(g0):
            for k in range(f0):
                v = big.zero()
                for j in range(nA):
                    v[j * g0 + i] = A[j][k]
                cols.append(v)
        blockB = []
        for j in range(nA):
            for b in N.relations:
                v = big.zero()
                for i in range(g0):
                    v[j * g0 + i] = b[i]
                blockB.append(v)
        syz = syzygy_vectors(cols + blockB, big)
        gens = [s[: g0 * f0] for s in syz if not vec_is_zero(s[: g0 * f0])]
    trivial = []
    for b in N.relations:
        for k in range(f0):
            v = HomF.zero()
            for i in range(g0):
                v[i * f0 + k] = b[i]
            trivial.append(v)
    gens = minimal_generators(gens, HomF, trivial)
    H = present_submodule(gens, HomF, trivial)
    return minimize_generators(H, gens)


def torsion(M: GradedModule) -> GradedModule:
    """Torsion submodule: kernel of the canonical map to the double dual."""
    D = DoubleDual(M)
    target = GradedModule(D.ambient, [])
    return kernel_of_map(M, target, D.canonical)


def is_torsion_free(M: GradedModule) -> bool:
    D = DoubleDual(M)
    pre = preimage(D.canonical, GradedModule(D.ambient, []))
    G = groebner(M.relations, M.free)
    return all(G.contains(v) for v in pre)


class FreeResolution:
    def __init__(self, frees: List[FreeModule], maps: List[List[Vec]]):
        self.frees = frees
        self.maps = maps

    @property
    def length(self) -> int:
        return len(self.maps)

    def twists(self):
        return [f.degrees for f in self.frees]

    def composites_vanish(self) -> bool:
        for i in range(1, len(self.maps)):
            A, B = self.maps[i - 1], self.maps[i]
            ring = self.frees[0].ring
            for col in B:
                if not vec_is_zero(mat_vec(A, col, self.frees[i - 1].rank, ring)):
                    return False
        return True


def free_resolution(M: GradedModule, max_length: Optional[int] = None) -> FreeResolution:
    """Graded free resolution ``F0 <- F1 <- ...``; minimal in the standard graded case."""
    M = minimal_presentation(M)
    ring = M.ring
    bound = max_length if max_length is not None else ring.nvars + 1
    frees = [M.free]
    maps: List[List[Vec]] = []
    cur_free, cur_cols = M.free, M.relations
    while cur_cols:
        if len(maps) >= bound:
            raise RuntimeError("resolution exceeded max_length")
        degs = _column_degrees(cur_cols, cur_free)
        F = FreeModule(ring, degs)
        maps.append(cur_cols)
        frees.append(F)
        syz = syzygy_vectors(cur_cols, cur_free)
        nxt = GradedModule(F, syz)
        nxt = minimize_relations(nxt)
        cur_free, cur_cols = F, nxt.relations
    return FreeResolution(frees, maps)
