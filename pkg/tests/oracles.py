"""Independent reference computations: dense linear algebra over Fractions."""

from fractions import Fraction
from itertools import combinations_with_replacement


def to_fraction(c):
    return Fraction(int(c.numerator), int(c.denominator))


def monomials(nvars, d):
    out = []
    for combo in combinations_with_replacement(range(nvars), d):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


def rank(rows):
    """Rank of a list of dict-rows (column key -> Fraction) by Gaussian elimination."""
    pivots = {}
    r = 0
    for row in rows:
        row = {k: v for k, v in row.items() if v}
        while row:
            col = min(row)
            if col in pivots:
                prow = pivots[col]
                f = row[col] / prow[col]
                for k, v in prow.items():
                    nv = row.get(k, 0) - f * v
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
            else:
                pivots[col] = row
                r += 1
                break
    return r


def shifted(poly, mono):
    return {tuple(a + b for a, b in zip(e, mono)): to_fraction(c) for e, c in poly.terms.items()}


def image_rank(gens, degs, nvars, D):
    """dim of the degree-D part of the ideal (or module) spanned by vectors ``gens``
    whose generator positions carry degrees ``degs``; a vector has degree ``vdeg``."""
    rows = []
    for vec, vdeg in gens:
        if D < vdeg:
            continue
        for m in monomials(nvars, D - vdeg):
            row = {}
            for pos, p in enumerate(vec):
                for e, c in shifted(p, m).items():
                    row[(pos, e)] = c
            rows.append(row)
    return rank(rows)


def syzygy_dimension(polys, nvars, D):
    """dim of degree-D syzygies of homogeneous ``polys`` by rank-nullity."""
    source = sum(len(monomials(nvars, D - p.total_degree())) for p in polys if D >= p.total_degree())
    gens = [([p], p.total_degree()) for p in polys]
    return source - image_rank(gens, [0], nvars, D)
