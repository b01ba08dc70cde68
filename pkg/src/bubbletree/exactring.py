"""Exact coefficient fields and multivariate polynomials with integer gradings.

Polynomials are immutable maps ``exponent tuple -> nonzero coefficient``.  The
default field is the rationals (backed by ``gmpy2.mpq``); a prime field can be
selected per ring for faster, still exact, experiments.
"""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Sequence, Tuple

from gmpy2 import mpq

Exp = Tuple[int, ...]


class RingMismatch(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message, pos=None):
        self.pos = pos
        self.message = message
        super().__init__(message if pos is None else f"{message} (at column {pos + 1})")


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------


class RationalField:
    name = "QQ"
    characteristic = 0

    def __call__(self, x):
        if isinstance(x, str):
            return mpq(x)
        return mpq(x)

    @property
    def zero(self):
        return mpq(0)

    @property
    def one(self):
        return mpq(1)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"

    def fmt(self, c):
        return str(c)


class _Fp:
    """Element of a prime field; the modulus lives on the subclass."""

    __slots__ = ("v",)
    p = 2

    def __init__(self, v):
        self.v = v % self.p

    def _coerce(self, other):
        if isinstance(other, _Fp):
            return other.v
        return int(other) % self.p

    def __add__(self, other):
        return type(self)(self.v + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return type(self)(self.v - self._coerce(other))

    def __rsub__(self, other):
        return type(self)(self._coerce(other) - self.v)

    def __mul__(self, other):
        return type(self)(self.v * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return type(self)(-self.v)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o == 0:
            raise ZeroDivisionError("division by zero in prime field")
        return type(self)(self.v * pow(o, -1, self.p))

    def __rtruediv__(self, other):
        return type(self)(self._coerce(other)) / self

    def __eq__(self, other):
        if isinstance(other, _Fp):
            return self.v == other.v
        try:
            return self.v == int(other) % self.p
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.v)

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return str(self.v)


class PrimeField:
    def __init__(self, p: int = 65521):
        if p < 3:
            raise ValueError("prime field needs p > 2")
        self.p = p
        self.name = f"GF({p})"
        self.characteristic = p
        self.elt = type(f"GF{p}", (_Fp,), {"p": p, "__slots__": ()})

    def __call__(self, x):
        if isinstance(x, _Fp):
            return self.elt(x.v)
        if isinstance(x, str) and "/" in x:
            a, b = x.split("/")
            return self.elt(int(a)) / self.elt(int(b))
        if hasattr(x, "numerator") and hasattr(x, "denominator"):
            return self.elt(int(x.numerator)) / self.elt(int(x.denominator))
        return self.elt(int(x))

    @property
    def zero(self):
        return self.elt(0)

    @property
    def one(self):
        return self.elt(1)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __repr__(self):
        return self.name

    def fmt(self, c):
        return str(c.v)


QQ = RationalField()


def field_from_spec(spec: str):
    """``"q"`` gives the rationals, ``"fp:P"`` the prime field of order P."""
    spec = spec.strip().lower()
    if spec in ("q", "qq"):
        return QQ
    if spec.startswith("fp"):
        _, _, p = spec.partition(":")
        return PrimeField(int(p) if p else 65521)
    raise ValueError(f"unknown field {spec!r}")


# ---------------------------------------------------------------------------
# Monomial orders
# ---------------------------------------------------------------------------


def grevlex_key(e: Exp):
    return (sum(e), tuple(-a for a in reversed(e)))


def lex_key(e: Exp):
    return e


class MonomialOrder:
    """A monomial well-order on exponent vectors; ``key`` grows with the order.

    ``weighted`` refines a nonnegative weight vector by grevlex.
    """

    def __init__(self, kind: str = "grevlex", weights: Sequence[int] | None = None):
        if kind not in ("grevlex", "lex", "weighted"):
            raise ValueError(kind)
        if kind == "weighted":
            if weights is None or any(w < 0 for w in weights):
                raise ValueError("weighted order needs nonnegative weights")
            w = tuple(weights)
            self.key = lambda e: (sum(a * b for a, b in zip(w, e)), grevlex_key(e))
        elif kind == "lex":
            self.key = lex_key
        else:
            self.key = grevlex_key
        self.kind = kind
        self.weights = None if weights is None else tuple(weights)

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and (self.kind, self.weights) == (other.kind, other.weights)

    def __hash__(self):
        return hash((self.kind, self.weights))

    def __repr__(self):
        return f"MonomialOrder({self.kind!r})"


GREVLEX = MonomialOrder()


# ---------------------------------------------------------------------------
# Rings and polynomials
# ---------------------------------------------------------------------------


class PolyRing:
    """Polynomial ring over a field with an integer weight per variable."""

    def __init__(self, names: Sequence[str], weights: Sequence[int] | None = None, field=QQ):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        self.names = names
        self.nvars = len(names)
        self.weights = tuple(weights) if weights is not None else (1,) * len(names)
        if len(self.weights) != self.nvars:
            raise ValueError("one weight per variable")
        self.field = field
        self._index = {n: i for i, n in enumerate(names)}
        self._hash = hash((names, self.weights, field))

    def __eq__(self, other):
        return (
            isinstance(other, PolyRing)
            and self.names == other.names
            and self.weights == other.weights
            and self.field == other.field
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        w = "" if all(x == 1 for x in self.weights) else f", weights={self.weights}"
        return f"PolyRing({' '.join(self.names)}{w}, {self.field!r})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ParseError(f"undeclared variable {name!r}") from None

    @property
    def zero(self) -> "Poly":
        return Poly(self, {})

    @property
    def one(self) -> "Poly":
        return self.const(1)

    def const(self, c) -> "Poly":
        c = self.field(c)
        return Poly(self, {(0,) * self.nvars: c} if c != 0 else {})

    def monomial(self, exp: Exp, coeff=1) -> "Poly":
        c = self.field(coeff)
        return Poly(self, {tuple(exp): c} if c != 0 else {})

    def var(self, name: str) -> "Poly":
        e = [0] * self.nvars
        e[self.index(name)] = 1
        return Poly(self, {tuple(e): self.field.one})

    def gens(self):
        return [self.var(n) for n in self.names]

    def weight(self, exp: Exp) -> int:
        return sum(a * w for a, w in zip(exp, self.weights))

    def __call__(self, x) -> "Poly":
        if isinstance(x, Poly):
            if x.ring == self:
                return x
            raise RingMismatch(f"{x.ring} vs {self}")
        if isinstance(x, str):
            return self.parse(x)
        return self.const(x)

    def parse(self, text: str) -> "Poly":
        return _Parser(self, text).parse()

    def with_field(self, field) -> "PolyRing":
        return PolyRing(self.names, self.weights, field)


class Poly:
    """Immutable polynomial; ``terms`` maps exponent tuples to nonzero coefficients."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: PolyRing, terms: Dict[Exp, object]):
        self.ring = ring
        self.terms = terms
        self._hash = None

    # -- arithmetic -------------------------------------------------------
    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise RingMismatch(f"{other.ring} vs {self.ring}")
            return other
        return self.ring.const(other)

    def __add__(self, other):
        other = self._lift(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            s = t.get(e)
            if s is None:
                t[e] = c
            else:
                s = s + c
                if s == 0:
                    del t[e]
                else:
                    t[e] = s
        return Poly(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        if not self.terms or not other.terms:
            return self.ring.zero
        t: Dict[Exp, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = t.get(e)
                t[e] = c1 * c2 if s is None else s + c1 * c2
        return Poly(self.ring, {e: c for e, c in t.items() if c != 0})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = self.ring.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c) -> "Poly":
        c = self.ring.field(c)
        if c == 0:
            return self.ring.zero
        return Poly(self.ring, {e: a * c for e, a in self.terms.items()})

    def mul_monomial(self, exp: Exp, c=None) -> "Poly":
        if c is None:
            return Poly(self.ring, {tuple(a + b for a, b in zip(e, exp)): v for e, v in self.terms.items()})
        return Poly(self.ring, {tuple(a + b for a, b in zip(e, exp)): v * c for e, v in self.terms.items()})

    # -- predicates and data ------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self.terms == other.terms
        if not self.terms:
            return other == 0
        try:
            return self.terms == self.ring.const(other).terms
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_coeff(self):
        return self.terms.get((0,) * self.ring.nvars, self.ring.field.zero)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def weights(self):
        return {self.ring.weight(e) for e in self.terms}

    def weight(self) -> int:
        """Weight of a homogeneous polynomial (0 for the zero polynomial)."""
        ws = self.weights()
        if len(ws) > 1:
            raise ValueError(f"{self} is not homogeneous")
        return ws.pop() if ws else 0

    def is_homogeneous(self) -> bool:
        return len(self.weights()) <= 1

    def order(self) -> int:
        """Smallest weight of a term (the order of vanishing for positive weights)."""
        if not self.terms:
            raise ValueError("order of zero polynomial")
        return min(self.weights())

    def initial_form(self) -> "Poly":
        o = self.order()
        return Poly(self.ring, {e: c for e, c in self.terms.items() if self.ring.weight(e) == o})

    def lead(self, order: MonomialOrder = GREVLEX):
        e = max(self.terms, key=order.key)
        return e, self.terms[e]

    def sorted_terms(self, order: MonomialOrder = GREVLEX):
        return sorted(self.terms.items(), key=lambda t: order.key(t[0]), reverse=True)

    def monic(self, order: MonomialOrder = GREVLEX) -> "Poly":
        if not self.terms:
            return self
        _, c = self.lead(order)
        return self.scale(self.ring.field.one / c)

    def variables_used(self):
        used = set()
        for e in self.terms:
            used.update(i for i, a in enumerate(e) if a)
        return {self.ring.names[i] for i in used}

    def evaluate(self, point: Sequence) -> object:
        F = self.ring.field
        total = F.zero
        pt = [F(v) for v in point]
        for e, c in self.terms.items():
            m = c
            for a, v in zip(e, pt):
                if a:
                    m = m * v**a
            total = total + m
        return total

    # -- printing -----------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        fmt = self.ring.field.fmt
        for e, c in self.sorted_terms():
            mono = "*".join(
                n if a == 1 else f"{n}^{a}" for n, a in zip(self.ring.names, e) if a
            )
            s = fmt(c)
            neg = s.startswith("-")
            if neg:
                s = s[1:]
            if mono:
                body = mono if s == "1" else f"{s}*{mono}"
            else:
                body = s
            if not out:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    def __repr__(self):
        return f"Poly({self})"


def graded_parts(p: Poly):
    """Split ``p`` into homogeneous parts, ascending by weight."""
    parts: Dict[int, Dict[Exp, object]] = {}
    for e, c in p.terms.items():
        parts.setdefault(p.ring.weight(e), {})[e] = c
    return [(w, Poly(p.ring, parts[w])) for w in sorted(parts)]


def substitute(p: Poly, mapping: Mapping[str, Poly], target: PolyRing | None = None) -> Poly:
    """Apply the ring homomorphism sending each variable of ``p.ring`` to a polynomial.

    Variables missing from ``mapping`` are sent to the variable of the same name in
    ``target``.
    """
    target = target or (next(iter(mapping.values())).ring if mapping else p.ring)
    images = []
    for n in p.ring.names:
        if n in mapping:
            img = mapping[n]
            if not isinstance(img, Poly):
                img = target.const(img)
            elif img.ring != target:
                raise RingMismatch(f"image of {n} lies in {img.ring}, expected {target}")
        else:
            img = target.var(n)
        images.append(img)
    result = target.zero
    cache: Dict[Tuple[int, int], Poly] = {}

    def power(i, a):
        key = (i, a)
        if key not in cache:
            cache[key] = images[i] ** a
        return cache[key]

    for e, c in p.terms.items():
        term = target.const(target.field(c) if p.ring.field == target.field else c)
        for i, a in enumerate(e):
            if a:
                term = term * power(i, a)
        result = result + term
    return result


def change_ring(p: Poly, target: PolyRing) -> Poly:
    """Reinterpret ``p`` in a ring whose variables include all of ``p``'s (by name)."""
    idx = [target.index(n) for n in p.ring.names]
    terms = {}
    for e, c in p.terms.items():
        ne = [0] * target.nvars
        for i, a in zip(idx, e):
            ne[i] = a
        terms[tuple(ne)] = target.field(c) if target.field != p.ring.field else c
    return Poly(target, {e: c for e, c in terms.items() if c != 0})


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*^/()]))")


class _Parser:
    """Recursive descent: sums of products; juxtaposition means multiplication."""

    def __init__(self, ring: PolyRing, text: str):
        self.ring = ring
        self.text = text
        self.tokens = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            start = m.start(m.lastindex)
            if m.group(1):
                self.tokens.append(("num", m.group(1), start))
            elif m.group(2):
                self.tokens.append(("id", m.group(2), start))
            else:
                op = "^" if m.group(3) == "**" else m.group(3)
                self.tokens.append(("op", op, start))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> Poly:
        if not self.tokens:
            raise ParseError("empty polynomial", 0)
        p = self.sum()
        t = self.peek()
        if t is not None:
            raise ParseError(f"unexpected token {t[1]!r}", t[2])
        return p

    def sum(self) -> Poly:
        sign = 1
        t = self.peek()
        if t and t[0] == "op" and t[1] in "+-":
            self.take()
            sign = -1 if t[1] == "-" else 1
        p = self.product()
        if sign < 0:
            p = -p
        while True:
            t = self.peek()
            if t and t[0] == "op" and t[1] in "+-":
                self.take()
                q = self.product()
                p = p + q if t[1] == "+" else p - q
            else:
                return p

    def product(self) -> Poly:
        p = self.power()
        while True:
            t = self.peek()
            if t is None:
                return p
            if t[0] == "op" and t[1] == "*":
                self.take()
                p = p * self.power()
            elif t[0] == "op" and t[1] == "/":
                self.take()
                q = self.power()
                if not q.is_constant() or q.is_zero():
                    raise ParseError("division only by nonzero constants", t[2])
                p = p.scale(self.ring.field.one / q.constant_coeff())
            elif t[0] in ("num", "id") or (t[0] == "op" and t[1] == "("):
                p = p * self.power()
            else:
                return p

    def power(self) -> Poly:
        base = self.atom()
        t = self.peek()
        if t and t[0] == "op" and t[1] == "^":
            self.take()
            n = self.take()
            if n is None or n[0] != "num":
                raise ParseError("exponent must be a nonnegative integer", t[2])
            base = base ** int(n[1])
        return base

    def atom(self) -> Poly:
        t = self.take()
        if t is None:
            raise ParseError("unexpected end of input", len(self.text))
        kind, val, pos = t
        if kind == "num":
            return self.ring.const(int(val))
        if kind == "id":
            if val in self.ring._index:
                return self.ring.var(val)
            # "yz" is read as y*z when every letter is a declared variable
            if all(ch in self.ring._index for ch in val):
                p = self.ring.one
                for ch in val:
                    p = p * self.ring.var(ch)
                return p
            raise ParseError(f"undeclared variable {val!r}", pos)
        if val == "(":
            p = self.sum()
            close = self.take()
            if close is None or close[1] != ")":
                raise ParseError("missing ')'", pos)
            return p
        raise ParseError(f"unexpected token {val!r}", pos)


@lru_cache(maxsize=None)
def monomials_of_degree(nvars: int, d: int):
    """All exponent vectors of total degree ``d`` (empty for negative ``d``)."""
    if d < 0:
        return ()
    if nvars == 0:
        return ((),) if d == 0 else ()
    if nvars == 1:
        return ((d,),)
    out = []
    for a in range(d, -1, -1):
        for rest in monomials_of_degree(nvars - 1, d - a):
            out.append((a,) + rest)
    return tuple(out)


def poly_arith(a: Poly, b: Poly, op: str) -> Poly:
    if a.ring != b.ring:
        raise RingMismatch(f"{a.ring} vs {b.ring}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(op)


def ring_of(names: Iterable[str], weights=None, field=QQ) -> PolyRing:
    return PolyRing(tuple(names), weights, field)
