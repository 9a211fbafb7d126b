"""
Truncated multivariate power series over Q.

Elements of Q[x_1..x_m] / m^(D+1) are stored as sparse maps
exponent-tuple -> rational.  The truncation degree D lives on the ring,
so two series can only be combined when they share a ring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterable, Mapping

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    from fractions import Fraction as Q

#: order of a series with no stored terms ("at least D+1")
TOP = math.inf

Monomial = tuple  # tuple[int, ...] of exponents


class StructuralError(ValueError):
    """Operands live in incompatible rings or have mismatched shapes."""


class DomainError(ValueError):
    """Operation is not defined for the given input."""


def mdeg(mono: Monomial) -> int:
    return sum(mono)


def mono_key(mono: Monomial):
    """Graded-lex sort key: total degree first, then x1 > x2 > ..."""
    return (sum(mono), tuple(-e for e in mono))


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(i + j for i, j in zip(a, b))


def mono_divides(a: Monomial, b: Monomial) -> bool:
    return all(i <= j for i, j in zip(a, b))


def to_q(c) -> Q:
    if isinstance(c, str):
        return Q(c.strip())
    return Q(c)


@dataclass(frozen=True)
class Ring:
    """Q[names] / m^(trunc+1)."""

    names: tuple
    trunc: int
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(set(self.names)) != len(self.names):
            raise StructuralError("duplicate variable names: %r" % (self.names,))
        if self.trunc < 0:
            raise DomainError("truncation degree must be >= 0")

    @property
    def nvars(self) -> int:
        return len(self.names)

    def with_trunc(self, trunc: int) -> "Ring":
        return Ring(self.names, trunc)

    def monomials(self, degree: int | None = None) -> list:
        """All monomials of total degree <= degree, graded-lex ascending."""
        if degree is None:
            degree = self.trunc
        key = ("monos", degree)
        if key not in self._cache:
            self._cache[key] = sorted(_monomials_upto(self.nvars, degree), key=mono_key)
        return self._cache[key]

    def monomials_of_degree(self, d: int) -> list:
        return [m for m in self.monomials(d) if sum(m) == d]

    def index(self, degree: int | None = None) -> dict:
        """monomial -> position in monomials(degree)."""
        if degree is None:
            degree = self.trunc
        key = ("index", degree)
        if key not in self._cache:
            self._cache[key] = {m: i for i, m in enumerate(self.monomials(degree))}
        return self._cache[key]

    # constructors

    def zero(self) -> "TruncSeries":
        return TruncSeries(self, {})

    def one(self) -> "TruncSeries":
        return self.const(1)

    def const(self, c) -> "TruncSeries":
        return TruncSeries(self, {(0,) * self.nvars: to_q(c)})

    def var(self, name_or_index) -> "TruncSeries":
        i = self.var_index(name_or_index)
        e = [0] * self.nvars
        e[i] = 1
        return TruncSeries(self, {tuple(e): Q(1)})

    def monomial(self, mono: Monomial, coeff=1) -> "TruncSeries":
        return TruncSeries(self, {tuple(mono): to_q(coeff)})

    def var_index(self, name_or_index) -> int:
        if isinstance(name_or_index, int):
            if not 0 <= name_or_index < self.nvars:
                raise StructuralError("variable index %d out of range" % name_or_index)
            return name_or_index
        try:
            return self.names.index(name_or_index)
        except ValueError:
            raise StructuralError("unknown variable %r" % (name_or_index,)) from None

    def maximal_ideal_gens(self) -> list:
        return [self.var(i) for i in range(self.nvars)]


def _monomials_upto(nvars: int, degree: int):
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            yield tuple(e)


class TruncSeries:
    """An element of ring; immutable once built."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: Ring, terms: Mapping | None = None, _clean: bool = False):
        self.ring = ring
        if _clean:
            self.terms = terms
        else:
            D = ring.trunc
            n = ring.nvars
            clean = {}
            for mono, c in (terms or {}).items():
                mono = tuple(mono)
                if len(mono) != n:
                    raise StructuralError("monomial %r has wrong arity for %r" % (mono, ring.names))
                if sum(mono) > D:
                    continue
                c = to_q(c)
                if c:
                    clean[mono] = c
            self.terms = clean
        self._hash = None

    # comparisons

    def _check(self, other: "TruncSeries"):
        if self.ring.trunc != other.ring.trunc or self.ring.nvars != other.ring.nvars:
            raise StructuralError(
                "mismatched rings: %r vs %r" % ((self.ring.names, self.ring.trunc),
                                                (other.ring.names, other.ring.trunc)))

    def _coerce(self, other) -> "TruncSeries":
        if isinstance(other, TruncSeries):
            self._check(other)
            return other
        return self.ring.const(other)

    def __eq__(self, other):
        if isinstance(other, TruncSeries):
            return self.ring.trunc == other.ring.trunc and self.terms == other.terms
        if _is_number(other):
            return self.terms == self.ring.const(other).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring.trunc, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # arithmetic

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            v = terms.get(m, 0) + c
            if v:
                terms[m] = v
            else:
                terms.pop(m, None)
        return TruncSeries(self.ring, terms, _clean=True)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries(self.ring, {m: -c for m, c in self.terms.items()}, _clean=True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            c = to_q(other)
            if not c:
                return self.ring.zero()
            return TruncSeries(self.ring, {m: c * v for m, v in self.terms.items()}, _clean=True)
        self._check(other)
        D = self.ring.trunc
        a = self._by_degree()
        b = other._by_degree()
        out = {}
        for da, ta in a:
            for db, tb in b:
                if da + db > D:
                    break
                for ma, ca in ta:
                    for mb, cb in tb:
                        m = tuple(i + j for i, j in zip(ma, mb))
                        out[m] = out.get(m, 0) + ca * cb
        return TruncSeries(self.ring, {m: c for m, c in out.items() if c}, _clean=True)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise DomainError("only non-negative integer powers are supported")
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def _by_degree(self):
        groups = {}
        for m, c in self.terms.items():
            groups.setdefault(sum(m), []).append((m, c))
        return sorted(groups.items())

    # inspection

    def order(self):
        """Smallest total degree present, or TOP for the zero series."""
        if not self.terms:
            return TOP
        return min(sum(m) for m in self.terms)

    def coeff(self, mono) -> Q:
        return self.terms.get(tuple(mono), Q(0))

    def constant_term(self) -> Q:
        return self.coeff((0,) * self.ring.nvars)

    def homogeneous_part(self, d: int) -> "TruncSeries":
        return TruncSeries(self.ring, {m: c for m, c in self.terms.items() if sum(m) == d}, _clean=True)

    def truncate(self, d: int) -> "TruncSeries":
        """Drop terms of degree > d, keeping the ring."""
        return TruncSeries(self.ring, {m: c for m, c in self.terms.items() if sum(m) <= d}, _clean=True)

    def in_ring(self, ring: Ring) -> "TruncSeries":
        """Re-express in a ring with the same variables and another truncation."""
        if ring.names != self.ring.names:
            raise StructuralError("variable names differ")
        return TruncSeries(ring, self.terms)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def leading_monomial(self):
        """Graded-lex smallest monomial (lowest degree first)."""
        return min(self.terms, key=mono_key) if self.terms else None

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: mono_key(t[0]))

    def derivative(self, var) -> "TruncSeries":
        """Formal partial derivative; the truncation degree is kept, so the
        top-degree slice of the result is always zero."""
        i = self.ring.var_index(var)
        out = {}
        for m, c in self.terms.items():
            if m[i]:
                e = list(m)
                e[i] -= 1
                out[tuple(e)] = c * m[i]
        return TruncSeries(self.ring, out, _clean=True)

    def map_coefficients(self, f) -> "TruncSeries":
        return TruncSeries(self.ring, {m: f(c) for m, c in self.terms.items()})

    def __repr__(self):
        return "TruncSeries(%s, D=%d)" % (format_series(self), self.ring.trunc)

    def __str__(self):
        return format_series(self)


def _is_number(x) -> bool:
    try:
        Q(x)
        return not isinstance(x, str)
    except (TypeError, ValueError):
        return False


def series_arith(a: TruncSeries, b: TruncSeries, op: str) -> TruncSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise StructuralError("unknown op %r" % op)


def order_of(a) -> int | float:
    return a.order()


def partial_derivative(a: TruncSeries, var) -> TruncSeries:
    return a.derivative(var)


def substitute(F: TruncSeries, assignment: Mapping, target: Ring) -> TruncSeries:
    """Compose F with series for some of its variables.

    `assignment` maps variable names (or indices) of F.ring to series in
    `target`; every other variable of F.ring must also be a variable of
    `target` and is mapped to itself.  Assigned series must have zero
    constant term.  The result is exact modulo m^(D+1) with
    D = target.trunc as long as target.trunc <= F.ring.trunc.
    """
    src = F.ring
    images = []
    for i, name in enumerate(src.names):
        s = assignment.get(name, assignment.get(i))
        if s is None:
            if name not in target.names:
                raise StructuralError("variable %r has no image in the target ring" % name)
            s = target.var(name)
        else:
            if not isinstance(s, TruncSeries):
                raise StructuralError("assignment for %r is not a series" % name)
            if s.ring.names != target.names or s.ring.trunc != target.trunc:
                s = s.in_ring(target)
            if s.constant_term():
                raise DomainError("substituted series for %r has nonzero constant term" % name)
        images.append(s)
    D = target.trunc
    powers = [[target.one()] for _ in images]

    def power(i, k):
        row = powers[i]
        while len(row) <= k:
            row.append(row[-1] * images[i])
        return row[k]

    total = {}
    for mono, c in F.terms.items():
        term = target.const(c)
        for i, k in enumerate(mono):
            if k:
                term = term * power(i, k)
                if not term.terms:
                    break
        for m, v in term.terms.items():
            total[m] = total.get(m, 0) + v
    return TruncSeries(target, {m: v for m, v in total.items() if v and sum(m) <= D}, _clean=True)


def unit_inverse(a: TruncSeries) -> TruncSeries:
    """1/a for a series with nonzero constant term (geometric series in the rest)."""
    c = a.constant_term()
    if not c:
        raise DomainError("series is not a unit")
    inv_c = 1 / Q(c)
    n = a * inv_c - a.ring.one()  # a = c (1 + n), n in m
    out = a.ring.one()
    term = a.ring.one()
    for _ in range(a.ring.trunc):
        term = -(term * n)
        if term.is_zero():
            break
        out = out + term
    return out * inv_c


def format_coeff_term(c, mono, names) -> tuple:
    """(sign, body) for one term; body has no leading sign."""
    parts = []
    for name, e in zip(names, mono):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append("%s^%d" % (name, e))
    sign = "-" if c < 0 else "+"
    a = abs(c)
    cs = str(Q(a))
    if not parts:
        return sign, cs
    if a == 1:
        return sign, "*".join(parts)
    return sign, cs + "*" + "*".join(parts)


def format_series(s: TruncSeries) -> str:
    """Canonical string: graded-lex ascending, explicit p/q coefficients."""
    if not s.terms:
        return "0"
    out = []
    for i, (mono, c) in enumerate(s.sorted_terms()):
        sign, body = format_coeff_term(c, mono, s.ring.names)
        if i == 0:
            out.append(body if sign == "+" else "-" + body)
        else:
            out.append(" %s %s" % (sign, body))
    return "".join(out)


class SeriesVec:
    """An element of the free module R^p."""

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[TruncSeries]):
        entries = tuple(entries)
        if not entries:
            raise StructuralError("SeriesVec needs at least one entry")
        r = entries[0].ring
        for e in entries[1:]:
            if e.ring.trunc != r.trunc or e.ring.nvars != r.nvars:
                raise StructuralError("entries of a SeriesVec must share one ring")
        self.entries = entries

    @classmethod
    def zero(cls, ring: Ring, rank: int) -> "SeriesVec":
        return cls([ring.zero()] * rank)

    @classmethod
    def basis(cls, ring: Ring, rank: int, i: int, coeff=None) -> "SeriesVec":
        e = [ring.zero()] * rank
        e[i] = ring.one() if coeff is None else coeff
        return cls(e)

    @property
    def ring(self) -> Ring:
        return self.entries[0].ring

    @property
    def rank(self) -> int:
        return len(self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def _check(self, other):
        if not isinstance(other, SeriesVec) or other.rank != self.rank:
            raise StructuralError("rank mismatch")

    def __add__(self, other):
        self._check(other)
        return SeriesVec(a + b for a, b in zip(self.entries, other.entries))

    def __sub__(self, other):
        self._check(other)
        return SeriesVec(a - b for a, b in zip(self.entries, other.entries))

    def __neg__(self):
        return SeriesVec(-a for a in self.entries)

    def scale(self, f) -> "SeriesVec":
        """Multiply every entry by a series or a rational."""
        return SeriesVec(f * a if isinstance(f, TruncSeries) else a * f for a in self.entries)

    def __mul__(self, f):
        return self.scale(f)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, SeriesVec):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.entries)

    def order(self):
        return min(e.order() for e in self.entries)

    def truncate(self, d: int) -> "SeriesVec":
        return SeriesVec(e.truncate(d) for e in self.entries)

    def in_ring(self, ring: Ring) -> "SeriesVec":
        return SeriesVec(e.in_ring(ring) for e in self.entries)

    def __repr__(self):
        return "SeriesVec(%s)" % format_vec(self)

    __str__ = __repr__


def format_vec(v: SeriesVec) -> str:
    return "[" + ", ".join(format_series(e) for e in v.entries) + "]"
