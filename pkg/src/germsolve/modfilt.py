"""
Ideals, submodules and filtrations of R^p, R = Q[x]/m^(D+1).

Everything reduces to one primitive: a sparse row-echelon form over Q of
the vectors {mu * g : g a generator, mu a monomial}, with columns ordered
by (total degree, graded-lex monomial, component).  Because every stored
row has its pivot in its lowest-degree column, reducing a target in
ascending column order tells us the first degree slice at which it
leaves the span.  All answers are statements modulo m^(degree+1).
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .series import (Q, TOP, DomainError, Ring, SeriesVec, StructuralError,
                     TruncSeries, format_series, format_vec, mono_key)


class Echelon:
    """Incremental sparse echelon basis over Q.

    Each stored row remembers how it was built from the original vectors
    (`combo`: tag -> coefficient), so reductions come with witnesses.
    """

    def __init__(self):
        self.rows = {}  # pivot column -> (row dict, combo dict)
        self.kernel = []  # combos of originals that reduced to zero
        self.dependent = []  # the tag whose insertion produced each kernel relation

    def __len__(self):
        return len(self.rows)

    def reduce(self, vec: dict, track: bool = True):
        """Return (residual, combo) with vec = residual + sum combo[t]*orig[t]."""
        vec = dict(vec)
        acc = {}
        heap = list(vec)
        heapq.heapify(heap)
        done = set()
        rows = self.rows
        while heap:
            c = heapq.heappop(heap)
            if c in done:
                continue
            done.add(c)
            a = vec.get(c)
            if not a:
                continue
            hit = rows.get(c)
            if hit is None:
                continue
            row, combo = hit
            for k, v in row.items():
                nv = vec.get(k, 0) - a * v
                if nv:
                    if k not in vec:
                        heapq.heappush(heap, k)
                    vec[k] = nv
                else:
                    vec.pop(k, None)
            if track:
                for t, v in combo.items():
                    nv = acc.get(t, 0) + a * v
                    if nv:
                        acc[t] = nv
                    else:
                        acc.pop(t, None)
        return vec, acc

    def add(self, vec: dict, tag) -> bool:
        """Insert an original vector; False if it was already in the span."""
        res, acc = self.reduce(vec)
        if not res:
            rel = {t: -v for t, v in acc.items()}
            rel[tag] = rel.get(tag, 0) + 1
            self.kernel.append(rel)
            self.dependent.append(tag)
            return False
        pivot = min(res)
        lead = res[pivot]
        inv = 1 / Q(lead)
        row = {k: v * inv for k, v in res.items()}
        combo = {t: -v * inv for t, v in acc.items()}
        combo[tag] = combo.get(tag, 0) + inv
        self.rows[pivot] = (row, combo)
        return True


# ---------------------------------------------------------------------------
# vector <-> coordinate dict conversion

def _col(ring: Ring, rank: int, mono, comp: int) -> int:
    return ring.index()[mono] * rank + comp


def vec_coords(v: SeriesVec, degree: int) -> dict:
    ring = v.ring
    idx = ring.index()
    p = v.rank
    out = {}
    for comp, e in enumerate(v.entries):
        for m, c in e.terms.items():
            if sum(m) <= degree:
                out[idx[m] * p + comp] = c
    return out


def shifted_coords(v: SeriesVec, mu, degree: int) -> dict:
    """Coordinates of mu * v truncated at degree."""
    ring = v.ring
    idx = ring.index()
    p = v.rank
    dmu = sum(mu)
    out = {}
    for comp, e in enumerate(v.entries):
        for m, c in e.terms.items():
            if sum(m) + dmu <= degree:
                out[idx[tuple(a + b for a, b in zip(m, mu))] * p + comp] = c
    return out


def coords_vec(ring: Ring, rank: int, coords: dict) -> SeriesVec:
    monos = ring.monomials()
    terms = [dict() for _ in range(rank)]
    for col, c in coords.items():
        terms[col % rank][monos[col // rank]] = c
    return SeriesVec(TruncSeries(ring, t) for t in terms)


def col_degree(ring: Ring, rank: int, col: int) -> int:
    return sum(ring.monomials()[col // rank])


def combo_series(ring: Ring, combo: dict, ngens: int) -> list:
    """Turn a witness {(gen, mono): coeff} into one series per generator."""
    parts = [dict() for _ in range(ngens)]
    for (j, mu), c in combo.items():
        parts[j][mu] = parts[j].get(mu, 0) + c
    return [TruncSeries(ring, t) for t in parts]


def build_span(gens: Sequence[SeriesVec], ring: Ring, degree: int) -> Echelon:
    """Echelon of all mu*g (deg <= degree), inserted generator by generator
    and, within one generator, by ascending monomial.  This insertion order
    is the tie-break for every lift: earlier unknowns are preferred."""
    ech = Echelon()
    for j, g in enumerate(gens):
        o = g.order()
        if o == TOP or o > degree:
            continue
        for mu in ring.monomials(degree - o):
            coords = shifted_coords(g, mu, degree)
            if coords:
                ech.add(coords, (j, mu))
    return ech


# ---------------------------------------------------------------------------
# submodules and ideals

def _normalize(s: TruncSeries) -> TruncSeries:
    lm = s.leading_monomial()
    c = s.terms[lm]
    return s if c == 1 else s * (1 / Q(c))


def _normalize_vec(v: SeriesVec) -> SeriesVec:
    for e in v.entries:
        if not e.is_zero():
            c = e.terms[e.leading_monomial()]
            return v if c == 1 else v.scale(1 / Q(c))
    return v


def _dedupe(items):
    seen = {}
    for it in items:
        seen.setdefault(it, None)
    return list(seen)


@dataclass(frozen=True)
class Membership:
    member: bool
    degree: int
    witness: list | None = None  # one coefficient series per generator
    obstruction_degree: int | None = None
    residual: SeriesVec | None = None

    def __bool__(self):
        return self.member


class SubmoduleT:
    """Finitely generated submodule of R^rank, claims valid mod m^(verified_degree+1)."""

    def __init__(self, ring: Ring, rank: int, generators: Sequence[SeriesVec] = (),
                 verified_degree: int | None = None):
        gens = []
        for g in generators:
            if g.rank != rank:
                raise StructuralError("generator rank %d != %d" % (g.rank, rank))
            if g.ring.trunc != ring.trunc:
                raise StructuralError("generator truncation mismatch")
            if not g.is_zero():
                gens.append(g)
        self.ring = ring
        self.rank = rank
        self.generators = tuple(_dedupe(gens))
        self.verified_degree = ring.trunc if verified_degree is None else verified_degree
        self._spans = {}

    @classmethod
    def free(cls, ring: Ring, rank: int) -> "SubmoduleT":
        return cls(ring, rank, [SeriesVec.basis(ring, rank, i) for i in range(rank)])

    def __repr__(self):
        return "SubmoduleT(%s)" % ", ".join(format_vec(g) for g in self.generators)

    def span(self, degree: int) -> Echelon:
        if degree not in self._spans:
            self._spans[degree] = build_span(self.generators, self.ring, degree)
        return self._spans[degree]

    def dimension(self, degree: int) -> int:
        """Q-dimension of the image of this submodule in R^rank / m^(degree+1)."""
        return len(self.span(degree))

    def membership(self, v: SeriesVec, degree: int | None = None) -> Membership:
        if degree is None:
            degree = self.verified_degree
        if degree > self.verified_degree:
            raise DomainError("degree %d exceeds verified degree %d" % (degree, self.verified_degree))
        target = vec_coords(v, degree)
        if not target:
            return Membership(True, degree, [self.ring.zero() for _ in self.generators])
        res, acc = self.span(degree).reduce(target)
        if res:
            first = min(res)
            return Membership(False, degree, None, col_degree(self.ring, self.rank, first),
                              coords_vec(self.ring, self.rank, res))
        return Membership(True, degree, combo_series(self.ring, acc, len(self.generators)))

    def contains(self, v: SeriesVec, degree: int | None = None) -> bool:
        if degree is None:
            degree = self.verified_degree
        target = vec_coords(v, degree)
        if not target:
            return True
        res, _ = self.span(degree).reduce(target, track=False)
        return not res

    def contains_module(self, other: "SubmoduleT", degree: int | None = None) -> bool:
        return all(self.contains(g, degree) for g in other.generators)

    def scaled(self, ideal: "IdealT") -> "SubmoduleT":
        """ideal * self, generator-wise products."""
        gens = [_normalize_vec(g.scale(f)) for g in self.generators for f in ideal.generators]
        return SubmoduleT(self.ring, self.rank, gens,
                          min(self.verified_degree, ideal.verified_degree))

    def plus(self, other: "SubmoduleT") -> "SubmoduleT":
        return SubmoduleT(self.ring, self.rank, self.generators + other.generators,
                          min(self.verified_degree, other.verified_degree))

    def minimalized(self, degree: int | None = None) -> "SubmoduleT":
        """Same submodule mod m^(degree+1) with redundant generators dropped."""
        if degree is None:
            degree = self.verified_degree
        order = sorted(range(len(self.generators)),
                       key=lambda j: (self.generators[j].order(), j))
        ech = Echelon()
        keep = []
        for j in order:
            g = self.generators[j]
            o = g.order()
            if o > degree:
                continue
            res, _ = ech.reduce(vec_coords(g, degree), track=False)
            if not res:
                continue
            keep.append(g)
            for mu in self.ring.monomials(degree - o):
                coords = shifted_coords(g, mu, degree)
                if coords:
                    ech.add(coords, (len(keep) - 1, mu))
        out = SubmoduleT(self.ring, self.rank, keep, min(degree, self.verified_degree))
        out._spans[degree] = ech
        return out


class IdealT:
    """Finitely generated ideal of R with a verified-degree stamp."""

    def __init__(self, ring: Ring, generators: Sequence[TruncSeries] = (),
                 verified_degree: int | None = None):
        gens = []
        for g in generators:
            if g.ring.trunc != ring.trunc or g.ring.nvars != ring.nvars:
                raise StructuralError("generator ring mismatch")
            if not g.is_zero():
                gens.append(_normalize(g))
        self.ring = ring
        self.generators = tuple(_dedupe(gens))
        self.verified_degree = ring.trunc if verified_degree is None else verified_degree
        self._module = None

    @classmethod
    def maximal(cls, ring: Ring) -> "IdealT":
        return cls(ring, ring.maximal_ideal_gens())

    @classmethod
    def unit(cls, ring: Ring) -> "IdealT":
        return cls(ring, [ring.one()])

    @classmethod
    def monomial(cls, ring: Ring, monos) -> "IdealT":
        return cls(ring, [ring.monomial(m) for m in monos])

    def __repr__(self):
        return "IdealT(%s)" % ", ".join(format_series(g) for g in self.generators)

    def strings(self) -> list:
        return [format_series(g) for g in self.generators]

    def as_submodule(self) -> SubmoduleT:
        if self._module is None:
            self._module = SubmoduleT(self.ring, 1, [SeriesVec([g]) for g in self.generators],
                                      self.verified_degree)
        return self._module

    def is_monomial(self) -> bool:
        return all(g.is_monomial() for g in self.generators)

    def is_zero(self) -> bool:
        return not self.generators

    def contains(self, f: TruncSeries, degree: int | None = None) -> bool:
        return self.as_submodule().contains(SeriesVec([f]), degree)

    def contains_ideal(self, other: "IdealT", degree: int | None = None) -> bool:
        return all(self.contains(g, degree) for g in other.generators)

    def __add__(self, other: "IdealT") -> "IdealT":
        return ideal_combine(self, other, "sum")

    def __mul__(self, other: "IdealT") -> "IdealT":
        return ideal_combine(self, other, "product")

    def __pow__(self, k: int) -> "IdealT":
        return ideal_combine(self, self, "power", k)

    def times_module(self, rank: int) -> SubmoduleT:
        """self * R^rank."""
        gens = [SeriesVec.basis(self.ring, rank, i, g) for g in self.generators for i in range(rank)]
        return SubmoduleT(self.ring, rank, gens, self.verified_degree)

    def minimalized(self, degree: int | None = None) -> "IdealT":
        mod = self.as_submodule().minimalized(degree)
        return IdealT(self.ring, [g[0] for g in mod.generators], mod.verified_degree)


def ideal_combine(A: IdealT, B: IdealT, op: str, k: int | None = None) -> IdealT:
    vd = min(A.verified_degree, B.verified_degree)
    if op == "sum":
        return IdealT(A.ring, A.generators + B.generators, vd)
    if op == "product":
        return IdealT(A.ring, [f * g for f in A.generators for g in B.generators], vd)
    if op == "power":
        if k is None or k < 0:
            raise DomainError("power needs k >= 0")
        out = IdealT.unit(A.ring)
        for _ in range(k):
            out = IdealT(A.ring, [f * g for f in out.generators for g in A.generators],
                         A.verified_degree)
        return out
    raise StructuralError("unknown ideal op %r" % op)


def ideal_membership(f: TruncSeries, I: IdealT, degree: int | None = None) -> Membership:
    """Membership of f in I + m^(degree+1), with coefficient witnesses."""
    return I.as_submodule().membership(SeriesVec([f]), degree)


# ---------------------------------------------------------------------------
# matrices

class PolyMatrix:
    """p x n matrix over R, acting on column vectors R^n -> R^p."""

    def __init__(self, rows: Sequence[Sequence[TruncSeries]]):
        rows = [tuple(r) for r in rows]
        if not rows or not rows[0]:
            raise StructuralError("empty matrix")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise StructuralError("ragged matrix")
        ring = rows[0][0].ring
        for r in rows:
            for e in r:
                if e.ring.trunc != ring.trunc or e.ring.nvars != ring.nvars:
                    raise StructuralError("matrix entries must share a ring")
        self.rows = tuple(rows)
        self.ring = ring

    @classmethod
    def identity(cls, ring: Ring, n: int) -> "PolyMatrix":
        return cls([[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, entries: Sequence[TruncSeries]) -> "PolyMatrix":
        ring = entries[0].ring
        n = len(entries)
        return cls([[entries[i] if i == j else ring.zero() for j in range(n)] for i in range(n)])

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> SeriesVec:
        return SeriesVec(r[j] for r in self.rows)

    def columns(self) -> list:
        return [self.column(j) for j in range(self.shape[1])]

    def transpose(self) -> "PolyMatrix":
        p, n = self.shape
        return PolyMatrix([[self.rows[i][j] for i in range(p)] for j in range(n)])

    def apply(self, v: SeriesVec) -> SeriesVec:
        p, n = self.shape
        if v.rank != n:
            raise StructuralError("vector of rank %d for a %dx%d matrix" % (v.rank, p, n))
        out = []
        for r in self.rows:
            acc = self.ring.zero()
            for a, b in zip(r, v.entries):
                if a.terms and b.terms:
                    acc = acc + a * b
            out.append(acc)
        return SeriesVec(out)

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        p, n = self.shape
        n2, q = other.shape
        if n != n2:
            raise StructuralError("shape mismatch")
        out = []
        for i in range(p):
            row = []
            for j in range(q):
                acc = self.ring.zero()
                for k in range(n):
                    acc = acc + self.rows[i][k] * other.rows[k][j]
                row.append(acc)
            out.append(row)
        return PolyMatrix(out)

    def image(self) -> SubmoduleT:
        return SubmoduleT(self.ring, self.shape[0], self.columns())

    def __eq__(self, other):
        return isinstance(other, PolyMatrix) and self.rows == other.rows

    def __repr__(self):
        return "PolyMatrix(%s)" % "; ".join(
            "[" + ", ".join(format_series(e) for e in r) + "]" for r in self.rows)


def determinant(rows: Sequence[Sequence[TruncSeries]]) -> TruncSeries:
    """Laplace expansion along the first row; fine for desk-size matrices."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = rows[0][0].ring.zero()
    for j in range(n):
        a = rows[0][j]
        if a.is_zero():
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = a * determinant(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def minors(L: PolyMatrix, k: int) -> list:
    p, n = L.shape
    out = []
    for rs in combinations(range(p), k):
        for cs in combinations(range(n), k):
            out.append(determinant([[L.rows[i][j] for j in cs] for i in rs]))
    return out


def maximal_minors(L: PolyMatrix) -> IdealT:
    p, n = L.shape
    if p > n:
        raise DomainError("maximal minors need p <= n; transpose first")
    return IdealT(L.ring, minors(L, p))


def ann_coker(L: PolyMatrix, degree: int | None = None) -> IdealT:
    """Generators of {f : f*e_i in Im(L) + m^(degree+1) for all i}."""
    ring = L.ring
    if degree is None:
        degree = ring.trunc
    if degree > ring.trunc:
        raise DomainError("degree exceeds ring truncation")
    p, n = L.shape
    image = L.image()
    span = image.span(degree)
    monos = ring.monomials(degree)
    # residual of mu*e_i modulo Im(L), for every i at once; columns tagged by i
    ech = Echelon()
    for mu in reversed(monos):
        joint = {}
        for i in range(p):
            res, _ = span.reduce({_col(ring, p, mu, i): Q(1)}, track=False)
            for c, v in res.items():
                joint[c * p + i] = v
        ech.add(joint, mu)
    kernel = []
    for rel in ech.kernel:
        kernel.append(TruncSeries(ring, rel))
    kernel.sort(key=lambda f: (f.order(), mono_key(f.leading_monomial())))
    gens = _extract_generators(ring, kernel, degree)
    return IdealT(ring, gens, degree)


def _extract_generators(ring: Ring, elements: Sequence[TruncSeries], degree: int) -> list:
    """Greedy: keep an element unless it lies in the ideal of those kept."""
    ech = Echelon()
    keep = []
    for f in elements:
        v = SeriesVec([f])
        res, _ = ech.reduce(vec_coords(v, degree), track=False)
        if not res:
            continue
        keep.append(f)
        o = f.order()
        for mu in ring.monomials(degree - o):
            coords = shifted_coords(v, mu, degree)
            if coords:
                ech.add(coords, (len(keep) - 1, mu))
    return keep


# ---------------------------------------------------------------------------
# filtrations and the graded lift

@dataclass
class FiltrationSpec:
    """V_i = J^(i-1) * V1."""

    V1: SubmoduleT
    J: IdealT
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def component(self, i: int, minimal: bool = True) -> SubmoduleT:
        return filtration_component(self, i, minimal)


def filtration_component(spec: FiltrationSpec, i: int, minimal: bool = False) -> SubmoduleT:
    if i < 1:
        raise DomainError("filtration index starts at 1")
    key = (i, minimal)
    if key in spec._cache:
        return spec._cache[key]
    if i == 1:
        out = spec.V1
    else:
        prev = filtration_component(spec, i - 1, minimal)
        gens = [_normalize_vec(g.scale(f)) for g in prev.generators for f in spec.J.generators]
        out = SubmoduleT(spec.V1.ring, spec.V1.rank, gens,
                         min(spec.V1.verified_degree, spec.J.verified_degree))
        if minimal:
            out = out.minimalized()
    spec._cache[key] = out
    return out


@dataclass(frozen=True)
class Lift:
    z: SeriesVec
    coefficients: list  # one series per constraint generator
    degree: int

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NoSolution:
    degree: int  # first obstructed slice
    residual: SeriesVec
    solve_degree: int

    def __bool__(self):
        return False


def graded_image_solve(L: PolyMatrix, w: SeriesVec, constraint: SubmoduleT | None = None,
                       degree: int | None = None, rng: random.Random | None = None):
    """Find z in `constraint` with L z = w mod m^(degree+1).

    The solution is written through the constraint generators; with no
    rng the unknowns that are linearly dependent on earlier ones (by
    generator index, then ascending monomial) are set to zero, so the
    answer is deterministic.  With an rng they get small random values.
    """
    ring = L.ring
    p, n = L.shape
    if degree is None:
        degree = ring.trunc
    if degree > ring.trunc:
        raise DomainError("degree exceeds ring truncation")
    if w.rank != p:
        raise StructuralError("target has rank %d, expected %d" % (w.rank, p))
    if constraint is None:
        constraint = SubmoduleT.free(ring, n)
    if constraint.rank != n:
        raise StructuralError("constraint rank %d, expected %d" % (constraint.rank, n))
    gens = constraint.generators
    images = [L.apply(g) for g in gens]
    ech = build_span(images, ring, degree)
    target = vec_coords(w, degree)
    free = {}
    if rng is not None:
        for tag in ech.dependent:
            free[tag] = Q(rng.randint(-3, 3))
        # unknowns mu*g whose image vanishes modulo the truncation are free as well
        for j, (g, im) in enumerate(zip(gens, images)):
            og, oi = g.order(), im.order()
            if og > degree:
                continue
            lo = 0 if oi == TOP else max(0, degree - int(oi) + 1)
            for mu in ring.monomials(degree - int(og)):
                if sum(mu) >= lo:
                    free[(j, mu)] = Q(rng.randint(-3, 3))
        for (j, mu), c in free.items():
            if c:
                for col, v in shifted_coords(images[j], mu, degree).items():
                    nv = target.get(col, 0) - c * v
                    if nv:
                        target[col] = nv
                    else:
                        target.pop(col, None)
    res, acc = ech.reduce(target)
    if res:
        return NoSolution(col_degree(ring, p, min(res)), coords_vec(ring, p, res), degree)
    for t, c in free.items():
        acc[t] = acc.get(t, 0) + c
    coeffs = combo_series(ring, acc, len(gens))
    z = SeriesVec.zero(ring, n)
    for c, g in zip(coeffs, gens):
        if not c.is_zero():
            z = z + g.scale(c)
    return Lift(z, coeffs, degree)
