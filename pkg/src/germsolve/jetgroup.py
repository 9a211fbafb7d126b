"""
Unipotent jet groups acting on W / m^(D+1) W, their exp and ln, tangent
spaces to orbits, orbit lifting and finite-determinacy bounds.

W is Mat(a x b; R) flattened row-major, so R^p is the shape (p, 1).  A
group element is a triple (U, phi, V) acting by

    w  ->  U * w(phi(x)) * V^(-1),      phi(x) - x in m^2,  U - 1, V - 1 over m,

and the three flavors restrict it:

    r0      U = V = 1                (right equivalence)
    k0      V = 1, b = 1             (contact equivalence)
    matrix  all three                (left-right plus coordinate changes)

A tangent vector (d, X, Y) is the derivative of such a triple at the
identity; it acts by lambda(w) = X w + sum d_i dw/dx_i - w Y.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .modfilt import SubmoduleT, coords_vec, vec_coords
from .series import (Q, DomainError, Ring, SeriesVec, StructuralError, TruncSeries,
                     format_series, format_vec, substitute, unit_inverse)

FLAVORS = ("r0", "k0", "matrix")


def _check_flavor(flavor: str):
    if flavor not in FLAVORS:
        raise StructuralError("unknown flavor %r (expected one of %s)" % (flavor, ", ".join(FLAVORS)))


# ---------------------------------------------------------------------------
# small matrix helpers over R (lists of rows)

def _identity(ring: Ring, n: int) -> list:
    return [[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)]


def _matmul(A, B) -> list:
    ring = (A[0][0] if A and A[0] else B[0][0]).ring
    out = []
    for row in A:
        new = []
        for j in range(len(B[0])):
            acc = ring.zero()
            for k, a in enumerate(row):
                if not a.is_zero() and not B[k][j].is_zero():
                    acc = acc + a * B[k][j]
            new.append(acc)
        out.append(new)
    return out


def _matadd(A, B, sign=1) -> list:
    return [[a + b if sign > 0 else a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def _matscale(A, c) -> list:
    return [[a * c for a in row] for row in A]


def _unipotent_inverse(V) -> list:
    """(1 + N)^(-1) = sum (-N)^k for N over m."""
    ring = V[0][0].ring
    n = len(V)
    N = _matadd(V, _identity(ring, n), -1)
    out = _identity(ring, n)
    term = _identity(ring, n)
    for _ in range(ring.trunc + 1):
        term = _matscale(_matmul(term, N), -1)
        if all(e.is_zero() for row in term for e in row):
            break
        out = _matadd(out, term)
    return out


def _is_unipotent_matrix(U) -> bool:
    for i, row in enumerate(U):
        for j, e in enumerate(row):
            c = e.constant_term()
            if c != (1 if i == j else 0):
                return False
    return True


def _compose_matrix(U, phi, ring) -> list:
    """U(phi(x)) entrywise."""
    assign = {i: p for i, p in enumerate(phi)}
    return [[substitute(e, assign, ring) for e in row] for row in U]


def _as_matrix(w: SeriesVec, shape) -> list:
    a, b = shape
    if w.rank != a * b:
        raise StructuralError("vector of rank %d does not have shape %dx%d" % (w.rank, a, b))
    return [[w[r * b + s] for s in range(b)] for r in range(a)]


def _flatten(M) -> SeriesVec:
    return SeriesVec([e for row in M for e in row])


# ---------------------------------------------------------------------------
# the quotient and linear maps on it

@dataclass(frozen=True)
class JetQuotient:
    """W / m^(D+1) W with its monomial basis; W_j = m^j W is spanned by degree >= j."""

    ring: Ring
    shape: tuple = (1, 1)

    @property
    def rank(self) -> int:
        return self.shape[0] * self.shape[1]

    @property
    def dim(self) -> int:
        return len(self.ring.monomials()) * self.rank

    def slice_dims(self) -> dict:
        return {d: len(self.ring.monomials_of_degree(d)) * self.rank
                for d in range(self.ring.trunc + 1)}

    def basis(self) -> list:
        """(column, monomial, component) in column order."""
        out = []
        for k, mono in enumerate(self.ring.monomials()):
            for c in range(self.rank):
                out.append((k * self.rank + c, mono, c))
        return out

    def level(self, col: int) -> int:
        return sum(self.ring.monomials()[col // self.rank])

    def basis_vector(self, col: int) -> SeriesVec:
        mono = self.ring.monomials()[col // self.rank]
        return SeriesVec.basis(self.ring, self.rank, col % self.rank, self.ring.monomial(mono))

    def coords(self, w: SeriesVec) -> dict:
        return vec_coords(w, self.ring.trunc)

    def vector(self, coords: dict) -> SeriesVec:
        return coords_vec(self.ring, self.rank, coords)


def project(w: SeriesVec, j: int) -> SeriesVec:
    """pi_j: W -> W / W_j, keeping the degrees below j."""
    return w.truncate(j - 1)


class JetMap:
    """Linear map on a JetQuotient, stored as the images of basis vectors."""

    def __init__(self, quotient: JetQuotient, images: dict, in_group: bool | None = None):
        self.quotient = quotient
        self.images = {c: {k: v for k, v in img.items() if v} for c, img in images.items()}
        self.in_group = in_group

    @classmethod
    def identity(cls, q: JetQuotient) -> "JetMap":
        return cls(q, {c: {c: Q(1)} for c, _, _ in q.basis()})

    @classmethod
    def zero(cls, q: JetQuotient) -> "JetMap":
        return cls(q, {})

    @classmethod
    def from_function(cls, q: JetQuotient, f) -> "JetMap":
        return cls(q, {c: q.coords(f(q.basis_vector(c))) for c, _, _ in q.basis()})

    def column(self, c: int) -> dict:
        return self.images.get(c, {})

    def apply(self, w: SeriesVec) -> SeriesVec:
        out = {}
        for c, x in self.quotient.coords(w).items():
            for k, v in self.column(c).items():
                out[k] = out.get(k, 0) + x * v
        return self.quotient.vector({k: v for k, v in out.items() if v})

    def __call__(self, w: SeriesVec) -> SeriesVec:
        return self.apply(w)

    def __matmul__(self, other: "JetMap") -> "JetMap":
        """(self @ other)(w) = self(other(w))."""
        images = {}
        for c, img in other.images.items():
            acc = {}
            for k, x in img.items():
                for kk, v in self.column(k).items():
                    acc[kk] = acc.get(kk, 0) + x * v
            images[c] = acc
        return JetMap(self.quotient, images)

    def _combine(self, other: "JetMap", sign) -> "JetMap":
        images = {c: dict(img) for c, img in self.images.items()}
        for c, img in other.images.items():
            tgt = images.setdefault(c, {})
            for k, v in img.items():
                tgt[k] = tgt.get(k, 0) + sign * v
        return JetMap(self.quotient, images)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def scale(self, c) -> "JetMap":
        c = Q(c)
        return JetMap(self.quotient, {k: {kk: v * c for kk, v in img.items()}
                                      for k, img in self.images.items()})

    def __eq__(self, other):
        if not isinstance(other, JetMap):
            return NotImplemented
        keys = set(self.images) | set(other.images)
        return all(self.column(c) == other.column(c) for c in keys)

    def is_zero(self) -> bool:
        return not any(self.images.values())

    def raises_filtration(self, by: int = 1) -> bool:
        """xi(W_j) inside W_(j+by) for every j."""
        q = self.quotient
        return all(q.level(k) >= q.level(c) + by for c, img in self.images.items() for k in img)

    def is_unipotent(self) -> bool:
        return (self - JetMap.identity(self.quotient)).raises_filtration()

    def nnz(self) -> int:
        return sum(len(img) for img in self.images.values())


class NilpotentEndo(JetMap):
    """A JetMap that strictly raises the filtration."""

    def __init__(self, quotient: JetQuotient, images: dict):
        super().__init__(quotient, images)
        if not self.raises_filtration():
            raise DomainError("map does not raise the filtration")

    @classmethod
    def of(cls, m: JetMap) -> "NilpotentEndo":
        return cls(m.quotient, m.images)


def jet_ln(g) -> NilpotentEndo:
    """ln(g) = sum_(k>=1) (-1)^(k+1) N^k / k with N = g - 1; the sum stops at k = D+1."""
    if isinstance(g, JetAutomorphism):
        g = g.to_map()
    if not g.is_unipotent():
        raise DomainError("ln needs a unipotent map")
    q = g.quotient
    N = g - JetMap.identity(q)
    out = JetMap.zero(q)
    power = N
    for k in range(1, q.ring.trunc + 2):
        if power.is_zero():
            break
        out = out + power.scale(Q(1 if k % 2 else -1, k))
        power = power @ N
    return NilpotentEndo.of(out)


def jet_exp(xi: JetMap, tangent: "TangentVector | None" = None) -> JetMap:
    """exp(xi) = 1 + sum xi^k / k!.  With the tangent vector xi came from,
    the result is compared with the group element recovered from it and
    the outcome is stored in the `in_group` flag."""
    if not xi.raises_filtration():
        raise DomainError("exp needs a nilpotent endomorphism")
    q = xi.quotient
    out = JetMap.identity(q)
    power = xi
    fact = 1
    for k in range(1, q.ring.trunc + 2):
        if power.is_zero():
            break
        fact *= k
        out = out + power.scale(Q(1, fact))
        power = power @ xi
    if tangent is not None:
        out.in_group = tangent.automorphism().to_map(q) == out
    return out


# ---------------------------------------------------------------------------
# group elements

@dataclass
class JetAutomorphism:
    flavor: str
    ring: Ring
    shape: tuple
    phi: tuple
    U: list | None = None
    V: list | None = None

    def __post_init__(self):
        _check_flavor(self.flavor)
        a, b = self.shape
        self.phi = tuple(self.phi)
        if len(self.phi) != self.ring.nvars:
            raise StructuralError("phi needs one series per variable")
        for i, p in enumerate(self.phi):
            if p.constant_term():
                raise DomainError("phi has a nonzero constant term")
            if (p - self.ring.var(i)).order() < 2:
                raise DomainError("phi(x) - x must lie in m^2 for a unipotent element")
        if self.flavor == "r0" and (self.U is not None or self.V is not None):
            raise StructuralError("the r0 flavor has no matrix part")
        if self.flavor == "k0":
            if b != 1 or self.V is not None:
                raise StructuralError("the k0 flavor acts on column vectors with V = 1")
        for M, n in ((self.U, a), (self.V, b)):
            if M is None:
                continue
            if len(M) != n or any(len(r) != n for r in M):
                raise StructuralError("matrix part has the wrong size")
            if not _is_unipotent_matrix(M):
                raise DomainError("U and V must be identity modulo m")

    @classmethod
    def identity(cls, flavor: str, ring: Ring, shape=(1, 1)) -> "JetAutomorphism":
        _check_flavor(flavor)
        phi = tuple(ring.var(i) for i in range(ring.nvars))
        U = _identity(ring, shape[0]) if flavor in ("k0", "matrix") else None
        V = _identity(ring, shape[1]) if flavor == "matrix" else None
        return cls(flavor, ring, shape, phi, U, V)

    def quotient(self) -> JetQuotient:
        return JetQuotient(self.ring, self.shape)

    @property
    def V_inverse(self):
        if self.V is None:
            return None
        if getattr(self, "_vinv", None) is None:
            self._vinv = _unipotent_inverse(self.V)
        return self._vinv

    def act(self, w: SeriesVec) -> SeriesVec:
        return jet_act(self, w)

    def to_map(self, q: JetQuotient | None = None) -> JetMap:
        q = q or self.quotient()
        return JetMap.from_function(q, self.act)

    def compose(self, other: "JetAutomorphism") -> "JetAutomorphism":
        """self o other: apply other first."""
        if self.flavor != other.flavor or self.shape != other.shape:
            raise StructuralError("cannot compose different flavors or shapes")
        R = self.ring
        assign = {i: p for i, p in enumerate(self.phi)}
        phi = tuple(substitute(p, assign, R) for p in other.phi)
        U = V = None
        if self.U is not None:
            U = _matmul(self.U, _compose_matrix(other.U, self.phi, R))
        if self.V is not None:
            V = _matmul(self.V, _compose_matrix(other.V, self.phi, R))
        return JetAutomorphism(self.flavor, R, self.shape, phi, U, V)

    def describe(self) -> dict:
        out = {"flavor": self.flavor, "phi": [format_series(p) for p in self.phi]}
        if self.U is not None:
            out["U"] = [[format_series(e) for e in row] for row in self.U]
        if self.V is not None:
            out["V"] = [[format_series(e) for e in row] for row in self.V]
        return out


def jet_act(g: JetAutomorphism, w: SeriesVec) -> SeriesVec:
    """U * w(phi(x)) * V^(-1), truncated at D."""
    R = g.ring
    assign = {i: p for i, p in enumerate(g.phi)}
    M = [[substitute(e, assign, R) for e in row] for row in _as_matrix(w, g.shape)]
    if g.U is not None:
        M = _matmul(g.U, M)
    if g.V is not None:
        M = _matmul(M, g.V_inverse)
    return _flatten(M)


# ---------------------------------------------------------------------------
# tangent vectors

@dataclass
class TangentVector:
    flavor: str
    ring: Ring
    shape: tuple
    d: tuple  # derivation coefficients, each in m^2
    X: list | None = None
    Y: list | None = None

    @classmethod
    def zero(cls, flavor: str, ring: Ring, shape=(1, 1)) -> "TangentVector":
        _check_flavor(flavor)
        z = ring.zero()
        X = [[z] * shape[0] for _ in range(shape[0])] if flavor in ("k0", "matrix") else None
        Y = [[z] * shape[1] for _ in range(shape[1])] if flavor == "matrix" else None
        return cls(flavor, ring, shape, tuple(z for _ in range(ring.nvars)), X, Y)

    def derivation(self, f: TruncSeries) -> TruncSeries:
        acc = self.ring.zero()
        for i, di in enumerate(self.d):
            if not di.is_zero():
                acc = acc + di * f.derivative(i)
        return acc

    def apply(self, w: SeriesVec) -> SeriesVec:
        M = _as_matrix(w, self.shape)
        out = [[self.derivation(e) for e in row] for row in M]
        if self.X is not None:
            out = _matadd(out, _matmul(self.X, M))
        if self.Y is not None:
            out = _matadd(out, _matmul(M, self.Y), -1)
        return _flatten(out)

    def __call__(self, w):
        return self.apply(w)

    def exp_apply(self, w: SeriesVec) -> SeriesVec:
        """sum lambda^k(w)/k!; lambda raises the order, so D+1 terms suffice."""
        out = w
        term = w
        for k in range(1, self.ring.trunc + 2):
            term = self.apply(term).scale(Q(1, k))
            if term.is_zero():
                break
            out = out + term
        return out

    def exp_derivation(self, f: TruncSeries) -> TruncSeries:
        out = f
        term = f
        for k in range(1, self.ring.trunc + 2):
            term = self.derivation(term) * Q(1, k)
            if term.is_zero():
                break
            out = out + term
        return out

    def __add__(self, other: "TangentVector") -> "TangentVector":
        d = tuple(a + b for a, b in zip(self.d, other.d))
        X = _matadd(self.X, other.X) if self.X is not None else None
        Y = _matadd(self.Y, other.Y) if self.Y is not None else None
        return TangentVector(self.flavor, self.ring, self.shape, d, X, Y)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "TangentVector":
        """Multiply by a number or by a series (tangent vectors form an R-module)."""
        d = tuple(di * c for di in self.d)
        X = _matscale(self.X, c) if self.X is not None else None
        Y = _matscale(self.Y, c) if self.Y is not None else None
        return TangentVector(self.flavor, self.ring, self.shape, d, X, Y)

    def to_map(self, q: JetQuotient | None = None) -> NilpotentEndo:
        q = q or JetQuotient(self.ring, self.shape)
        return NilpotentEndo.of(JetMap.from_function(q, self.apply))

    def automorphism(self) -> JetAutomorphism:
        """The group element exp(lambda), read off from its action.

        phi_i = exp(D)(x_i).  For k0 the columns of U are exp(lambda)(e_r).
        For the matrix flavor exp(lambda)(E_rs) = U E_rs V^(-1) fixes U and
        V^(-1) up to a common unit, normalized by (V^(-1))_00 = 1.
        """
        R = self.ring
        a, b = self.shape
        phi = tuple(self.exp_derivation(R.var(i)) for i in range(R.nvars))
        if self.flavor == "r0":
            return JetAutomorphism("r0", R, self.shape, phi)

        def E(r, s):
            return SeriesVec.basis(R, a * b, r * b + s)

        if self.flavor == "k0":
            cols = [self.exp_apply(E(r, 0)) for r in range(a)]
            U = [[cols[c][r] for c in range(a)] for r in range(a)]
            return JetAutomorphism("k0", R, self.shape, phi, U)
        G_r0 = [_as_matrix(self.exp_apply(E(r, 0)), self.shape) for r in range(a)]
        G_0s = [_as_matrix(self.exp_apply(E(0, s)), self.shape) for s in range(b)]
        U = [[G_r0[r][i][0] for r in range(a)] for i in range(a)]
        u00 = unit_inverse(U[0][0])
        Vinv = [[G_0s[s][0][j] * u00 for j in range(b)] for s in range(b)]
        V = _unipotent_inverse(Vinv)
        return JetAutomorphism("matrix", R, self.shape, phi, U, V)

    def describe(self) -> dict:
        out = {"d": [format_series(x) for x in self.d]}
        if self.X is not None:
            out["X"] = [[format_series(e) for e in row] for row in self.X]
        if self.Y is not None:
            out["Y"] = [[format_series(e) for e in row] for row in self.Y]
        return out


def tangent_generators(flavor: str, ring: Ring, shape=(1, 1)) -> list:
    """Elementary tangent vectors spanning the tangent algebra over R."""
    _check_flavor(flavor)
    a, b = shape
    zero = TangentVector.zero(flavor, ring, shape)
    out = []
    for i in range(ring.nvars):
        for mono in ring.monomials_of_degree(2):
            d = list(zero.d)
            d[i] = ring.monomial(mono)
            out.append(TangentVector(flavor, ring, shape, tuple(d), zero.X, zero.Y))
    if flavor in ("k0", "matrix"):
        for l in range(ring.nvars):
            for r in range(a):
                for s in range(a):
                    X = [[ring.zero()] * a for _ in range(a)]
                    X[r][s] = ring.var(l)
                    out.append(TangentVector(flavor, ring, shape, zero.d, X, zero.Y))
    if flavor == "matrix":
        for l in range(ring.nvars):
            for r in range(b):
                for s in range(b):
                    Y = [[ring.zero()] * b for _ in range(b)]
                    Y[r][s] = ring.var(l)
                    out.append(TangentVector(flavor, ring, shape, zero.d, zero.X, Y))
    return out


@dataclass
class TangentSpace:
    """T = {lambda(w)} as an R-submodule of W, with the tangent vector behind each generator."""

    flavor: str
    w: SeriesVec
    shape: tuple
    module: SubmoduleT
    lambdas: list  # lambdas[j] maps to module.generators[j]

    @property
    def ring(self) -> Ring:
        return self.w.ring

    def contains(self, v: SeriesVec, degree: int | None = None) -> bool:
        return self.module.contains(v, degree)

    def slice_dims(self, degree: int | None = None) -> dict:
        """Dimension of each graded slice of T modulo m^(degree+1)."""
        degree = self.ring.trunc if degree is None else degree
        ech = self.module.span(degree)
        out = {d: 0 for d in range(degree + 1)}
        R = self.ring
        rank = self.w.rank
        for col in ech.rows:
            out[sum(R.monomials()[col // rank])] += 1
        return out

    def solve(self, target: SeriesVec, degree: int | None = None):
        """A tangent vector lambda with lambda(w) = target mod m^(degree+1), or None."""
        mem = self.module.membership(target, degree)
        if not mem:
            return None
        lam = TangentVector.zero(self.flavor, self.ring, self.shape)
        for c, l in zip(mem.witness, self.lambdas):
            if not c.is_zero():
                lam = lam + l.scale(c)
        return lam

    def generator_strings(self) -> list:
        return [format_vec(g) for g in self.module.generators]


def tangent_space(flavor: str, w: SeriesVec, degree: int | None = None, shape=None) -> TangentSpace:
    _check_flavor(flavor)
    R = w.ring
    shape = tuple(shape) if shape is not None else (w.rank, 1)
    if flavor == "k0" and shape[1] != 1:
        raise StructuralError("k0 acts on column vectors")
    seen = {}
    for lam in tangent_generators(flavor, R, shape):
        v = lam.apply(w)
        if not v.is_zero() and v not in seen:
            seen[v] = lam
    gens = list(seen)
    vd = R.trunc if degree is None else degree
    module = SubmoduleT(R, w.rank, gens, vd)
    return TangentSpace(flavor, w, shape, module, [seen[g] for g in gens])


# ---------------------------------------------------------------------------
# orbit lifting and determinacy

def _first_uncovered_slice(T: TangentSpace, k: int, degree: int):
    """Least d in [k, degree] with some degree-d basis vector outside T, or None."""
    R = T.ring
    rank = T.w.rank
    for d in range(k, degree + 1):
        for mono in R.monomials_of_degree(d):
            for c in range(rank):
                if not T.contains(SeriesVec.basis(R, rank, c, R.monomial(mono)), degree):
                    return d
    return None


@dataclass
class OrbitLift:
    automorphism: JetAutomorphism
    steps: int
    residual_orders: list
    degree: int

    def __bool__(self):
        return True


@dataclass
class OrbitFailure:
    slice: int | None
    message: str
    residual_orders: list = field(default_factory=list)

    def __bool__(self):
        return False


def orbit_lift(flavor: str, w: SeriesVec, u: SeriesVec, k: int, degree: int | None = None,
               shape=None):
    """g with g(w) = w + u mod m^(degree+1), provided m^k W lies in the tangent space."""
    R = w.ring
    degree = R.trunc if degree is None else degree
    shape = tuple(shape) if shape is not None else (w.rank, 1)
    if u.truncate(degree).order() < k:
        raise DomainError("u must lie in m^%d W" % k)
    T = tangent_space(flavor, w, degree, shape)
    bad = _first_uncovered_slice(T, k, degree)
    if bad is not None:
        return OrbitFailure(bad, "m^%d W is not in the tangent space: slice %d is not covered"
                            % (k, bad))
    g = JetAutomorphism.identity(flavor, R, shape)
    target = w + u
    orders = []
    for step in range(degree + 2):
        r = (target - jet_act(g, w)).truncate(degree)
        orders.append(r.order())
        if r.order() > degree:
            return OrbitLift(g, step, orders, degree)
        lam = T.solve(r, degree)
        if lam is None:
            return OrbitFailure(int(r.order()), "residual left the tangent space", orders)
        g = lam.automorphism().compose(g)
    return OrbitFailure(None, "residual did not clear the truncation", orders)


@dataclass
class DeterminacyReport:
    flavor: str
    bound: int | None
    degree: int
    covered: dict
    message: str


def determinacy_bound(flavor: str, f: SeriesVec, degree: int | None = None,
                      shape=None) -> DeterminacyReport:
    """Least k <= degree with m^k W inside the tangent space at f, slice by slice."""
    R = f.ring
    degree = R.trunc if degree is None else degree
    if all(e.truncate(0) == e for e in f.entries):
        raise DomainError("f must be nonconstant")
    T = tangent_space(flavor, f, degree, shape)
    rank = f.rank
    covered = {}
    for d in range(degree + 1):
        covered[d] = all(T.contains(SeriesVec.basis(R, rank, c, R.monomial(mono)), degree)
                         for mono in R.monomials_of_degree(d) for c in range(rank))
    bound = None
    for k in range(degree, -1, -1):
        if covered[k]:
            bound = k
        else:
            break
    group = {"r0": "R0", "k0": "K0", "matrix": "G_lr x R (unipotent part)"}[flavor]
    if bound is None:
        msg = "no k <= %d has m^k W inside the tangent space" % degree
    else:
        msg = ("m^%d W lies in the tangent space: f is %d-determined for the unipotent group %s, "
               "up to truncation %d" % (bound, bound, group, degree))
    return DeterminacyReport(flavor, bound, degree, covered, msg)


# ---------------------------------------------------------------------------
# sampling, used by the property suites and the experiment scripts

def random_series(ring: Ring, rng: random.Random, low: int, density: float = 0.4,
                  span: int = 3) -> TruncSeries:
    terms = {}
    for mono in ring.monomials():
        if sum(mono) >= low and rng.random() < density:
            c = rng.randint(-span, span)
            if c:
                terms[mono] = Q(c)
    return TruncSeries(ring, terms)


def random_tangent(flavor: str, ring: Ring, shape, rng: random.Random, low: int = 1,
                   density: float = 0.3) -> TangentVector:
    """Random tangent vector whose derivation part lies in m^(low+1) and matrix parts in m^low."""
    a, b = shape
    d = tuple(random_series(ring, rng, low + 1, density) for _ in range(ring.nvars))
    X = Y = None
    if flavor in ("k0", "matrix"):
        X = [[random_series(ring, rng, low, density) for _ in range(a)] for _ in range(a)]
    if flavor == "matrix":
        Y = [[random_series(ring, rng, low, density) for _ in range(b)] for _ in range(b)]
    return TangentVector(flavor, ring, shape, d, X, Y)


def random_automorphism(flavor: str, ring: Ring, shape, rng: random.Random,
                        density: float = 0.3) -> JetAutomorphism:
    a, b = shape
    phi = tuple(ring.var(i) + random_series(ring, rng, 2, density) for i in range(ring.nvars))

    def unip(n):
        return [[(ring.one() if i == j else ring.zero()) + random_series(ring, rng, 1, density)
                 for j in range(n)] for i in range(n)]

    U = unip(a) if flavor in ("k0", "matrix") else None
    V = unip(b) if flavor == "matrix" else None
    return JetAutomorphism(flavor, ring, shape, phi, U, V)


def stabilizer_tangent(T: TangentSpace, lam: TangentVector, j: int) -> TangentVector:
    """lam minus a tangent vector matching pi_j(lam(w)), so that the result
    sends w into W_j and its exponential lies in the j-th stabilizer."""
    if j <= 0:
        return lam
    low = project(lam.apply(T.w), j)
    if low.is_zero():
        return lam
    fix = T.solve(low, j - 1)
    if fix is None:  # cannot happen: lam itself solves it
        raise DomainError("projection not in the tangent space")
    return lam - fix
