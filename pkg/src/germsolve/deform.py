"""
Does the root y = 0 of p(y) = sum a_i(t) y^i survive a deformation in t?

Two sufficient tests, both ideal memberships in T = Q[t]/m^(D+1), with
m the maximal ideal generated by the deformation variables:

  part 1   a0 in m * (a1^2)
  part 2   a0 in m * (a1)  and  a_i a0^(i-1) in m * (a1^i) for i >= 2

On a pass the root is built by the order-by-order solver with v = -a0/a1,
V1 = (v) and J = m.  A failed test says nothing about the root itself.
Matrix eigenvalues go through the characteristic polynomial, whose
coefficients are traces of exterior powers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .modfilt import FiltrationSpec, IdealT, SubmoduleT, determinant, graded_image_solve
from .series import DomainError, Ring, StructuralError, TruncSeries, format_series
from .solver import Obstruction, decompose_equation, solve_order_by_order

MAX_COMPOUND = 6  # largest matrix size for explicit exterior powers

NO_CERTIFICATE = "no sufficient condition fired"


@dataclass
class PolyFamily:
    """p(y) = sum coefficients[i] * y^i; coefficients are exact polynomials in t."""

    coefficients: tuple

    def __post_init__(self):
        self.coefficients = tuple(self.coefficients)
        if len(self.coefficients) < 2:
            raise StructuralError("a family needs at least a0 and a1")
        rings = {(c.ring.names, c.ring.trunc) for c in self.coefficients}
        if len(rings) != 1:
            raise StructuralError("coefficients must share one ring")
        if self.coefficients[0].constant_term():
            raise DomainError("a0(0) != 0: shift y so the studied root is y = 0")

    @property
    def ring(self) -> Ring:
        return self.coefficients[0].ring

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def evaluate(self, y: TruncSeries) -> TruncSeries:
        acc = self.ring.zero()
        power = self.ring.one()
        for a in self.coefficients:
            acc = acc + a * power
            power = power * y
        return acc


@dataclass
class MatrixFamily:
    entries: tuple  # rows of TruncSeries

    def __post_init__(self):
        self.entries = tuple(tuple(r) for r in self.entries)
        n = len(self.entries)
        if n == 0 or any(len(r) != n for r in self.entries):
            raise StructuralError("matrix family must be square")
        if determinant(self.entries).constant_term():
            raise DomainError("det(A_0) != 0: shift so the studied eigenvalue is zero")

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def ring(self) -> Ring:
        return self.entries[0][0].ring


@dataclass
class DeformReport:
    verdict: str  # deforms | no_certificate | inapplicable
    part1: bool | None
    part2: bool | None
    fired: str | None
    root: TruncSeries | None
    target_degree: int
    coefficients: list
    message: str
    failing: list = field(default_factory=list)
    v: TruncSeries | None = None
    filtration: FiltrationSpec | None = None
    residual_order: object = None
    bullet: str | None = None
    charpoly: list | None = None

    def __bool__(self):
        return self.verdict == "deforms"


def _in(f: TruncSeries, I: IdealT, degree: int) -> bool:
    return I.contains(f, degree)


def _unknown_name(ring: Ring) -> str:
    name = "y"
    while name in ring.names:
        name += "_"
    return name


def root_deformation(fam: PolyFamily, target_degree: int | None = None) -> DeformReport:
    T = fam.ring
    a = fam.coefficients
    a0, a1 = a[0], a[1]
    coeff_strings = [format_series(c) for c in a]
    if a1.is_zero():
        D = T.trunc if target_degree is None else target_degree
        return DeformReport("inapplicable", None, None, None, None, D, coeff_strings,
                            "a1 vanishes to the working truncation: conditions inapplicable; "
                            + NO_CERTIFICATE)
    shift = int(a1.order())
    if target_degree is None:
        target_degree = T.trunc - shift
    W = target_degree + shift
    if target_degree < 0 or W > T.trunc:
        raise DomainError("target degree %d needs the family at truncation >= %d"
                          % (target_degree, W))
    m = IdealT.maximal(T)
    ma1 = m * IdealT(T, [a1])
    failing = []
    part1 = _in(a0, m * IdealT(T, [a1 * a1]), W)
    if not part1:
        failing.append("a0 not in (t*a1^2)")
    part2 = _in(a0, ma1, W)
    if not part2:
        failing.append("a0 not in (t*a1)")
    else:
        a1i = a1
        a0i = T.one()
        for i in range(2, fam.degree + 1):
            a1i = a1i * a1
            a0i = a0i * a0
            if not _in(a[i] * a0i, m * IdealT(T, [a1i]), W):
                part2 = False
                failing.append("a%d*a0^%d not in t*a1^%d" % (i, i - 1, i))
                break
    if not (part1 or part2):
        return DeformReport("no_certificate", part1, part2, None, None, target_degree,
                            coeff_strings, NO_CERTIFICATE + "; this does not rule out a deformed root",
                            failing)
    fired = "part1" if part1 else "part2"
    # the equation a0 + a1 y + ... in T[y]
    yname = _unknown_name(T)
    TY = Ring(T.names + (yname,), W)
    y = TY.var(yname)
    F = TY.zero()
    yp = TY.one()
    for c in a:
        F = F + TruncSeries(TY, {mono + (0,): q for mono, q in c.terms.items()}) * yp
        yp = yp * y
    system = decompose_equation([F], T, [yname])
    first = graded_image_solve(system.L, -system.u, None, W)
    if not first:
        return DeformReport("no_certificate", part1, part2, fired, None, target_degree,
                            coeff_strings, "a1 v = -a0 has no solution at the working truncation",
                            failing)
    v = first.z
    V1 = SubmoduleT(T, 1, [v] if not v.is_zero() else [])
    filt = FiltrationSpec(V1, m)
    trace = solve_order_by_order(system, filt, W, v=None)
    if isinstance(trace, Obstruction):
        return DeformReport("no_certificate", part1, part2, fired, None, target_degree,
                            coeff_strings, "certificate passed but the lift stalled: %s (%s)"
                            % (trace.tag, trace.note), failing, v[0], filt)
    root = trace.y[0].truncate(target_degree)
    return DeformReport("deforms", part1, part2, fired, root, target_degree, coeff_strings,
                        "%s holds: the root y = 0 deforms with t" % fired.replace("part", "part "),
                        failing, v[0], filt, trace.residual_order)


# ---------------------------------------------------------------------------
# eigenvalues

def exterior_power(A, k: int) -> list:
    """k-th compound matrix: k x k minors indexed by k-subsets in lex order."""
    n = len(A)
    if n > MAX_COMPOUND:
        raise DomainError("exterior powers are assembled only for n <= %d" % MAX_COMPOUND)
    subsets = list(combinations(range(n), k))
    return [[determinant([[A[i][j] for j in cs] for i in rs]) for cs in subsets] for rs in subsets]


def compound_trace(A, k: int) -> TruncSeries:
    ring = A[0][0].ring
    if k == 0:
        return ring.one()
    C = exterior_power(A, k)
    acc = ring.zero()
    for i in range(len(C)):
        acc = acc + C[i][i]
    return acc


def characteristic_coefficients(fam: MatrixFamily) -> list:
    """a_i with det(A - y I) = sum a_i y^i, a_i = (-1)^i trace(wedge^(n-i) A)."""
    n = fam.size
    out = []
    for i in range(n + 1):
        c = compound_trace(fam.entries, n - i)
        out.append(c if i % 2 == 0 else -c)
    return out


def characteristic_direct(fam: MatrixFamily) -> list:
    """Same coefficients by expanding det(A - y I) in T[y]; the cross-check."""
    T = fam.ring
    n = fam.size
    yname = _unknown_name(T)
    TY = Ring(T.names + (yname,), T.trunc + n)
    y = TY.var(yname)
    rows = []
    for i, r in enumerate(fam.entries):
        row = []
        for j, c in enumerate(r):
            e = TruncSeries(TY, {mono + (0,): q for mono, q in c.terms.items()})
            row.append(e - y if i == j else e)
        rows.append(row)
    det = determinant(rows)
    coeffs = [dict() for _ in range(n + 1)]
    for mono, q in det.terms.items():
        if sum(mono[:-1]) <= T.trunc:
            coeffs[mono[-1]][mono[:-1]] = q
    return [TruncSeries(T, c) for c in coeffs]


def eigenvalue_deformation(fam: MatrixFamily, target_degree: int | None = None) -> DeformReport:
    coeffs = characteristic_coefficients(fam)
    rep = root_deformation(PolyFamily(coeffs), target_degree)
    rep.charpoly = [format_series(c) for c in coeffs]
    if rep.fired == "part1":
        rep.bullet = "det(A) in (t*trace(adj A)^2)"
    elif rep.fired == "part2":
        rep.bullet = "det(A) in (t*trace(adj A)) with the higher coefficient conditions"
    if rep.verdict == "deforms":
        rep.message = "the zero eigenvalue deforms: " + rep.bullet
    return rep
