"""
Order-by-order lifting for F(x, y) = u + L y + H(y) = 0 over R = Q[x]/m^(D+1).

Given a filtration V_i = J^(i-1) V1 of R^n, the lift starts from the
solution v of the linear part, L v = -u, and repeatedly corrects
y <- y + z with z in V_(i+n) solving L z = -F(x, y), where i is the
deepest level containing v.  A canonical per-slice choice of z (see
modfilt.graded_image_solve) stands in for a global right inverse of L.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, permutations
from typing import Sequence

from .modfilt import (FiltrationSpec, IdealT, PolyMatrix, SubmoduleT,
                      graded_image_solve, minors)
from .series import (Q, TOP, DomainError, Ring, SeriesVec, StructuralError, TruncSeries,
                     format_series, format_vec, substitute)


@dataclass
class EquationSystem:
    xring: Ring
    unknowns: tuple
    F: tuple  # series in xyring
    u: SeriesVec
    L: PolyMatrix
    H: tuple  # series in xyring, every term of y-degree >= 2

    @property
    def xyring(self) -> Ring:
        return self.F[0].ring

    @property
    def m(self) -> int:
        return self.xring.nvars

    @property
    def n(self) -> int:
        return len(self.unknowns)

    @property
    def p(self) -> int:
        return len(self.F)

    def residual(self, y: SeriesVec, v: SeriesVec | None = None) -> SeriesVec:
        """F(x, y) or, with an explicit parameter v, L(y - v) + H(y)."""
        assign = dict(zip(self.unknowns, y.entries))
        if v is None:
            return SeriesVec(substitute(f, assign, self.xring) for f in self.F)
        hy = SeriesVec(substitute(h, assign, self.xring) for h in self.H)
        return self.L.apply(y - v) + hy

    def H_forms(self) -> dict:
        """y-degree -> per-equation list of (x-coefficient, y-exponent) pairs."""
        mx = self.m
        forms = {}
        for c, h in enumerate(self.H):
            for mono, coef in h.terms.items():
                ey = mono[mx:]
                k = sum(ey)
                forms.setdefault(k, [[] for _ in self.H])[c].append(
                    (self.xring.monomial(mono[:mx], coef), ey))
        return forms

    def is_injective(self) -> bool:
        return linear_part_minor_order(self.L) is not None


def decompose_equation(F: Sequence[TruncSeries], xring: Ring, unknowns: Sequence[str]) -> EquationSystem:
    """Split F by y-degree into u (0), L (1) and H (>= 2)."""
    F = tuple(F)
    if not F:
        raise StructuralError("no equations")
    xy = F[0].ring
    mx = xring.nvars
    if xy.names[:mx] != xring.names or xy.names[mx:] != tuple(unknowns):
        raise StructuralError("equation ring must be x-variables followed by unknowns")
    n = len(unknowns)
    u, Lrows, H = [], [], []
    for f in F:
        if f.ring.trunc != xy.trunc or f.ring.nvars != xy.nvars:
            raise StructuralError("equations must share one ring")
        if f.coeff((0,) * xy.nvars):
            raise DomainError("F(0,0) != 0; shift the expansion point first")
        u_terms, h_terms = {}, {}
        row = [dict() for _ in range(n)]
        for mono, c in f.terms.items():
            ey = mono[mx:]
            k = sum(ey)
            if k == 0:
                u_terms[mono[:mx]] = c
            elif k == 1:
                row[ey.index(1)][mono[:mx]] = c
            else:
                h_terms[mono] = c
        u.append(TruncSeries(xring, u_terms))
        Lrows.append([TruncSeries(xring, r) for r in row])
        H.append(TruncSeries(xy, h_terms))
    return EquationSystem(xring, tuple(unknowns), F, SeriesVec(u), PolyMatrix(Lrows), tuple(H))


def linear_part_minor_order(L: PolyMatrix):
    """Lowest order of a nonzero n x n minor of L, or None if L is not injective.

    Over the domain Q[[x]], L: R^n -> R^p is injective iff some n x n
    minor is nonzero.  If Delta is such a minor of order delta, then
    L z = 0 mod m^(N+1) forces z = 0 mod m^(N+1-delta).
    """
    p, n = L.shape
    if n > p:
        return None
    orders = [d.order() for d in minors(L, n) if not d.is_zero()]
    return min(orders) if orders else None


def lift_margin(L: PolyMatrix) -> int:
    """Extra truncation needed so that coefficients of y up to D are pinned down."""
    best = 0
    for col in L.columns():
        o = col.order()
        if o != TOP:
            best = max(best, int(o))
    return best


# ---------------------------------------------------------------------------
# higher-order check

def _polarize(terms, vecs: Sequence[SeriesVec], xring: Ring) -> TruncSeries:
    """Symmetric multilinear form of sum c(x) y^e evaluated on vecs."""
    k = len(vecs)
    total = xring.zero()
    for coef, ey in terms:
        slots = [j for j, e in enumerate(ey) for _ in range(e)]
        acc = xring.zero()
        for perm in set(permutations(range(k))):
            prod = coef
            for slot, which in zip(slots, perm):
                prod = prod * vecs[which][slot]
                if prod.is_zero():
                    break
            acc = acc + prod
        total = total + acc
    return total * Q(1, math.factorial(k))


@dataclass
class HigherOrderCheck:
    passed: bool
    degree: int
    level: int
    counterexample: dict | None = None

    def __bool__(self):
        return self.passed


def higher_order_target(system: EquationSystem, filt: FiltrationSpec, level: int) -> SubmoduleT:
    Vl = filt.component(level)
    image = SubmoduleT(system.xring, system.p, [system.L.apply(g) for g in Vl.generators],
                       Vl.verified_degree)
    return image.scaled(filt.J).minimalized()


def verify_higher_order(system: EquationSystem, filt: FiltrationSpec, degree: int | None = None,
                        level: int = 1) -> HigherOrderCheck:
    """Check H(V_level) in J * L(V_level) modulo m^(degree+1).

    Each y-degree-k part of H is polarized and evaluated on every
    multiset of k generators of V_level; since J*L(V_level) is a
    submodule this is equivalent to the inclusion on all of V_level.
    """
    if degree is None:
        degree = system.xring.trunc
    Vl = filt.component(level)
    target = higher_order_target(system, filt, level)
    gens = Vl.generators
    for k, per_eq in sorted(system.H_forms().items()):
        for tup in combinations_with_replacement(range(len(gens)), k):
            vecs = [gens[j] for j in tup]
            val = SeriesVec(_polarize(t, vecs, system.xring) if t else system.xring.zero()
                            for t in per_eq)
            mem = target.membership(val, degree)
            if not mem:
                bad = [c for c in range(system.p)
                       if not mem.residual[c].is_zero()]
                return HigherOrderCheck(False, degree, level, {
                    "generators": [format_vec(g) for g in vecs],
                    "generator_indices": list(tup),
                    "y_degree": k,
                    "value": format_vec(val),
                    "failing_components": bad,
                    "obstruction_degree": mem.obstruction_degree,
                    "monomials": sorted({format_series(h) for h in system.H if not h.is_zero()}),
                })
    return HigherOrderCheck(True, degree, level)


# ---------------------------------------------------------------------------
# the lift

@dataclass
class SolutionTrace:
    filtration: FiltrationSpec
    v: SeriesVec
    start_level: int
    iterates: list
    residual_orders: list
    choice_log: list
    target_degree: int
    quasi_good: bool
    forced: bool = False

    @property
    def y(self) -> SeriesVec:
        return self.iterates[-1]

    @property
    def residual_order(self):
        return self.residual_orders[-1]

    def __bool__(self):
        return True


@dataclass
class Obstruction:
    step: int
    residual: SeriesVec | None
    degree: int | None
    tag: str  # lift_failed | higher_order_violated
    certifies_nonexistence: bool
    note: str = ""
    counterexample: dict | None = None
    iterates: list = field(default_factory=list)

    def __bool__(self):
        return False


def start_level(filt: FiltrationSpec, v: SeriesVec, degree: int, cap: int) -> int:
    i = 1
    while i < cap and filt.component(i + 1).contains(v, degree):
        i += 1
    return i


def _check_proper(J: IdealT):
    if any(g.constant_term() for g in J.generators):
        raise DomainError("the filtration ideal J must lie in the maximal ideal")


def solve_order_by_order(system: EquationSystem, filt: FiltrationSpec,
                         target_degree: int | None = None, *, force: bool = False,
                         rng: random.Random | None = None,
                         v: SeriesVec | None = None):
    """Build y^(1), y^(2), ... until F(x, y) = 0 mod m^(target_degree+1).

    Returns a SolutionTrace, or an Obstruction when a lift fails.  With
    `force` the up-front higher-order check is skipped and each step's
    lift serves as the check of the inclusion it needs.  With an explicit
    `v` the equation solved is L(y - v) + H(y) = 0.
    """
    xr = system.xring
    D = xr.trunc if target_degree is None else target_degree
    if D > xr.trunc:
        raise DomainError("target degree exceeds the ring truncation")
    _check_proper(filt.J)
    injective = system.is_injective()
    certifies = injective
    note = ("L is injective, so a failed lift certifies that no solution exists in V1"
            if injective else "obstruction under default choices")
    V1 = filt.component(1)
    if v is None:
        first = graded_image_solve(system.L, -system.u, V1, D, rng)
        if not first:
            return Obstruction(0, first.residual, first.degree, "lift_failed", certifies, note)
        v = first.z
        param = None
    else:
        param = v
    cap = D + 2
    i = start_level(filt, v, D, cap) if not v.is_zero() else 1
    if not force:
        chk = verify_higher_order(system, filt, D, level=i)
        if not chk:
            return Obstruction(0, None, None, "higher_order_violated", False,
                               "H(V_%d) is not contained in J*L(V_%d)" % (i, i),
                               chk.counterexample)
    y = v
    iterates = [y]
    orders = []
    log = []
    for n in range(1, cap + 2):
        w = system.residual(y, param).truncate(D)
        orders.append(w.order())
        if w.order() > D:
            break
        constraint = filt.component(i + n)
        lift = graded_image_solve(system.L, -w, constraint, D, rng)
        if not lift:
            tag = "higher_order_violated" if force else "lift_failed"
            return Obstruction(n, w, lift.degree, tag, certifies, note, iterates=iterates)
        y = y + lift.z
        iterates.append(y)
        log.append([format_series(c) for c in lift.coefficients])
    else:
        w = system.residual(y, param).truncate(D)
        return Obstruction(len(iterates), w, int(w.order()), "lift_failed", certifies,
                           "residual did not descend below the target degree", iterates=iterates)
    quasi = filt.component(i + 1).contains(y - v, D)
    return SolutionTrace(filt, v, i, iterates, orders, log, D, quasi, force)


# ---------------------------------------------------------------------------
# uniqueness

@dataclass
class UniquenessReport:
    applicable: bool
    uniform: bool
    verified_degree: int | None
    steps_checked: int
    first_violation: int | None
    message: str


def _same_filtration(a: FiltrationSpec, b: FiltrationSpec) -> bool:
    return (a is b) or (a.V1.generators == b.V1.generators and a.J.generators == b.J.generators)


def check_uniqueness(t1: SolutionTrace, t2: SolutionTrace, system: EquationSystem) -> UniquenessReport:
    """Eventual uniqueness: y1^(n) - y2^(n) in V_n for every common n."""
    if not _same_filtration(t1.filtration, t2.filtration):
        raise StructuralError("traces use different filtrations")
    delta = linear_part_minor_order(system.L)
    if delta is None:
        return UniquenessReport(False, False, None, 0, None,
                                "uniqueness not applicable: L is not injective")
    deg = min(t1.target_degree, t2.target_degree) - int(delta)
    if deg < 0:
        return UniquenessReport(True, True, deg, 0, None, "truncation too low to compare")
    filt = t1.filtration
    common = min(len(t1.iterates), len(t2.iterates))
    for n in range(1, common + 1):
        diff = t1.iterates[n - 1] - t2.iterates[n - 1]
        if not filt.component(n).contains(diff, deg):
            return UniquenessReport(True, False, deg, n, n,
                                    "iterates differ outside V_%d" % n)
    # the limits must agree as well
    if not filt.component(common).contains(t1.y - t2.y, deg):
        return UniquenessReport(True, False, deg, common, common, "limits differ")
    return UniquenessReport(True, True, deg, common, None,
                            "y1^(n) - y2^(n) lies in V_n for every n, modulo m^(%d)" % (deg + 1))
