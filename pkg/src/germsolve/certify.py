"""
Sufficient solvability certificates, checked by exact ideal membership.

  tougeron   u in I * I_max(L)^2 * R^p            (needs p <= n)
  fisher     u in m * a_L * Im(L)
  bk         J^2 inside J * a_L (or J^2 W inside m J L(V)), with the
             initial lift v in J V or m J V depending on the sub-case

Here u = F(x, 0), L = F'_y(x, 0), a_L = ann(coker L).  A pass hands the
solver a filtration on which the higher-order check provably holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

from .modfilt import (FiltrationSpec, IdealT, Membership, SubmoduleT, ann_coker,
                      graded_image_solve, maximal_minors)
from .series import DomainError, SeriesVec, format_vec, mdeg, mono_divides, mono_key, mono_mul
from .solver import EquationSystem

KINDS = ("tougeron", "fisher", "bk")

# wording of the three bk sub-cases, in the order they are tried
BK_CASES = {
    1: "J^2 W in m J L(V), v in J V",
    2: "J^2 in J a_L, v in m J V",
    3: "J^2 in J a_L, a_L W in m L(V), v in J V",
}


@dataclass
class Witness:
    """target = sum coefficients[j] * generators[j] mod m^(degree+1)."""

    label: str
    target: SeriesVec
    generators: tuple
    coefficients: list
    degree: int

    def reexpand(self) -> bool:
        acc = SeriesVec.zero(self.target.ring, self.target.rank)
        for c, g in zip(self.coefficients, self.generators):
            acc = acc + g.scale(c)
        return (acc - self.target).truncate(self.degree).is_zero()


@dataclass
class CertificateReport:
    kind: str
    passed: bool
    verified_degree: int
    ideals: dict = field(default_factory=dict)
    filtration: FiltrationSpec | None = None
    v: SeriesVec | None = None
    subcase: int | None = None
    subcases: dict = field(default_factory=dict)
    failing: dict | None = None
    witnesses: list = field(default_factory=list)
    message: str = ""

    def __bool__(self):
        return self.passed

    def reverify(self) -> bool:
        return all(w.reexpand() for w in self.witnesses)

    def ideal_strings(self) -> dict:
        out = {}
        for name, obj in self.ideals.items():
            if isinstance(obj, IdealT):
                out[name] = obj.strings()
            else:
                out[name] = [format_vec(g) for g in obj.generators]
        return out


def _member(report: CertificateReport, label: str, target: SeriesVec, module: SubmoduleT,
            degree: int) -> Membership:
    mem = module.membership(target, degree)
    if mem:
        report.witnesses.append(Witness(label, target, module.generators, mem.witness, degree))
    return mem


def _failure(label: str, target: SeriesVec, mem: Membership) -> dict:
    return {
        "inclusion": label,
        "element": format_vec(target),
        "obstruction_degree": mem.obstruction_degree,
        "residual": format_vec(mem.residual) if mem.residual is not None else None,
    }


def _contains_module(report, label, big: SubmoduleT, small: SubmoduleT, degree: int):
    """Record witnesses for small in big; return the first failing generator or None."""
    for g in small.generators:
        mem = _member(report, label, g, big, degree)
        if not mem:
            return _failure(label, g, mem)
    return None


def _lift_into(system: EquationSystem, constraint: SubmoduleT, degree: int):
    return graded_image_solve(system.L, -system.u, constraint, degree)


def _emit(system, report, V1: SubmoduleT, degree: int):
    """Initial lift inside V1 and the filtration V_i = m^(i-1) V1."""
    lift = _lift_into(system, V1, degree)
    if not lift:
        return lift
    report.v = lift.z
    report.filtration = FiltrationSpec(V1, IdealT.maximal(system.xring))
    return lift


def check_certificate(system: EquationSystem, kind: str, params: dict | None = None,
                      degree: int | None = None) -> CertificateReport:
    """Evaluate one certificate; every verdict holds modulo m^(degree+1)."""
    if kind not in KINDS:
        raise DomainError("unknown certificate kind %r" % kind)
    params = dict(params or {})
    R = system.xring
    D = R.trunc if degree is None else degree
    if D > R.trunc:
        raise DomainError("degree exceeds the ring truncation")
    m = IdealT.maximal(R)
    n = system.n
    aL = ann_coker(system.L, D)
    img = system.L.image()
    rep = CertificateReport(kind, False, D)
    rep.ideals["m"] = m
    rep.ideals["a_L"] = aL
    rep.ideals["Im_L"] = img
    u = system.u
    if kind == "tougeron":
        return _tougeron(system, rep, params, aL, m, D)
    if kind == "fisher":
        target = img.scaled(aL).scaled(m)
        rep.ideals["m_aL_ImL"] = target
        mem = _member(rep, "u in m*a_L*Im(L)", u, target, D)
        if not mem:
            rep.failing = _failure("u in m*a_L*Im(L)", u, mem)
            rep.message = "F(x,0) is not in m*a_L*Im(L)"
            return rep
        V1 = aL.times_module(n).scaled(m)
        if not _emit(system, rep, V1, D):
            rep.message = "membership holds but the lift into m*a_L*V failed"
            return rep
        rep.passed = True
        rep.message = "F(x,0) in m*a_L*Im(L): a solution exists with y in m*a_L*R^n"
        return rep
    return _bk(system, rep, params, aL, img, m, D)


def _tougeron(system, rep, params, aL, m, D):
    p, n = system.p, system.n
    if p > n:
        rep.failing = {"inclusion": "shape", "element": None, "obstruction_degree": None,
                       "residual": None}
        rep.message = "inapplicable: p = %d equations exceed n = %d unknowns" % (p, n)
        return rep
    I = params.get("I") or m
    if any(g.constant_term() for g in I.generators):
        raise DomainError("the ideal I must be proper")
    Imax = maximal_minors(system.L)
    rep.ideals["I"] = I
    rep.ideals["I_max"] = Imax
    target = (I * Imax * Imax).times_module(p)
    rep.ideals["I_Imax2"] = target
    label = "u in I*I_max^2*R^p"
    mem = _member(rep, label, system.u, target, D)
    if not mem:
        rep.failing = _failure(label, system.u, mem)
        rep.message = "F(x,0) is not in I*(I_max F'_y(x,0))^2"
        return rep
    # I_max is inside a_L, so the lift lands in m*a_L*V
    V1 = aL.times_module(n).scaled(m)
    if not _emit(system, rep, V1, D):
        rep.message = "membership holds but the lift into m*a_L*V failed"
        return rep
    rep.passed = True
    rep.message = "F(x,0) in I*I_max^2*R^p: a solution exists with y in I*R^n"
    return rep


def _bk(system, rep, params, aL, img, m, D):
    p, n = system.p, system.n
    J = params.get("J")
    if J is None:
        found = search_maximal_J(aL, params.get("degree_bound"))
        best = None
        for cand in found.ideals:
            sub = check_certificate(system, "bk", {"J": cand}, D)
            for k, other in enumerate(found.ideals, 1):
                sub.ideals["J_candidate_%d" % k] = other
            if sub.passed:
                return sub
            best = best or sub
        if best is None:
            rep.message = "no candidate J"
            return rep
        return best
    if any(g.constant_term() for g in J.generators):
        raise DomainError("J must lie in the maximal ideal")
    rep.ideals["J"] = J
    J2 = (J * J).minimalized(D)
    JaL = (J * aL).minimalized(D)
    rep.ideals["J^2"] = J2
    rep.ideals["J*a_L"] = JaL
    mJL = img.scaled(J).scaled(m)
    rep.ideals["m*J*L(V)"] = mJL
    JV = J.times_module(n)
    mJV = JV.scaled(m)

    ideal_ok = _contains_module(rep, "J^2 in J*a_L", JaL.as_submodule(), J2.as_submodule(), D)
    rep.subcases = {}
    # part 1
    f1 = _contains_module(rep, "J^2 W in m*J*L(V)", mJL, J2.times_module(p), D)
    rep.subcases[1] = f1 is None
    # part 3 needs a_L W in m L(V)
    f3 = None
    if ideal_ok is None:
        f3 = _contains_module(rep, "a_L W in m*L(V)", img.scaled(m), aL.times_module(p), D)
    tries = []
    if f1 is None:
        tries.append((1, JV))
    if ideal_ok is None:
        tries.append((2, mJV))
        if f3 is None:
            tries.append((3, JV))
    rep.subcases[2] = ideal_ok is None
    rep.subcases[3] = ideal_ok is None and f3 is None
    lift_fail = None
    for case, constraint in sorted(tries):
        lift = _lift_into(system, constraint, D)
        if lift:
            V1 = constraint
            rep.v = lift.z
            rep.filtration = FiltrationSpec(V1, m)
            rep.subcase = case
            rep.passed = True
            rep.message = "bk part %d fired (%s): a solution exists" % (case, BK_CASES[case])
            rep.witnesses.append(Witness("L v = -u", -system.u, tuple(
                SeriesVec([system.L.rows[i][j] for i in range(p)]) for j in range(n)),
                list(lift.z.entries), D))
            return rep
        lift_fail = (case, lift)
    if lift_fail is not None:
        case, lift = lift_fail
        where = "m*J*V" if case == 2 else "J*V"
        rep.failing = {"inclusion": "v in " + where, "element": format_vec(-system.u),
                       "obstruction_degree": lift.degree,
                       "residual": format_vec(lift.residual)}
        rep.message = "the ideal conditions hold but L v = -u has no solution v in " + where
    else:
        rep.failing = ideal_ok or f1
        rep.message = "neither J^2 in J*a_L nor J^2 W in m*J*L(V) holds"
    return rep


# ---------------------------------------------------------------------------
# maximal J with J^2 in J * a_L

@dataclass
class JSearch:
    ideals: list
    degree_bound: int
    verified_degree: int
    skipped: bool = False
    note: str = ""

    def __iter__(self):
        return iter(self.ideals)

    def __len__(self):
        return len(self.ideals)


def _divisible_by_product(target, js, alist) -> bool:
    return any(mono_divides(mono_mul(j, a), target) for j in js for a in alist)


def _feasible(antichain, agens) -> bool:
    gens = list(antichain) + list(agens)
    for g, h in combinations_with_replacement(antichain, 2):
        if not _divisible_by_product(mono_mul(g, h), gens, agens):
            return False
    return True


def search_maximal_J(aL: IdealT, degree_bound: int | None = None) -> JSearch:
    """All inclusion-maximal monomial J, generated in degree <= degree_bound,
    with a_L inside J and J^2 inside J * a_L.

    Any J with J^2 in J a_L has j^2 in a_L for each of its elements, so
    the extra generators come from the monomials g outside a_L with g^2
    in a_L.  Such a J is fixed by the antichain of its extra minimal
    generators; antichains are enumerated depth first and each is tested
    by exact divisibility of the pairwise products.
    """
    R = aL.ring
    if aL.is_zero():
        raise DomainError("a_L is zero; no J can satisfy J^2 in J*a_L")
    agens = [g.leading_monomial() for g in aL.generators]
    top = max(mdeg(a) for a in agens) if aL.is_monomial() else None
    if degree_bound is None:
        degree_bound = top if top is not None else max(g.order() for g in aL.generators)
    # the divisibility test below is exact, so nothing is lost to truncation
    vd = R.trunc
    if not aL.is_monomial():
        return JSearch([aL], degree_bound, vd, True, "a_L is not monomial; search skipped, J = a_L")
    if degree_bound < top:
        raise DomainError("degree bound %d is below the degree %d of a_L's generators"
                          % (degree_bound, top))

    def in_aL(mono):
        return any(mono_divides(a, mono) for a in agens)

    cands = [mu for mu in R.monomials(degree_bound)
             if not in_aL(mu) and in_aL(mono_mul(mu, mu))]
    cands.sort(key=mono_key)

    def comparable(a, b):
        return mono_divides(a, b) or mono_divides(b, a)

    found = []

    def dfs(start, chain):
        if _feasible(chain, agens):
            found.append(tuple(chain))
        for k in range(start, len(cands)):
            c = cands[k]
            if all(not comparable(c, g) for g in chain):
                chain.append(c)
                dfs(k + 1, chain)
                chain.pop()

    dfs(0, [])

    def upset(chain):
        return frozenset(mu for mu in cands if any(mono_divides(g, mu) for g in chain))

    sets = [(upset(ch), ch) for ch in found]
    maximal = []
    for s, ch in sets:
        if not any(s < t for t, _ in sets):
            if all(s != t for t, _ in maximal):
                maximal.append((s, ch))
    out = []
    for _, ch in maximal:
        J = IdealT(R, [R.monomial(g) for g in ch] + list(aL.generators), vd)
        out.append(J.minimalized(vd))
    return JSearch(out, degree_bound, vd)


def j_condition(J: IdealT, aL: IdealT, degree: int) -> bool:
    """J^2 in J * a_L modulo m^(degree+1)."""
    return (J * aL).contains_ideal(J * J, degree)
