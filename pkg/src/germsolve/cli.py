"""
germ-solver: run problem files through the pipeline and print reports.

    germ-solver run problems/newton.germ
    germ-solver certify problems/twovar_k3.germ --format text
    germ-solver solve problems/newton.germ --trunc 12 --seed 7

Exit status 0 means the tasks ran (whatever the mathematical verdict),
1 an internal error, 2 a usage, parse or input-domain error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field

from .certify import KINDS, check_certificate
from .deform import MatrixFamily, PolyFamily, characteristic_coefficients, eigenvalue_deformation, root_deformation
from .jetgroup import determinacy_bound, tangent_space
from .modfilt import FiltrationSpec, IdealT, SubmoduleT
from .parser import ParseError, ProblemSpec, Task, evaluate, parse_problem
from .series import TOP, DomainError, Ring, SeriesVec, StructuralError, TruncSeries, format_series, format_vec
from .solver import EquationSystem, Obstruction, decompose_equation, lift_margin, solve_order_by_order

SCHEMA_VERSION = "1.0"
SUBCOMMANDS = ("run", "solve", "certify", "deform-root", "deform-eig", "determinacy")


@dataclass
class Report:
    task: dict
    verified_degree: int
    verdicts: list = field(default_factory=list)
    ideals: dict = field(default_factory=dict)
    solution: dict | None = None
    obstruction: dict | None = None
    timing_s: float = 0.0
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "task": self.task,
            "verified_degree": self.verified_degree,
            "verdicts": self.verdicts,
            "ideals": self.ideals,
            "solution": self.solution,
            "obstruction": self.obstruction,
            "timing_s": round(self.timing_s, 6),
            "notes": self.notes,
        }


def _order(o):
    return None if o is None or o == TOP else int(o)


def _residual_order(w: SeriesVec, D: int) -> int:
    """Order of the residual; D+1 stands for 'vanishes modulo m^(D+1)'."""
    o = w.truncate(D).order()
    return D + 1 if o == TOP or o > D else int(o)


# ---------------------------------------------------------------------------
# building objects from the problem at a chosen truncation

def build_system(spec: ProblemSpec, trunc: int) -> EquationSystem:
    if not spec.unknowns:
        raise DomainError("this task needs unknowns")
    if not spec.equations:
        raise DomainError("this task needs at least one equation")
    xy = spec.xyring(trunc)
    F = [evaluate(e, xy) for e, _ in spec.equations]
    return decompose_equation(F, spec.xring(trunc), spec.unknowns)


def build_ideal(spec: ProblemSpec, name: str, ring: Ring) -> IdealT | None:
    if name not in spec.ideals:
        return None
    gens, power = spec.ideals[name]
    I = IdealT(ring, [evaluate(e, ring) for e in gens])
    return I ** power if power != 1 else I


def build_submodule(spec: ProblemSpec, name: str, ring: Ring) -> SubmoduleT | None:
    if name not in spec.submodules:
        return None
    rows = spec.submodules[name]
    rank = len(rows[0])
    if any(len(r) != rank for r in rows):
        raise StructuralError("submodule %s: generators of different lengths" % name)
    return SubmoduleT(ring, rank, [SeriesVec(evaluate(e, ring) for e in r) for r in rows])


def build_matrix(spec: ProblemSpec, ring: Ring, name: str | None = None) -> list:
    if not spec.matrices:
        raise DomainError("this task needs a 'matrix' statement")
    name = name if name in spec.matrices else next(iter(spec.matrices))
    return [[evaluate(e, ring) for e in row] for row in spec.matrices[name]]


def _filtration_strings(filt: FiltrationSpec) -> dict:
    return {"J": filt.J.strings(), "V1": [format_vec(g) for g in filt.V1.generators]}


# ---------------------------------------------------------------------------
# tasks

def _cert_verdict(rep) -> dict:
    d = {
        "kind": rep.kind,
        "pass": rep.passed,
        "verified_degree": rep.verified_degree,
        "message": rep.message,
        "witnesses": len(rep.witnesses),
        "reverified": rep.reverify(),
    }
    if rep.kind == "bk":
        d["subcase"] = rep.subcase
        d["subcases"] = {str(k): v for k, v in rep.subcases.items()}
    if not rep.passed:
        d["failing_membership"] = rep.failing
    if rep.filtration is not None:
        d["filtration"] = _filtration_strings(rep.filtration)
        d["v"] = format_vec(rep.v)
    return d


def task_certify(spec, task, D, report, seed):
    system = build_system(spec, D)
    R = system.xring
    kinds = [task.arg] if task.arg else list(KINDS)
    for kind in kinds:
        params = {}
        if kind == "tougeron" and "I" in spec.ideals:
            params["I"] = build_ideal(spec, "I", R)
        if kind == "bk" and "J" in spec.ideals:
            params["J"] = build_ideal(spec, "J", R)
        rep = check_certificate(system, kind, params, D)
        report.verdicts.append(_cert_verdict(rep))
        for name, gens in rep.ideal_strings().items():
            report.ideals.setdefault(name, gens)


def _choose_filtration(spec, system, D, report):
    """File filtration, else the first certificate that fires, else J = m, V1 = R^n."""
    R = system.xring
    J = build_ideal(spec, "J", R)
    V1 = build_submodule(spec, "V1", R)
    if J is not None or V1 is not None:
        if J is None:
            J = IdealT.maximal(R)
        if V1 is None:
            V1 = SubmoduleT.free(R, system.n)
        report.notes.append("filtration taken from the problem file")
        return FiltrationSpec(V1, J)
    for kind in KINDS:
        rep = check_certificate(system, kind, None, D)
        report.verdicts.append(_cert_verdict(rep))
        if rep.passed:
            report.notes.append("filtration emitted by the %s certificate" % kind)
            return rep.filtration
    report.notes.append("no certificate fired; default filtration J = m, V1 = R^n")
    return FiltrationSpec(SubmoduleT.free(R, system.n), IdealT.maximal(R))


def task_solve(spec, task, D, report, seed):
    base = build_system(spec, D)
    margin = lift_margin(base.L)
    W = D + margin
    system = build_system(spec, W) if margin else base
    filt = _choose_filtration(spec, system, W, report)
    rng = random.Random(seed) if seed is not None else None
    trace = solve_order_by_order(system, filt, W, rng=rng)
    report.ideals["filtration_J"] = filt.J.strings()
    report.ideals["filtration_V1"] = [format_vec(g) for g in filt.V1.generators]
    if isinstance(trace, Obstruction):
        report.verdicts.append({"kind": "solve", "pass": False, "verified_degree": D,
                                "message": trace.note or trace.tag})
        report.obstruction = {
            "tag": trace.tag,
            "step": trace.step,
            "degree": _order(trace.degree),
            "residual": format_vec(trace.residual) if trace.residual is not None else None,
            "certifies_nonexistence": trace.certifies_nonexistence,
            "note": trace.note,
            "counterexample": trace.counterexample,
        }
        return
    y = trace.y.truncate(D).in_ring(base.xring)
    res = _residual_order(base.residual(y), D)
    comps = {name: format_series(c) for name, c in zip(spec.unknowns, y.entries)}
    series = comps[spec.unknowns[0]] if len(comps) == 1 else format_vec(y)
    report.solution = {
        "series": series,
        "components": comps,
        "residual_order": res,
        "working_truncation": W,
        "start_level": trace.start_level,
        "quasi_good": trace.quasi_good,
    }
    report.verdicts.append({"kind": "solve", "pass": res > D, "verified_degree": D,
                            "message": "F(x, y) = 0 modulo m^%d" % (D + 1) if res > D
                            else "residual of order %d left" % res})
    if margin:
        report.notes.append("solved at truncation %d so every coefficient of y up to degree %d "
                            "is fixed" % (W, D))


def _poly_family(spec, trunc) -> PolyFamily:
    if len(spec.unknowns) != 1 or len(spec.equations) != 1:
        raise DomainError("deform-root needs one unknown and one equation")
    xy = spec.xyring(trunc)
    F = evaluate(spec.equations[0][0], xy)
    T = spec.xring(trunc)
    deg = max([mono[-1] for mono in F.terms] + [1])
    coeffs = [dict() for _ in range(deg + 1)]
    for mono, c in F.terms.items():
        coeffs[mono[-1]][mono[:-1]] = c
    return PolyFamily([TruncSeries(T, c) for c in coeffs])


def _deform_fill(report, rep, fam_D, D):
    report.verdicts.append({
        "kind": report.task["kind"],
        "pass": rep.verdict == "deforms",
        "verdict": rep.verdict,
        "part1": rep.part1,
        "part2": rep.part2,
        "fired": rep.fired,
        "verified_degree": D,
        "message": rep.message,
        "failing_conditions": rep.failing,
    })
    report.ideals["coefficients"] = rep.coefficients
    if rep.charpoly is not None:
        report.ideals["charpoly"] = rep.charpoly
    if rep.root is not None:
        root = rep.root.in_ring(fam_D.ring)
        report.solution = {"series": format_series(root), "components": {"y": format_series(root)},
                           "residual_order": _residual_order(SeriesVec([fam_D.evaluate(root)]), D)}


def _working(a1: TruncSeries, D: int) -> int:
    return D if a1.is_zero() else D + int(a1.order())


def task_deform_root(spec, task, D, report, seed):
    fam_D = _poly_family(spec, D)
    W = _working(fam_D.coefficients[1], D)
    fam = _poly_family(spec, W)
    rep = root_deformation(fam, D)
    _deform_fill(report, rep, fam_D, D)


def task_deform_eig(spec, task, D, report, seed):
    A_D = MatrixFamily(build_matrix(spec, spec.xring(D), "A"))
    cp = characteristic_coefficients(A_D)
    W = _working(cp[1], D)
    rep = eigenvalue_deformation(MatrixFamily(build_matrix(spec, spec.xring(W), "A")), D)
    _deform_fill(report, rep, PolyFamily(cp), D)


def task_determinacy(spec, task, D, report, seed):
    flavor = task.arg or "r0"
    R = spec.xring(D)
    if spec.unknowns:
        raise DomainError("determinacy takes a map germ f, not unknowns")
    if flavor == "matrix":
        M = build_matrix(spec, R)
        shape = (len(M), len(M[0]))
        f = SeriesVec([e for row in M for e in row])
    else:
        if not spec.equations:
            raise DomainError("determinacy needs the components of f as 'eq' lines")
        f = SeriesVec(evaluate(e, R) for e, _ in spec.equations)
        shape = None
    rep = determinacy_bound(flavor, f, D, shape)
    report.verdicts.append({
        "kind": "determinacy",
        "flavor": flavor,
        "pass": rep.bound is not None,
        "bound": rep.bound,
        "verified_degree": D,
        "covered_slices": [d for d, ok in sorted(rep.covered.items()) if ok],
        "message": rep.message,
    })
    report.ideals["tangent_space"] = tangent_space(flavor, f, D, shape).generator_strings()


TASK_RUNNERS = {
    "solve": task_solve,
    "certify": task_certify,
    "deform-root": task_deform_root,
    "deform-eig": task_deform_eig,
    "determinacy": task_determinacy,
}


def run_task(spec: ProblemSpec, task: Task, trunc: int | None = None, seed: int | None = None,
             source: str | None = None) -> Report:
    D = spec.trunc if trunc is None else trunc
    report = Report({"kind": task.kind, "arg": task.arg, "label": task.label(),
                     "file": source, "trunc": D, "seed": seed}, D)
    t0 = time.perf_counter()
    TASK_RUNNERS[task.kind](spec, task, D, report, seed)
    report.timing_s = time.perf_counter() - t0
    return report


def select_tasks(spec: ProblemSpec, subcommand: str) -> list:
    if subcommand == "run":
        return list(spec.tasks)
    same = [t for t in spec.tasks if t.kind == subcommand]
    return same or [Task(subcommand)]


# ---------------------------------------------------------------------------
# output

def error_document(kind: str, message: str, line=None, column=None) -> dict:
    return {"schema_version": SCHEMA_VERSION, "reports": [],
            "error": {"kind": kind, "message": message, "line": line, "column": column}}


def document(reports) -> dict:
    return {"schema_version": SCHEMA_VERSION, "reports": [r.as_dict() for r in reports],
            "error": None}


def _text(doc: dict) -> str:
    out = []
    if doc["error"]:
        e = doc["error"]
        where = "" if e["line"] is None else " (line %s, column %s)" % (e["line"], e["column"])
        return "error [%s]: %s%s\n" % (e["kind"], e["message"], where)
    for r in doc["reports"]:
        t = r["task"]
        out.append("== %s  (trunc %d, %.3fs)" % (t["label"], t["trunc"], r["timing_s"]))
        for v in r["verdicts"]:
            out.append("  %-12s %s  %s" % (v["kind"], "PASS" if v["pass"] else "FAIL", v.get("message", "")))
            if not v["pass"] and v.get("failing_membership"):
                out.append("      failing: %s" % json.dumps(v["failing_membership"]))
        for name, gens in r["ideals"].items():
            out.append("  %s = <%s>" % (name, ", ".join(gens)))
        if r["solution"]:
            s = r["solution"]
            for name, c in s["components"].items():
                out.append("  %s = %s" % (name, c))
            out.append("  residual order >= %d" % s["residual_order"])
        if r["obstruction"]:
            ob = r["obstruction"]
            out.append("  obstruction %s at step %s, degree %s: %s"
                       % (ob["tag"], ob["step"], ob["degree"], ob["note"]))
        for note in r["notes"]:
            out.append("  note: " + note)
        out.append("  verified to degree %d" % r["verified_degree"])
    return "\n".join(out) + "\n"


def emit_report(doc, fmt: str = "json") -> bytes:
    if isinstance(doc, Report):
        doc = document([doc])
    if fmt == "json":
        return (json.dumps(doc, indent=2) + "\n").encode("utf-8")
    return _text(doc).encode("utf-8")


# ---------------------------------------------------------------------------

def build_argparser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="germ-solver", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("file", help="problem file, or - for stdin")
    ap.add_argument("--trunc", type=int, default=None, help="override the truncation degree")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    ap.add_argument("--seed", type=int, default=None, help="randomize lift tie-breaking")
    return ap


def main(argv=None) -> int:
    args = build_argparser().parse_args(argv)
    out = sys.stdout.buffer

    def fail(code, doc):
        out.write(emit_report(doc, args.format))
        out.flush()
        return code

    try:
        text = sys.stdin.read() if args.file == "-" else open(args.file, encoding="utf-8").read()
    except OSError as exc:
        return fail(2, error_document("usage", str(exc)))
    if args.trunc is not None and args.trunc < 1:
        return fail(2, error_document("usage", "--trunc must be at least 1"))
    try:
        spec = parse_problem(text)
    except ParseError as exc:
        return fail(2, error_document("parse", exc.message, exc.line, exc.column))
    tasks = select_tasks(spec, args.subcommand)
    if not tasks:
        return fail(2, error_document("usage", "the problem file has no task statement"))
    reports = []
    try:
        for task in tasks:
            reports.append(run_task(spec, task, args.trunc, args.seed, args.file))
    except (DomainError, StructuralError) as exc:
        return fail(2, error_document("domain", str(exc)))
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        return fail(1, error_document("internal", "%s: %s" % (type(exc).__name__, exc)))
    out.write(emit_report(document(reports), args.format))
    out.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
