"""
Problem files.

    # the intro example
    vars x;
    unknowns y;
    trunc 8;
    eq y^2 + y*x - x^3;
    ideal J = <x>;
    submodule V1 = [x^2];
    task solve;

Statements end with `;` and `#` starts a comment.  Expressions use
rationals (`3/2`), declared names, `+ - * ^` and parentheses; `^` binds
tighter than `*`, which binds tighter than `+ -`; exponents are integer
literals.  Statements:

    vars NAMES;  unknowns NAMES;  trunc N;  eq EXPR;
    ideal NAME = <EXPR, ...> [^ N];
    submodule NAME = [EXPR, ...], [EXPR, ...];
    matrix NAME = [EXPR, ...], [EXPR, ...];
    task solve | certify[(tougeron|fisher|bk)] | deform-root | deform-eig
         | determinacy(r0|k0|matrix);
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .series import Q, Ring, SeriesVec, TruncSeries

TASKS = ("solve", "certify", "deform-root", "deform-eig", "determinacy")
TASK_ARGS = {
    "certify": ("tougeron", "fisher", "bk"),
    "determinacy": ("r0", "k0", "matrix"),
}


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = "" if line is None else " at line %d, column %d" % (line, column)
        super().__init__(message + where)


# ---------------------------------------------------------------------------
# tokens

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*^(),;=<>\[\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # num | name | op | eof
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    out = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise ParseError("unexpected character %r" % text[pos], line, pos - start + 1)
        kind = mt.lastgroup
        if kind == "nl":
            line += 1
            start = mt.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, mt.group(), line, pos - start + 1))
        pos = mt.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


# ---------------------------------------------------------------------------
# expression trees

@dataclass(frozen=True)
class Num:
    value: Q


@dataclass(frozen=True)
class Name:
    name: str
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str  # + - *
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int


def count_terms(e) -> int:
    """Number of top-level summands."""
    if isinstance(e, BinOp) and e.op in "+-":
        return count_terms(e.left) + count_terms(e.right)
    return 1


def names_in(e) -> set:
    if isinstance(e, Name):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, Neg):
        return names_in(e.arg)
    if isinstance(e, Pow):
        return names_in(e.base)
    return names_in(e.left) | names_in(e.right)


def evaluate(e, ring: Ring) -> TruncSeries:
    if isinstance(e, Num):
        return ring.const(e.value)
    if isinstance(e, Name):
        return ring.var(e.name)
    if isinstance(e, Neg):
        return -evaluate(e.arg, ring)
    if isinstance(e, Pow):
        return evaluate(e.base, ring) ** e.exp
    a, b = evaluate(e.left, ring), evaluate(e.right, ring)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    return a * b


# ---------------------------------------------------------------------------
# the problem

@dataclass
class Task:
    kind: str
    arg: str | None = None
    line: int = 0

    def label(self) -> str:
        return self.kind if self.arg is None else "%s(%s)" % (self.kind, self.arg)


@dataclass
class ProblemSpec:
    variables: tuple = ()
    unknowns: tuple = ()
    trunc: int | None = None
    equations: list = field(default_factory=list)
    ideals: dict = field(default_factory=dict)  # name -> (generator exprs, power)
    submodules: dict = field(default_factory=dict)  # name -> rows of exprs
    matrices: dict = field(default_factory=dict)
    tasks: list = field(default_factory=list)

    def xring(self, trunc: int | None = None) -> Ring:
        return Ring(self.variables, self.trunc if trunc is None else trunc)

    def xyring(self, trunc: int | None = None) -> Ring:
        return Ring(self.variables + self.unknowns, self.trunc if trunc is None else trunc)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        shown = tok.text or "end of input"
        raise ParseError("%s (found %r)" % (msg, shown), tok.line, tok.column)

    def take(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("op", "name"):
            self.error("expected %r" % text)
        return self.take()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            self.error("expected " + what)
        return self.take()

    # expressions

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text == "*":
            self.take()
            node = BinOp("*", node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.take()
            return Neg(self.unary())
        if self.tok.kind == "op" and self.tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            t = self.tok
            if t.kind != "num" or "/" in t.text:
                self.error("exponent must be a non-negative integer literal")
            self.take()
            return Pow(base, int(t.text))
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.take()
            if "/" in t.text:
                p, q = t.text.split("/")
                if int(q) == 0:
                    self.error("zero denominator", t)
                return Num(Q(int(p), int(q)))
            return Num(Q(int(t.text)))
        if t.kind == "name":
            self.take()
            return Name(t.text, t.line, t.column)
        if t.kind == "op" and t.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        self.error("expected a number, a name or '('")

    def expr_list(self, open_: str, close: str) -> list:
        self.expect(open_)
        items = [self.expr()]
        while self.tok.text == ",":
            self.take()
            items.append(self.expr())
        self.expect(close)
        return items

    def rows(self) -> list:
        rows = [self.expr_list("[", "]")]
        while self.tok.text == ",":
            self.take()
            rows.append(self.expr_list("[", "]"))
        return rows

    # statements

    def names_until_semicolon(self) -> list:
        out = []
        while self.tok.kind == "name":
            out.append(self.take().text)
        return out

    def problem(self) -> ProblemSpec:
        spec = ProblemSpec()
        seen_vars = False
        while self.tok.kind != "eof":
            kw = self.expect_kind("name", "a statement keyword")
            k = kw.text
            if k == "vars":
                spec.variables = tuple(self.names_until_semicolon())
                seen_vars = True
            elif k == "unknowns":
                spec.unknowns = tuple(self.names_until_semicolon())
            elif k == "trunc":
                t = self.expect_kind("num", "an integer truncation degree")
                if "/" in t.text:
                    self.error("truncation must be an integer", t)
                spec.trunc = int(t.text)
                if spec.trunc < 1:
                    raise ParseError("truncation must be at least 1", t.line, t.column)
            elif k == "eq":
                spec.equations.append((self.expr(), kw.line))
            elif k == "ideal":
                name = self.expect_kind("name", "an ideal name").text
                self.expect("=")
                gens = self.expr_list("<", ">")
                power = 1
                if self.tok.text == "^":
                    self.take()
                    t = self.expect_kind("num", "an integer power")
                    power = int(t.text)
                spec.ideals[name] = (gens, power)
            elif k in ("submodule", "matrix"):
                name = self.expect_kind("name", "a name").text
                self.expect("=")
                target = spec.submodules if k == "submodule" else spec.matrices
                target[name] = self.rows()
            elif k == "task":
                parts = [self.expect_kind("name", "a task name").text]
                while self.tok.text == "-":
                    self.take()
                    parts.append(self.expect_kind("name", "a task name").text)
                kind = "-".join(parts)
                if kind not in TASKS:
                    raise ParseError("unknown task %r" % kind, kw.line, kw.column)
                arg = None
                if self.tok.text == "(":
                    self.take()
                    a = self.expect_kind("name", "a task argument")
                    arg = a.text
                    if arg not in TASK_ARGS.get(kind, ()):
                        raise ParseError("task %s does not take %r" % (kind, arg), a.line, a.column)
                    self.expect(")")
                spec.tasks.append(Task(kind, arg, kw.line))
            else:
                raise ParseError("unknown statement %r" % k, kw.line, kw.column)
            self.expect(";")
        if not seen_vars:
            raise ParseError("missing 'vars' statement")
        if spec.trunc is None:
            raise ParseError("missing 'trunc' statement")
        return spec


def _check_names(spec: ProblemSpec):
    declared = spec.variables + spec.unknowns
    if len(set(declared)) != len(declared):
        raise ParseError("variable and unknown names must be distinct")
    ok = set(declared)

    def visit(e):
        if isinstance(e, Name):
            if e.name not in ok:
                raise ParseError("undeclared name %r" % e.name, e.line, e.column)
        elif isinstance(e, (Neg,)):
            visit(e.arg)
        elif isinstance(e, Pow):
            visit(e.base)
        elif isinstance(e, BinOp):
            visit(e.left)
            visit(e.right)

    for e, _ in spec.equations:
        visit(e)
    xs = set(spec.variables)
    for group in (list(spec.ideals.values()), ):
        for gens, _ in group:
            for e in gens:
                visit(e)
                bad = names_in(e) - xs
                if bad:
                    raise ParseError("ideal generators may only use ring variables, found %s"
                                     % ", ".join(sorted(bad)))
    for rows in list(spec.submodules.values()) + list(spec.matrices.values()):
        for row in rows:
            for e in row:
                visit(e)
                bad = names_in(e) - xs
                if bad:
                    raise ParseError("entries may only use ring variables, found %s"
                                     % ", ".join(sorted(bad)))


def parse_problem(text: str) -> ProblemSpec:
    spec = _Parser(text).problem()
    _check_names(spec)
    return spec


def parse_expression(text: str):
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.error("trailing input")
    return e


def parse_series(text: str, ring: Ring) -> TruncSeries:
    """Inverse of format_series."""
    return evaluate(parse_expression(text), ring)


def parse_vector(text: str, ring: Ring) -> SeriesVec:
    """Inverse of format_vec: '[a, b]'."""
    p = _Parser(text)
    items = p.expr_list("[", "]")
    if p.tok.kind != "eof":
        p.error("trailing input")
    return SeriesVec(evaluate(e, ring) for e in items)
