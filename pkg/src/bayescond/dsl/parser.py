"""Line-oriented parser and validator for ``.bmod`` model files.

Grammar, one statement per line, ``#`` starts a comment::

    const NAME = expr
    param NAME ~ family(expr, ...) [in [expr, expr]]
    data  NAME ~ family(expr, ...)

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?          # right associative
    atom  := NUMBER | NAME | 'abs' '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import math
import re

from ..errors import (
    CycleDetected,
    DuplicateName,
    InvalidDependency,
    ParseError,
    UndefinedReference,
    UnknownDistribution,
)
from .ast import Abs, BinOp, Distribution, ModelGraph, Neg, Node, Num, Ref, references
from .families import FAMILIES

KEYWORDS = {"const", "param", "data", "in", "abs"}
KINDS = ("const", "param", "data")

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),=~\[\]])
""", re.VERBOSE)

# which kinds each kind may reference
ALLOWED_PARENTS = {
    "const": {"const"},
    "param": {"const", "param"},
    "data": {"const", "param"},
}


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(line: str, lineno: int) -> list[Token]:
    out, pos = [], 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m is None:
            raise ParseError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), lineno, pos + 1))
        pos = m.end()
    out.append(Token("eol", "", lineno, len(line) + 1))
    return out


class _LineParser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        found = "end of line" if tok.kind == "eol" else repr(tok.text)
        return ParseError(f"{msg}, found {found}", tok.line, tok.col)

    def take(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind == "eol":
            raise self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def name(self, what: str) -> Token:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            raise self.error(f"expected {what}")
        self.i += 1
        return t

    # expressions

    def expr(self):
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok
            self.i += 1
            left = BinOp(op.text, left, self.term(), (op.line, op.col))
        return left

    def term(self):
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok
            self.i += 1
            left = BinOp(op.text, left, self.unary(), (op.line, op.col))
        return left

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            op = self.tok
            self.i += 1
            return Neg(self.unary(), (op.line, op.col))
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            op = self.tok
            self.i += 1
            return BinOp("^", base, self.unary(), (op.line, op.col))
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            value = float(t.text)
            if not math.isfinite(value):
                raise ParseError(f"number {t.text} is not finite", t.line, t.col)
            self.i += 1
            return Num(value, (t.line, t.col))
        if t.kind == "name" and t.text == "abs":
            self.i += 1
            self.take("(")
            inner = self.expr()
            self.take(")")
            return Abs(inner, (t.line, t.col))
        if t.kind == "name" and t.text not in KEYWORDS:
            self.i += 1
            if self.tok.kind == "op" and self.tok.text == "(":
                raise ParseError(f"{t.text!r} is not a function; only abs(...) may be called",
                                 t.line, t.col)
            return Ref(t.text, (t.line, t.col))
        if self.accept("("):
            inner = self.expr()
            self.take(")")
            return inner
        raise self.error("expected a number, a name, abs(...) or '('")

    # statements

    def statement(self) -> Node:
        kw = self.tok
        if kw.kind != "name" or kw.text not in KINDS:
            raise self.error("expected 'const', 'param' or 'data'")
        self.i += 1
        name = self.name("a node name")
        span = (kw.line, kw.col)
        if kw.text == "const":
            self.take("=")
            node = Node(name.text, "const", value=self.expr(), span=span)
        else:
            self.take("~")
            fam = self.tok
            if fam.kind != "name":
                raise self.error("expected a distribution family")
            if fam.text not in FAMILIES:
                raise UnknownDistribution(
                    f"unknown distribution {fam.text!r}; known: {', '.join(FAMILIES)}", fam.line, fam.col)
            self.i += 1
            self.take("(")
            args = []
            if not (self.tok.kind == "op" and self.tok.text == ")"):
                args.append(self.expr())
                while self.accept(","):
                    args.append(self.expr())
            self.take(")")
            want = FAMILIES[fam.text].params
            if len(args) != len(want):
                raise ParseError(f"{fam.text} takes {len(want)} argument(s) ({', '.join(want)}), "
                                 f"got {len(args)}", fam.line, fam.col)
            bounds = None
            if self.tok.kind == "name" and self.tok.text == "in":
                if kw.text != "param":
                    raise self.error("bounds are only allowed on param nodes")
                self.i += 1
                self.take("[")
                lo = self.expr()
                self.take(",")
                hi = self.expr()
                self.take("]")
                bounds = (lo, hi)
            dist = Distribution(fam.text, tuple(args), (fam.line, fam.col))
            node = Node(name.text, kw.text, distribution=dist, bounds=bounds, span=span)
        if self.tok.kind != "eol":
            raise self.error("expected end of line")
        return node


def parse_expr(text: str, lineno: int = 1):
    p = _LineParser(tokenize(text, lineno))
    e = p.expr()
    if p.tok.kind != "eol":
        raise p.error("expected end of expression")
    return e


def parse(text: str) -> ModelGraph:
    """Parse and validate model source; raises a positioned ``ModelError`` on failure."""
    nodes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = tokenize(line, lineno)
        if toks[0].kind == "eol":
            continue
        nodes.append(_LineParser(toks).statement())
    if not nodes:
        raise ParseError("no nodes", 1, 1)
    g = ModelGraph(tuple(nodes))
    validate(g)
    return g


def _find_cycle(g: ModelGraph):
    parents = {n.name: n.parents() for n in g.nodes}
    state: dict[str, int] = {}
    stack: list[str] = []

    def visit(u):
        state[u] = 1
        stack.append(u)
        for p in parents[u]:
            if state.get(p) == 1:
                return stack[stack.index(p):] + [p]
            if p not in state:
                found = visit(p)
                if found:
                    return found
        stack.pop()
        state[u] = 2
        return None

    for n in g.nodes:
        if n.name not in state:
            found = visit(n.name)
            if found:
                # report along the direction of dependency (parent -> child)
                return list(reversed(found))
    return None


def validate(g: ModelGraph) -> None:
    seen: dict[str, Node] = {}
    for n in g.nodes:
        if n.name in seen:
            first = seen[n.name].span
            raise DuplicateName(f"{n.name!r} is already declared at line {first[0]}",
                                *n.span, node=n.name)
        seen[n.name] = n
    for n in g.nodes:
        for e in n.expressions():
            for r in references(e):
                if r.name not in seen:
                    raise UndefinedReference(f"{r.name!r} is not declared", *r.span, node=n.name)
                pk = seen[r.name].kind
                if r.name != n.name and pk not in ALLOWED_PARENTS[n.kind]:
                    raise InvalidDependency(
                        f"{n.kind} node {n.name!r} may not depend on {pk} node {r.name!r}",
                        *r.span, node=n.name)
    cycle = _find_cycle(g)
    if cycle:
        start = seen[cycle[0]]
        raise CycleDetected("dependency cycle " + " -> ".join(cycle), *start.span, path=tuple(cycle))
