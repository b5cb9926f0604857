"""Canonical model source: one declaration per line, minimal parentheses."""

from __future__ import annotations

from .ast import Abs, BinOp, ModelGraph, Neg, Node, Num, Ref

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG, _ATOM = 3, 5


def _prec(e) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _NEG
    return _ATOM


def format_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def format_expr(e) -> str:
    if isinstance(e, Num):
        return format_number(e.value)
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Abs):
        return f"abs({format_expr(e.arg)})"
    if isinstance(e, Neg):
        inner = format_expr(e.operand)
        return "-" + (f"({inner})" if _prec(e.operand) < _NEG else inner)
    p = _PREC[e.op]
    left, right = format_expr(e.left), format_expr(e.right)
    if e.op == "^":
        # right associative; the exponent is parsed as a unary expression
        wrap_left = _prec(e.left) <= p
        wrap_right = _prec(e.right) < _NEG
    else:
        wrap_left = _prec(e.left) < p
        wrap_right = _prec(e.right) <= p
    if wrap_left:
        left = f"({left})"
    if wrap_right:
        right = f"({right})"
    return f"{left} {e.op} {right}"


def format_node(n: Node) -> str:
    if n.kind == "const":
        return f"const {n.name} = {format_expr(n.value)}"
    d = n.distribution
    line = f"{n.kind} {n.name} ~ {d.family}({', '.join(format_expr(a) for a in d.args)})"
    if n.bounds is not None:
        line += f" in [{format_expr(n.bounds[0])}, {format_expr(n.bounds[1])}]"
    return line


def print_canonical(g: ModelGraph) -> str:
    return "".join(format_node(n) + "\n" for n in g.nodes)
