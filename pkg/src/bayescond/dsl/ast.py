"""Syntax tree for model files.

Every node carries a source ``span`` (line, column), excluded from equality so
that a re-parsed canonical print compares equal to the original graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

Span = tuple[int, int]


@dataclass(frozen=True)
class Num:
    value: float
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Ref:
    name: str
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Abs:
    arg: "Expr"
    span: Span = field(default=(0, 0), compare=False)


Expr = Num | Ref | Neg | BinOp | Abs


def references(e: Expr) -> list[Ref]:
    """All node references in ``e``, left to right."""
    if isinstance(e, Ref):
        return [e]
    if isinstance(e, Num):
        return []
    if isinstance(e, (Neg, Abs)):
        return references(e.operand if isinstance(e, Neg) else e.arg)
    return references(e.left) + references(e.right)


@dataclass(frozen=True)
class Distribution:
    family: str
    args: tuple
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Node:
    """One declaration.

    ``const`` nodes carry ``value``; ``param`` and ``data`` nodes carry a
    ``distribution`` and, for params, optional ``bounds`` (lo, hi) expressions.
    """

    name: str
    kind: str  # const | param | data
    distribution: Distribution | None = None
    value: Expr | None = None
    bounds: tuple | None = None
    span: Span = field(default=(0, 0), compare=False)

    def expressions(self) -> list:
        out = []
        if self.value is not None:
            out.append(self.value)
        if self.distribution is not None:
            out.extend(self.distribution.args)
        if self.bounds is not None:
            out.extend(self.bounds)
        return out

    def parents(self) -> list[str]:
        seen = []
        for e in self.expressions():
            for r in references(e):
                if r.name not in seen:
                    seen.append(r.name)
        return seen


@dataclass(frozen=True)
class ModelGraph:
    nodes: tuple

    def __getitem__(self, name: str) -> Node:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    def names(self, kind: str | None = None) -> list[str]:
        return [n.name for n in self.nodes if kind is None or n.kind == kind]

    @property
    def params(self) -> list[str]:
        return self.names("param")

    @property
    def data(self) -> list[str]:
        return self.names("data")

    @property
    def consts(self) -> list[str]:
        return self.names("const")

    @property
    def edges(self) -> list[tuple[str, str]]:
        """(parent, child) pairs implied by references, in declaration order."""
        return [(p, n.name) for n in self.nodes for p in n.parents()]

    def topological_order(self) -> list[str]:
        """Declaration order, stably reordered so parents precede children."""
        done: list[str] = []
        pending = list(self.nodes)
        while pending:
            for i, n in enumerate(pending):
                if all(p in done for p in n.parents()):
                    done.append(n.name)
                    del pending[i]
                    break
            else:
                raise ValueError("graph has a cycle")
        return done
