"""A small text language for hierarchical models."""

from .ast import ModelGraph, Node
from .compile import CompiledModel, compile_joint
from .parser import parse, validate
from .printer import print_canonical


def load(path) -> ModelGraph:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


__all__ = ["ModelGraph", "Node", "CompiledModel", "compile_joint", "parse", "validate",
           "print_canonical", "load"]
