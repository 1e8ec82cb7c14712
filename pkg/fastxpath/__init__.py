from fastxpath.errors import AmbiguityUnresolvable, FastXPathError, SubsetViolation
from fastxpath.expr import FastXPathExpr, FastXPathStep, expressions_equal
from fastxpath.lexer import tokenize
from fastxpath.parser import parse_fastxpath
from fastxpath.evaluator import evaluate
from fastxpath.generator import generate_for

__all__ = [
    "AmbiguityUnresolvable",
    "FastXPathError",
    "SubsetViolation",
    "FastXPathExpr",
    "FastXPathStep",
    "expressions_equal",
    "parse_fastxpath",
    "tokenize",
    "evaluate",
    "generate_for",
]
