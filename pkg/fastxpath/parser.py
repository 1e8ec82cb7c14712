"""
Tokenizer and recursive-descent parser for the prefix-free FastXPath subset.

Grammar, per step (whitespace between tokens is insignificant, both quote
styles are accepted)::

    step      := "/" "*" "[" nametest "and" nametest ("and" attrtest)* "]"
    nametest  := "local-name()" "=" string | "namespace-uri()" "=" string
    attrtest  := "@" NCName "=" string
               | "@*[" "local-name()" "=" string "and" "namespace-uri()" "=" string "]" "=" string

Each step carries exactly one local-name() and one namespace-uri() test.
Anything else raises SubsetViolation.
"""
from typing import List, Optional, Tuple

from fastxpath.errors import SubsetViolation
from fastxpath.expr import FastXPathExpr, FastXPathStep
from fastxpath.lexer import Token, tokenize
from xml_core import QName

_NAME_FUNCTIONS = ("local-name", "namespace-uri")


class FastXPathParser:
    """Parses one expression; not reusable across texts."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def peek(self, ahead: int = 0) -> Optional[Token]:
        index = self.pos + ahead
        return self.tokens[index] if index < len(self.tokens) else None

    def fail(self, message: str, token: Optional[Token] = None) -> SubsetViolation:
        offset = token.offset if token is not None else len(self.text)
        return SubsetViolation(message, self.text, offset)

    def next(self) -> Token:
        token = self.peek()
        if token is None:
            raise self.fail("unexpected end of expression")
        self.pos += 1
        return token

    def expect(self, kind: str, value: Optional[str] = None) -> Token:
        token = self.next()
        if token.kind != kind or (value is not None and token.value != value):
            wanted = value if value is not None else kind
            raise self.fail(f"expected {wanted!r}, found {token.value!r}", token)
        return token

    def string(self) -> str:
        token = self.next()
        if token.kind == "other" and token.value in "\"'":
            raise self.fail("unterminated string literal", token)
        if token.kind != "string":
            raise self.fail(f"expected a quoted string, found {token.value!r}", token)
        return token.value

    def parse(self) -> FastXPathExpr:
        if not self.tokens:
            raise self.fail("empty expression", Token("other", "", 0))
        steps = []
        while not self.at_end:
            steps.append(self.step())
        return FastXPathExpr(tuple(steps), self.text)

    def step(self) -> FastXPathStep:
        token = self.next()
        if token.kind == "dslash":
            raise self.fail("descendant axis '//' is not allowed", token)
        if token.kind != "punct" or token.value != "/":
            raise self.fail("expressions must be absolute child-axis paths", token)

        token = self.next()
        if token.kind == "dotdot":
            raise self.fail("parent axis '..' is not allowed", token)
        if token.kind == "name":
            following = self.peek()
            if following is not None and following.kind == "other" and following.value == ":":
                raise self.fail(f"prefixed name test {token.value!r} is not prefix-free", token)
            raise self.fail("name tests are not allowed; use * with local-name() and namespace-uri()", token)
        if token.kind != "punct" or token.value != "*":
            raise self.fail(f"expected '*', found {token.value!r}", token)

        opening = self.expect("punct", "[")
        local_name: Optional[str] = None
        namespace_uri: Optional[str] = None
        attr_predicates: List[Tuple[QName, str]] = []
        while True:
            kind, name, value = self.predicate()
            if kind == "local-name":
                if local_name is not None:
                    raise self.fail("local-name() tested twice in one step", opening)
                local_name = value
            elif kind == "namespace-uri":
                if namespace_uri is not None:
                    raise self.fail("namespace-uri() tested twice in one step", opening)
                namespace_uri = value
            else:
                attr_predicates.append((name, value))
            token = self.next()
            if token.kind == "punct" and token.value == "]":
                break
            if token.kind == "name" and token.value == "and":
                continue
            if token.kind == "name" and token.value == "or":
                raise self.fail("only conjunction of predicates is allowed", token)
            raise self.fail(f"expected 'and' or ']', found {token.value!r}", token)

        if local_name is None or namespace_uri is None:
            raise self.fail("every step needs both local-name() and namespace-uri()", opening)
        if not local_name or ":" in local_name:
            raise self.fail(f"invalid local name {local_name!r}", opening)
        return FastXPathStep(local_name, namespace_uri, tuple(attr_predicates))

    def name_function(self) -> Tuple[str, str]:
        token = self.next()
        if token.kind != "name" or token.value not in _NAME_FUNCTIONS:
            raise self.fail(f"expected local-name() or namespace-uri(), found {token.value!r}", token)
        self.expect("punct", "(")
        self.expect("punct", ")")
        self.expect("punct", "=")
        return token.value, self.string()

    def predicate(self) -> Tuple[str, Optional[QName], str]:
        token = self.peek()
        if token is None:
            raise self.fail("unexpected end of expression")
        if token.kind == "name" and token.value in _NAME_FUNCTIONS:
            kind, value = self.name_function()
            return kind, None, value
        if token.kind == "punct" and token.value == "@":
            self.next()
            return self.attribute_test()
        if token.kind == "name":
            following = self.peek(1)
            if following is not None and following.kind == "punct" and following.value == "(":
                raise self.fail(f"function {token.value}() is not allowed", token)
        raise self.fail(f"unsupported predicate starting at {token.value!r}", token)

    def attribute_test(self) -> Tuple[str, QName, str]:
        token = self.next()
        if token.kind == "name":
            following = self.peek()
            if following is not None and following.kind == "other" and following.value == ":":
                raise self.fail(f"prefixed attribute {token.value!r} is not prefix-free", token)
            self.expect("punct", "=")
            return "attr", QName(token.value), self.string()
        if token.kind == "punct" and token.value == "*":
            self.expect("punct", "[")
            first_kind, first = self.name_function()
            self.expect("name", "and")
            second_kind, second = self.name_function()
            if {first_kind, second_kind} != set(_NAME_FUNCTIONS):
                raise self.fail("attribute tests need local-name() and namespace-uri()", token)
            self.expect("punct", "]")
            self.expect("punct", "=")
            value = self.string()
            local, uri = (first, second) if first_kind == "local-name" else (second, first)
            if not local or ":" in local:
                raise self.fail(f"invalid attribute local name {local!r}", token)
            return "attr", QName(local, uri), value
        raise self.fail(f"expected attribute name after '@', found {token.value!r}", token)


def parse_fastxpath(text: str) -> FastXPathExpr:
    """Parse ``text`` or raise SubsetViolation."""
    if not isinstance(text, str):
        raise SubsetViolation("expression text must be a string")
    return FastXPathParser(text).parse()
