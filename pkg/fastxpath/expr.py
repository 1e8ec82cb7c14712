from dataclasses import dataclass, field
from typing import Tuple

from fastxpath.errors import SubsetViolation
from xml_core import QName, XmlNode


def quote(value: str) -> str:
    if '"' not in value:
        return f'"{value}"'
    if "'" not in value:
        return f"'{value}'"
    raise SubsetViolation(f"string {value!r} contains both quote characters and has no literal form")


@dataclass(frozen=True)
class FastXPathStep:
    local_name: str
    namespace_uri: str
    attr_predicates: Tuple[Tuple[QName, str], ...] = ()

    @property
    def name(self) -> QName:
        return QName(self.local_name, self.namespace_uri)

    def matches(self, node: XmlNode) -> bool:
        if not node.is_element or node.name != self.name:
            return False
        return all(node.get(attr) == value for attr, value in self.attr_predicates)

    def to_text(self) -> str:
        parts = [f"local-name()={quote(self.local_name)}", f"namespace-uri()={quote(self.namespace_uri)}"]
        for attr, value in self.attr_predicates:
            if attr.namespace_uri:
                parts.append(
                    f"@*[local-name()={quote(attr.local_name)} and "
                    f"namespace-uri()={quote(attr.namespace_uri)}]={quote(value)}"
                )
            else:
                parts.append(f"@{attr.local_name}={quote(value)}")
        return "/*[" + " and ".join(parts) + "]"


@dataclass(frozen=True)
class FastXPathExpr:
    """
    Absolute, prefix-free child-axis path.

    ``source_text`` keeps the text the expression was parsed from and takes no
    part in equality: two expressions are equal when their steps are.
    """
    steps: Tuple[FastXPathStep, ...]
    source_text: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.steps:
            raise SubsetViolation("a FastXPath expression needs at least one step")

    def to_text(self) -> str:
        return "".join(step.to_text() for step in self.steps)

    def __str__(self) -> str:
        return self.to_text()


def expressions_equal(left: FastXPathExpr, right: FastXPathExpr) -> bool:
    """Structural equality: same steps, same predicates in the same order."""
    return left.steps == right.steps
