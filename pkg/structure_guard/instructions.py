"""
Message validation instructions: declarative checks for what allowlist rules
cannot express, such as "at most one Security block in the Header".

Counts are taken per scope instance: for every element named by ``scope``,
the descendants named by ``target`` are counted.
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

from structure_guard.rules import Violation
from xml_core import QName, XmlDocument


class InstructionKind(str, Enum):
    MAX_COUNT = "max-count"
    EXACTLY_ONE = "exactly-one"
    FORBID = "forbid"


@dataclass(frozen=True)
class ValidationInstruction:
    id: str
    kind: InstructionKind
    target: QName
    scope: QName
    n: Optional[int] = None
    description: str = ""

    def __post_init__(self):
        if not self.id or any(c.isspace() for c in self.id):
            raise ValueError(f"instruction id {self.id!r} must be a non-empty token")
        if self.kind is InstructionKind.MAX_COUNT:
            if self.n is None or self.n < 0:
                raise ValueError(f"instruction {self.id}: max-count needs n >= 0")
        elif self.n is not None:
            raise ValueError(f"instruction {self.id}: {self.kind.value} takes no n")

    def check(self, doc: XmlDocument) -> List[Violation]:
        violations = []
        for scope_path, scope_node in doc.iter_elements():
            if scope_node.name != self.scope:
                continue
            count = sum(1 for d in scope_node.iter_descendants() if d.name == self.target)
            if self.kind is InstructionKind.MAX_COUNT and count > self.n:
                reason = f"{count} {self.target.local_name} element(s) under {self.scope.local_name}, at most {self.n} allowed"
            elif self.kind is InstructionKind.EXACTLY_ONE and count != 1:
                reason = f"{count} {self.target.local_name} element(s) under {self.scope.local_name}, exactly one required"
            elif self.kind is InstructionKind.FORBID and count:
                reason = f"{self.target.local_name} is forbidden under {self.scope.local_name}"
            else:
                continue
            violations.append(Violation(scope_path, self.id, reason))
        return violations


def apply_instructions(doc: XmlDocument, instructions: Sequence[ValidationInstruction]) -> List[Violation]:
    """Evaluate each instruction independently and collect every failure."""
    violations: List[Violation] = []
    for instruction in instructions:
        violations.extend(instruction.check(doc))
    return violations
