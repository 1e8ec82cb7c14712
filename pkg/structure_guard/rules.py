from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from xml_core import NodePath, QName


@dataclass(frozen=True)
class ChildAllowance:
    name: QName
    min_occurs: int = 0
    max_occurs: Optional[int] = None  # None means unbounded

    def __post_init__(self):
        if self.min_occurs < 0:
            raise ValueError(f"min_occurs of {self.name} must not be negative")
        if self.max_occurs is not None and self.max_occurs < self.min_occurs:
            raise ValueError(f"max_occurs of {self.name} is below min_occurs")

    @property
    def occurs_text(self) -> str:
        upper = "*" if self.max_occurs is None else str(self.max_occurs)
        return f"{self.min_occurs}..{upper}"


@dataclass(frozen=True)
class StructureRule:
    """
    Allowed children of one parent element.

    A closed rule (``open=False``) rejects unlisted children and requires the
    listed ones in the listed order. An open rule only enforces cardinalities.
    """
    context: QName
    allowed_children: Tuple[ChildAllowance, ...] = ()
    open: bool = False

    def __post_init__(self):
        names = [a.name for a in self.allowed_children]
        if len(set(names)) != len(names):
            raise ValueError(f"rule for {self.context} lists a child twice")

    @property
    def rule_id(self) -> str:
        return f"rule:{self.context.local_name}"

    def allowance_for(self, name: QName) -> Optional[ChildAllowance]:
        for allowance in self.allowed_children:
            if allowance.name == name:
                return allowance
        return None


@dataclass(frozen=True)
class StructureRuleSet:
    name: str
    rules: Tuple[StructureRule, ...] = ()
    root: Optional[QName] = None

    def __post_init__(self):
        contexts = [r.context for r in self.rules]
        if len(set(contexts)) != len(contexts):
            raise ValueError(f"rule set {self.name} has two rules for one context")

    @property
    def by_context(self) -> Dict[QName, StructureRule]:
        return {rule.context: rule for rule in self.rules}

    def rule_for(self, context: QName) -> Optional[StructureRule]:
        for rule in self.rules:
            if rule.context == context:
                return rule
        return None

    def max_occurs(self, parent: QName, child: QName) -> Optional[int]:
        """Upper bound the rules put on ``child`` under ``parent``; 0 when a closed rule omits it."""
        rule = self.rule_for(parent)
        if rule is None:
            return None
        allowance = rule.allowance_for(child)
        if allowance is None:
            return None if rule.open else 0
        return allowance.max_occurs


@dataclass(frozen=True)
class Violation:
    path: NodePath
    rule_id: str
    reason: str

    def as_dict(self) -> Dict[str, str]:
        return {"path": str(self.path), "rule_id": self.rule_id, "reason": self.reason}
