import logging
from typing import List

from structure_guard.rules import StructureRule, StructureRuleSet, Violation
from xml_core import NodeKind, NodePath, XmlDocument, XmlNode

# Setup logger
logger = logging.getLogger("StructureGuard")
logger.setLevel(logging.INFO)
if not logger.handlers:
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("[%(levelname)s] %(message)s"))
    logger.addHandler(handler)


def _check_element(path: NodePath, node: XmlNode, rule: StructureRule) -> List[Violation]:
    violations: List[Violation] = []
    children = node.element_children()

    if not rule.open:
        for child in node.children:
            if child.kind is NodeKind.TEXT and child.text.strip():
                violations.append(Violation(path, rule.rule_id, "unexpected character data"))
                break

    last_position = -1
    for index, child in enumerate(children):
        allowance = rule.allowance_for(child.name)
        child_path = path.child(index, child.name)
        if allowance is None:
            if not rule.open:
                violations.append(Violation(child_path, rule.rule_id, f"{child.name} is not allowed here"))
            continue
        if not rule.open:
            position = rule.allowed_children.index(allowance)
            if position < last_position:
                violations.append(Violation(child_path, rule.rule_id, f"{child.name} is out of order"))
            last_position = max(last_position, position)

    for allowance in rule.allowed_children:
        positions = [i for i, child in enumerate(children) if child.name == allowance.name]
        if len(positions) < allowance.min_occurs:
            violations.append(
                Violation(
                    path,
                    rule.rule_id,
                    f"{allowance.name} occurs {len(positions)} time(s), min_occurs={allowance.min_occurs}",
                )
            )
        if allowance.max_occurs is not None and len(positions) > allowance.max_occurs:
            excess = positions[allowance.max_occurs]
            violations.append(
                Violation(
                    path.child(excess, allowance.name),
                    rule.rule_id,
                    f"{allowance.name} occurs {len(positions)} time(s), max_occurs={allowance.max_occurs} exceeded",
                )
            )
    return violations


def validate_structure(doc: XmlDocument, rules: StructureRuleSet) -> List[Violation]:
    """Every rule violation in ``doc``; an empty list means the document conforms."""
    violations: List[Violation] = []
    if rules.root is not None and doc.root.name != rules.root:
        violations.append(
            Violation(doc.root_path, "root", f"expected root {rules.root}, found {doc.root.name}")
        )
    contexts = rules.by_context
    for path, node in doc.iter_elements():
        rule = contexts.get(node.name)
        if rule is not None:
            violations.extend(_check_element(path, node, rule))
    if violations:
        logger.info(f"Profile {rules.name}: {len(violations)} structural violation(s)")
    return violations
