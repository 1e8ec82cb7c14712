from typing import List, Tuple

from fastxpath.expr import FastXPathExpr
from xml_core import NodePath, XmlDocument, XmlNode


def evaluate(expr: FastXPathExpr, doc: XmlDocument) -> List[NodePath]:
    """
    Every element matching all steps, in document order.

    Only (local name, namespace URI) pairs and attribute values are compared;
    prefixes never take part.
    """
    first = expr.steps[0]
    frontier: List[Tuple[NodePath, XmlNode]] = []
    if first.matches(doc.root):
        frontier.append((doc.root_path, doc.root))
    for step in expr.steps[1:]:
        matched = []
        for path, node in frontier:
            for index, child in enumerate(node.element_children()):
                if step.matches(child):
                    matched.append((path.child(index, child.name), child))
        frontier = matched
        if not frontier:
            break
    return [path for path, _ in frontier]
