from typing import List, Optional, Tuple

from fastxpath.errors import AmbiguityUnresolvable, SubsetViolation
from fastxpath.evaluator import evaluate
from fastxpath.expr import FastXPathExpr, FastXPathStep
from xml_core import NodePath, QName, XmlDocument, XmlNode


def _pick_disambiguator(node: XmlNode, doc: XmlDocument, disambiguator: Optional[QName]) -> Optional[QName]:
    if disambiguator is not None:
        return disambiguator if node.get(disambiguator) is not None else None
    for candidate in doc.id_attributes:
        if node.get(candidate) is not None:
            return candidate
    return None


def generate_for(doc: XmlDocument, target: NodePath, disambiguator: Optional[QName] = None) -> FastXPathExpr:
    """
    Prefix-free expression selecting exactly ``target``.

    A step whose element has same-named siblings gets an attribute predicate on
    ``disambiguator`` (by default the first registered ID attribute present).

    Raises:
        AmbiguityUnresolvable: a step cannot be made unique
        PathResolutionError: ``target`` does not resolve
    """
    doc.node_at(target)
    steps: List[FastXPathStep] = []
    parent: Optional[XmlNode] = None
    node = doc.root
    for depth, (index, name) in enumerate(target.steps):
        if depth > 0:
            node = parent.element_children()[index]
        if parent is not None:
            siblings = [(i, c) for i, c in enumerate(parent.element_children()) if c.name == name]
        else:
            siblings = [(0, node)]
        predicates: Tuple[Tuple[QName, str], ...] = ()
        if len(siblings) > 1:
            attr = _pick_disambiguator(node, doc, disambiguator)
            if attr is None:
                raise AmbiguityUnresolvable(
                    f"{NodePath(target.steps[: depth + 1])} has same-named siblings and no distinguishing attribute"
                )
            value = node.get(attr)
            clashes = [i for i, s in siblings if i != index and s.get(attr) == value]
            if clashes:
                raise AmbiguityUnresolvable(
                    f"{NodePath(target.steps[: depth + 1])} shares {attr.local_name}={value!r} with a sibling"
                )
            predicates = ((attr, value),)
        steps.append(FastXPathStep(name.local_name, name.namespace_uri, predicates))
        parent = node

    expr = FastXPathExpr(tuple(steps))
    try:
        expr = FastXPathExpr(expr.steps, expr.to_text())
    except SubsetViolation as e:
        raise AmbiguityUnresolvable(str(e)) from e
    if evaluate(expr, doc) != [target]:
        raise AmbiguityUnresolvable(f"generated expression does not single out {target}")
    return expr
