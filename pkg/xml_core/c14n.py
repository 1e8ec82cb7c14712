"""
Exclusive XML Canonicalization 1.0, without comments.

Only namespace declarations that are visibly utilized by an output element
(its own prefix, or the prefixes of its attributes) or named in the inclusive
prefix list are emitted, and only when they differ from what the nearest
output ancestor already rendered.
"""
from typing import Dict, Iterable, List, Optional, Sequence

from config.constants import XML_NS
from xml_core.errors import CanonicalizationError
from xml_core.model import NodeKind, NodePath, XmlDocument, XmlNode
from xml_core.serializer import escape_attribute, escape_text, lexical_name

DEFAULT_TOKEN = "#default"


def _inclusive_set(inclusive_prefixes: Iterable[str]) -> set:
    return {"" if p == DEFAULT_TOKEN else p for p in inclusive_prefixes}


def _render(node: XmlNode, scope: Dict[str, str], rendered: Dict[str, str], inclusive: set, out: List[str]) -> None:
    if node.kind is NodeKind.TEXT:
        out.append(escape_text(node.text))
        return
    if node.kind is NodeKind.COMMENT:
        return

    scope = dict(scope)
    scope.update(node.namespace_decls)

    own_prefix = node.prefix or ""
    if scope.get(own_prefix, "") != node.name.namespace_uri:
        raise CanonicalizationError(f"prefix of element {node.name} does not resolve to its namespace")

    utilized = {own_prefix}
    for attr in node.attributes:
        if attr.prefix:
            utilized.add(attr.prefix)
            if scope.get(attr.prefix) != attr.name.namespace_uri:
                raise CanonicalizationError(f"prefix {attr.prefix!r} of attribute {attr.name} is not declared")
    candidates = utilized | {p for p in inclusive if p in scope}

    emitted = []
    rendered = dict(rendered)
    for prefix in candidates:
        if prefix == "xml":
            continue
        if prefix not in scope and prefix != "":
            raise CanonicalizationError(f"prefix {prefix!r} is not declared")
        uri = scope.get(prefix, "")
        if rendered.get(prefix, "") != uri or (prefix and prefix not in rendered):
            if prefix and not uri:
                continue
            emitted.append((prefix, uri))
            rendered[prefix] = uri
    emitted.sort(key=lambda decl: decl[0])

    tag = lexical_name(node.prefix, node.name.local_name)
    out.append("<" + tag)
    for prefix, uri in emitted:
        attr_name = f"xmlns:{prefix}" if prefix else "xmlns"
        out.append(f' {attr_name}="{escape_attribute(uri)}"')
    for attr in sorted(node.attributes, key=lambda a: a.name.sort_key):
        out.append(f' {lexical_name(attr.prefix, attr.name.local_name)}="{escape_attribute(attr.value)}"')
    out.append(">")
    for child in node.children:
        _render(child, scope, rendered, inclusive, out)
    out.append(f"</{tag}>")


def canonicalize_node(
    node: XmlNode,
    inherited_scope: Optional[Dict[str, str]] = None,
    inclusive_prefixes: Sequence[str] = (),
) -> bytes:
    """
    Canonical bytes of a detached element given the bindings in scope at its
    parent. The ``xml`` prefix is always bound.
    """
    if not node.is_element:
        raise CanonicalizationError("only element subtrees can be canonicalized")
    scope = {"xml": XML_NS}
    scope.update(inherited_scope or {})
    out: List[str] = []
    _render(node, scope, {}, _inclusive_set(inclusive_prefixes), out)
    return "".join(out).encode("utf-8")


def canonicalize(doc: XmlDocument, subtree: NodePath, inclusive_prefixes: Sequence[str] = ()) -> bytes:
    """
    Exclusive canonical form of the element at ``subtree`` in ``doc``.

    Raises:
        CanonicalizationError: an element or attribute prefix cannot be resolved
        PathResolutionError: the path does not address an element
    """
    node = doc.node_at(subtree)
    inherited = doc.in_scope_namespaces(subtree.parent)
    return canonicalize_node(node, inherited, inclusive_prefixes)
