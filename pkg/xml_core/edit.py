"""
Persistent edits on XmlDocument. Every function returns a new document and
leaves its input untouched.
"""
from dataclasses import replace
from typing import Callable, Dict, Iterable, List, Optional, Set

from xml_core.errors import PathResolutionError
from xml_core.model import NodePath, XmlDocument, XmlNode


def _raw_index(parent: XmlNode, element_index: int) -> int:
    """Position in ``children`` of the element child with the given element index."""
    seen = -1
    for raw, child in enumerate(parent.children):
        if child.is_element:
            seen += 1
            if seen == element_index:
                return raw
    raise PathResolutionError(f"element child {element_index} does not exist")


def _rebuild(doc: XmlDocument, path: NodePath, fn: Callable[[XmlNode], XmlNode]) -> XmlDocument:
    if doc.find(path) is None:
        raise PathResolutionError(f"path {path} does not resolve")

    def descend(node: XmlNode, depth: int) -> XmlNode:
        if depth == len(path.steps):
            return fn(node)
        index = path.steps[depth][0]
        raw = _raw_index(node, index)
        children = list(node.children)
        children[raw] = descend(children[raw], depth + 1)
        return node.with_children(children)

    return XmlDocument(descend(doc.root, 1), doc.id_attributes)


def replace_node(doc: XmlDocument, path: NodePath, new_node: XmlNode) -> XmlDocument:
    if path.parent is None:
        return XmlDocument(new_node, doc.id_attributes)
    return _rebuild(doc, path, lambda _old: new_node)


def update_node(doc: XmlDocument, path: NodePath, fn: Callable[[XmlNode], XmlNode]) -> XmlDocument:
    return _rebuild(doc, path, fn)


def insert_child(doc: XmlDocument, parent: NodePath, position: int, node: XmlNode) -> XmlDocument:
    """Insert ``node`` so that it becomes element child number ``position`` of ``parent``."""

    def apply(target: XmlNode) -> XmlNode:
        count = len(target.element_children())
        if position < 0 or position > count:
            raise PathResolutionError(f"cannot insert at element position {position} of {count}")
        children = list(target.children)
        raw = len(children) if position == count else _raw_index(target, position)
        children.insert(raw, node)
        return target.with_children(children)

    return _rebuild(doc, parent, apply)


def append_child(doc: XmlDocument, parent: NodePath, node: XmlNode) -> XmlDocument:
    count = len(doc.node_at(parent).element_children())
    return insert_child(doc, parent, count, node)


def insert_after(doc: XmlDocument, sibling: NodePath, node: XmlNode) -> XmlDocument:
    if sibling.parent is None:
        raise PathResolutionError("the root element has no siblings")
    return insert_child(doc, sibling.parent, sibling.index + 1, node)


def remove_node(doc: XmlDocument, path: NodePath) -> XmlDocument:
    if path.parent is None:
        raise PathResolutionError("the root element cannot be removed")

    def apply(parent: XmlNode) -> XmlNode:
        children = list(parent.children)
        del children[_raw_index(parent, path.index)]
        return parent.with_children(children)

    return _rebuild(doc, path.parent, apply)


def _prefixes_used(node: XmlNode, declared_above: Set[str]) -> Set[str]:
    """Prefixes used in the subtree that no declaration inside the subtree binds."""
    declared = declared_above | {p for p, _ in node.namespace_decls}
    used: Set[str] = set()
    own = node.prefix or ""
    if own not in declared:
        used.add(own)
    for attr in node.attributes:
        if attr.prefix and attr.prefix != "xml" and attr.prefix not in declared:
            used.add(attr.prefix)
    for child in node.element_children():
        used |= _prefixes_used(child, declared)
    return used


def make_self_contained(node: XmlNode, scope: Dict[str, str]) -> XmlNode:
    """Copy inherited bindings the subtree relies on onto its root element."""
    missing = _prefixes_used(node, set())
    decls = list(node.namespace_decls)
    for prefix in sorted(missing):
        if prefix == "":
            decls.append(("", scope.get("", "")))
        elif prefix in scope:
            decls.append((prefix, scope[prefix]))
    return node.with_namespace_decls(decls)


def detach(doc: XmlDocument, path: NodePath) -> XmlNode:
    """The element at ``path`` with the namespace bindings it inherits materialized."""
    node = doc.node_at(path)
    return make_self_contained(node, doc.in_scope_namespaces(path.parent))


def rebind_prefixes(
    doc: XmlDocument,
    rename: Callable[[str], str],
    preserve: Iterable[NodePath] = (),
) -> XmlDocument:
    """
    Rename every namespace prefix outside the ``preserve`` subtrees.

    Preserved subtrees keep their lexical form; bindings they inherited are
    copied onto their root so they still resolve after the rename. The default
    namespace and the ``xml`` prefix are never renamed.
    """
    keep = set(preserve)

    def swap(prefix: Optional[str]) -> Optional[str]:
        if not prefix or prefix == "xml":
            return prefix
        return rename(prefix)

    def walk(node: XmlNode, path: NodePath, scope: Dict[str, str]) -> XmlNode:
        if path in keep:
            return make_self_contained(node, scope)
        inner = dict(scope)
        inner.update(node.namespace_decls)
        children: List[XmlNode] = []
        index = 0
        for child in node.children:
            if child.is_element:
                children.append(walk(child, path.child(index, child.name), inner))
                index += 1
            else:
                children.append(child)
        return replace(
            node,
            prefix=swap(node.prefix),
            namespace_decls=tuple((swap(p) if p else p, uri) for p, uri in node.namespace_decls),
            attributes=tuple(replace(a, prefix=swap(a.prefix)) for a in node.attributes),
            children=tuple(children),
        )

    return XmlDocument(walk(doc.root, doc.root_path, {}), doc.id_attributes)
