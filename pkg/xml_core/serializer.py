from typing import List

from lxml import etree

from xml_core.model import NodeKind, XmlDocument, XmlNode


def escape_text(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace("\r", "&#xD;")
    )


def escape_attribute(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace('"', "&quot;")
        .replace("\t", "&#x9;")
        .replace("\n", "&#xA;")
        .replace("\r", "&#xD;")
    )


def lexical_name(prefix, local_name: str) -> str:
    return f"{prefix}:{local_name}" if prefix else local_name


def _render(node: XmlNode, out: List[str]) -> None:
    if node.kind is NodeKind.TEXT:
        out.append(escape_text(node.text))
        return
    if node.kind is NodeKind.COMMENT:
        out.append(f"<!--{node.text}-->")
        return
    tag = lexical_name(node.prefix, node.name.local_name)
    out.append("<" + tag)
    for prefix, uri in node.namespace_decls:
        attr = f"xmlns:{prefix}" if prefix else "xmlns"
        out.append(f' {attr}="{escape_attribute(uri)}"')
    for attr in node.attributes:
        out.append(f' {lexical_name(attr.prefix, attr.name.local_name)}="{escape_attribute(attr.value)}"')
    if not node.children:
        out.append("/>")
        return
    out.append(">")
    for child in node.children:
        _render(child, out)
    out.append(f"</{tag}>")


def serialize_node(node: XmlNode) -> bytes:
    out: List[str] = []
    _render(node, out)
    return "".join(out).encode("utf-8")


def serialize(doc: XmlDocument) -> bytes:
    """UTF-8 bytes without an XML declaration; parse(serialize(d)) == d."""
    return serialize_node(doc.root)


def pretty_print(doc: XmlDocument) -> str:
    """Indented rendering for humans. Not signature-safe."""
    tree = etree.fromstring(serialize(doc))
    etree.indent(tree, space="  ")
    return etree.tostring(tree, encoding="unicode")
