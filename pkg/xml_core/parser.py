"""
Bytes → XmlDocument.

lxml does the tokenizing; its ``start-ns`` events give the namespace
declarations exactly as written on each element, which ElementTree-style
trees otherwise fold into nsmap.
"""
import io
import logging
import re
from typing import Dict, List, Optional, Sequence, Tuple

from lxml import etree

from config.constants import XML_NS
from xml_core.errors import UnsupportedConstruct, WellFormednessError
from xml_core.model import (
    DEFAULT_ID_QNAMES,
    QName,
    XmlAttribute,
    XmlDocument,
    XmlNode,
    comment_node,
    element,
    text_node,
)

logger = logging.getLogger(__name__)

_EVENTS = ("start", "start-ns", "comment", "pi")
_DECLARED_ENCODING = re.compile(rb"^\s*<\?xml[^>]*?encoding\s*=\s*[\"']([A-Za-z0-9._-]+)[\"']")
_UTF8_BOM = b"\xef\xbb\xbf"


def _check_encoding(data: bytes) -> None:
    body = data[len(_UTF8_BOM):] if data.startswith(_UTF8_BOM) else data
    match = _DECLARED_ENCODING.match(body)
    if match and match.group(1).decode("ascii").lower() not in ("utf-8", "utf8"):
        raise UnsupportedConstruct(f"encoding {match.group(1).decode('ascii')} is not supported, only UTF-8")
    try:
        body.decode("utf-8")
    except UnicodeDecodeError as e:
        raise UnsupportedConstruct(f"input is not valid UTF-8: {e}") from e


def _attribute_prefix(uri: str, scope: Dict[str, str], element_name: QName) -> str:
    if uri == XML_NS:
        return "xml"
    # scope is ordered outermost → innermost; the innermost binding wins
    for prefix in reversed(list(scope)):
        if prefix and scope[prefix] == uri:
            return prefix
    raise WellFormednessError(f"attribute namespace {uri} on {element_name} has no bound prefix")


def _convert(el, decls_for: Dict[object, Tuple[Tuple[str, str], ...]], scope: Dict[str, str]) -> XmlNode:
    decls = decls_for.get(el, ())
    scope = dict(scope)
    for prefix, uri in decls:
        scope.pop(prefix, None)
        scope[prefix] = uri

    qn = etree.QName(el)
    if ":" in qn.localname:
        raise WellFormednessError(f"undeclared prefix on element {qn.localname}")
    name = QName(qn.localname, qn.namespace or "")
    prefix = el.prefix
    expected = scope.get(prefix if prefix is not None else "", "")
    if expected != name.namespace_uri:
        raise WellFormednessError(f"prefix of element {name} is not bound to its namespace")

    attributes: List[XmlAttribute] = []
    for key, value in el.attrib.items():
        aq = etree.QName(key)
        if ":" in aq.localname:
            raise WellFormednessError(f"undeclared prefix on attribute {aq.localname}")
        uri = aq.namespace or ""
        attr_prefix = _attribute_prefix(uri, scope, name) if uri else None
        attributes.append(XmlAttribute(QName(aq.localname, uri), value, attr_prefix))

    children: List[XmlNode] = []
    if el.text:
        children.append(text_node(el.text))
    for child in el:
        if child.tag is etree.Comment:
            children.append(comment_node(child.text or ""))
        elif child.tag is etree.PI:
            raise UnsupportedConstruct("processing instructions are not supported")
        elif child.tag is etree.Entity:
            raise UnsupportedConstruct(f"entity reference {child.text} is not supported")
        else:
            children.append(_convert(child, decls_for, scope))
        if child.tail:
            children.append(text_node(child.tail))

    return element(name, prefix=prefix, attributes=attributes, namespace_decls=decls, children=children)


def parse(data: bytes, id_attributes: Optional[Sequence[QName]] = None) -> XmlDocument:
    """
    Parse a UTF-8 XML document.

    Raises:
        WellFormednessError: malformed or namespace-incorrect input
        UnsupportedConstruct: DTD, processing instruction, entity or non UTF-8 input
    """
    if not isinstance(data, (bytes, bytearray)):
        raise TypeError("parse expects bytes")
    data = bytes(data)
    _check_encoding(data)

    decls_for: Dict[object, Tuple[Tuple[str, str], ...]] = {}
    pending: List[Tuple[str, str]] = []
    root = None
    try:
        context = etree.iterparse(
            io.BytesIO(data),
            events=_EVENTS,
            resolve_entities=False,
            load_dtd=False,
            no_network=True,
            remove_comments=False,
            remove_pis=False,
            remove_blank_text=False,
            huge_tree=False,
        )
        for event, item in context:
            if event == "start-ns":
                prefix, uri = item
                pending.append((prefix or "", uri))
            elif event == "start":
                decls_for[item] = tuple(pending)
                pending = []
                if root is None:
                    root = item
            elif event == "pi":
                raise UnsupportedConstruct("processing instructions are not supported")
    except etree.XMLSyntaxError as e:
        raise WellFormednessError(str(e)) from e

    if root is None:
        raise WellFormednessError("document has no root element")
    docinfo = root.getroottree().docinfo
    if docinfo.doctype or docinfo.internalDTD is not None or docinfo.externalDTD is not None:
        raise UnsupportedConstruct("document type declarations are not supported")
    for sibling in root.itersiblings(preceding=True):
        if sibling.tag is etree.PI:
            raise UnsupportedConstruct("processing instructions are not supported")
    for sibling in root.itersiblings():
        if sibling.tag is etree.PI:
            raise UnsupportedConstruct("processing instructions are not supported")

    tree = _convert(root, decls_for, {"xml": XML_NS})
    doc = XmlDocument(tree, tuple(id_attributes) if id_attributes is not None else DEFAULT_ID_QNAMES)
    if doc.duplicate_ids:
        logger.debug("Parsed document carries duplicate IDs: %s", sorted(doc.duplicate_ids))
    return doc
