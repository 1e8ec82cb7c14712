"""
Element names of the WS-Security message layout and small helpers to find
and build them.
"""
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from config.constants import DS_NS, DSP_NS, EXC_C14N, SOAP12_NS, WSSE_NS, WST_NS, WSU_NS
from xml_core import NodePath, QName, XmlAttribute, XmlDocument, XmlNode, element, text_node

ENVELOPE = QName("Envelope", SOAP12_NS)
HEADER = QName("Header", SOAP12_NS)
BODY = QName("Body", SOAP12_NS)
SECURITY = QName("Security", WSSE_NS)
BINARY_SECURITY_TOKEN = QName("BinarySecurityToken", WSSE_NS)
SECURITY_TOKEN_REFERENCE = QName("SecurityTokenReference", WSSE_NS)
WSSE_REFERENCE = QName("Reference", WSSE_NS)
CHALLENGE = QName("Challenge", WST_NS)

SIGNATURE = QName("Signature", DS_NS)
SIGNED_INFO = QName("SignedInfo", DS_NS)
CANONICALIZATION_METHOD = QName("CanonicalizationMethod", DS_NS)
SIGNATURE_METHOD = QName("SignatureMethod", DS_NS)
REFERENCE = QName("Reference", DS_NS)
TRANSFORMS = QName("Transforms", DS_NS)
TRANSFORM = QName("Transform", DS_NS)
DIGEST_METHOD = QName("DigestMethod", DS_NS)
DIGEST_VALUE = QName("DigestValue", DS_NS)
SIGNATURE_VALUE = QName("SignatureValue", DS_NS)
KEY_INFO = QName("KeyInfo", DS_NS)
FILTER_XPATH = QName("XPath", DSP_NS)
INCLUSIVE_NAMESPACES = QName("InclusiveNamespaces", EXC_C14N)

WSU_ID = QName("Id", WSU_NS)
ALGORITHM = QName("Algorithm")
URI = QName("URI")
FILTER = QName("Filter")
VALUE_TYPE = QName("ValueType")
ENCODING_TYPE = QName("EncodingType")
PREFIX_LIST = QName("PrefixList")


def child_paths(doc: XmlDocument, parent: NodePath, name: QName) -> List[NodePath]:
    return doc.child_paths(parent, name)


def first_child(doc: XmlDocument, parent: NodePath, name: QName) -> Optional[NodePath]:
    paths = doc.child_paths(parent, name)
    return paths[0] if paths else None


def header_paths(doc: XmlDocument) -> List[NodePath]:
    if doc.root.name != ENVELOPE:
        return []
    return doc.child_paths(doc.root_path, HEADER)


def security_paths(doc: XmlDocument) -> List[NodePath]:
    """Security header blocks (children of any Header), in document order."""
    paths: List[NodePath] = []
    for header in header_paths(doc):
        paths.extend(doc.child_paths(header, SECURITY))
    return paths


def registered_id(doc: XmlDocument, node: XmlNode) -> Optional[str]:
    for name in doc.id_attributes:
        value = node.get(name)
        if value is not None:
            return value
    return None


def choose_prefixes(
    scope: Dict[str, str],
    wanted: Sequence[Tuple[str, str]],
    avoid: Iterable[str] = (),
) -> Tuple[Dict[str, str], List[Tuple[str, str]]]:
    """
    Prefix to use for each wanted namespace URI below an element with ``scope``,
    plus the declarations the new subtree root must carry.

    Prefixes already bound to the right URI are reused; otherwise the preferred
    prefix (or a numbered variant not otherwise in use) is declared. Prefixes in
    ``avoid`` are never declared anew.
    """
    chosen: Dict[str, str] = {}
    taken = set(avoid)
    for preferred, uri in wanted:
        bound = [p for p, u in scope.items() if u == uri and p and p != "xml"]
        if preferred in bound:
            chosen[uri] = preferred
        elif bound:
            chosen[uri] = bound[-1]
        else:
            continue
        taken.add(chosen[uri])
    decls: List[Tuple[str, str]] = []
    for preferred, uri in wanted:
        if uri in chosen:
            continue
        candidate, n = preferred, 1
        while candidate in taken:
            candidate = f"{preferred}{n}"
            n += 1
        chosen[uri] = candidate
        taken.add(candidate)
        decls.append((candidate, uri))
    return chosen, decls


def make(
    name: QName,
    prefixes: Dict[str, str],
    attributes: Iterable[Tuple[QName, str]] = (),
    children: Iterable[XmlNode] = (),
    text: Optional[str] = None,
    decls: Sequence[Tuple[str, str]] = (),
) -> XmlNode:
    """Element whose namespaced names use the prefixes chosen by ``choose_prefixes``."""
    prefix = prefixes[name.namespace_uri] if name.namespace_uri else None
    attrs = [
        XmlAttribute(attr, value, prefixes[attr.namespace_uri] if attr.namespace_uri else None)
        for attr, value in attributes
    ]
    kids = list(children)
    if text is not None:
        kids.insert(0, text_node(text))
    return element(name, prefix=prefix, attributes=attrs, namespace_decls=decls, children=kids)
