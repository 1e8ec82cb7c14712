"""
SOAP messages of the login protocol: the LoginCreateChallenge response and
the (unsigned) LoginCreateToken request the client signs.
"""
from typing import Dict, List, Mapping, Optional

from config.constants import DEFAULT_PREFIXES, SOAP12_NS, WST_NS
from xml_core import NodePath, XmlDocument, XmlNode, element, text_node
from xmldsig.layout import BODY, CHALLENGE, ENVELOPE, HEADER


def _prefixes(overrides: Optional[Mapping[str, str]]) -> Dict[str, str]:
    """URI -> prefix, starting from the usual prefixes."""
    chosen = {uri: prefix for prefix, uri in DEFAULT_PREFIXES.items()}
    for prefix, uri in (overrides or {}).items():
        chosen[uri] = prefix
    return chosen


def _envelope(body_children: List[XmlNode], with_header: bool, prefixes: Optional[Mapping[str, str]]) -> XmlDocument:
    p = _prefixes(prefixes)
    soap, wst = p[SOAP12_NS], p[WST_NS]
    children = []
    if with_header:
        children.append(element(HEADER, prefix=soap))
    children.append(element(BODY, prefix=soap, children=body_children))
    decls = [(soap, SOAP12_NS)] + ([(wst, WST_NS)] if wst != soap else [])
    return XmlDocument(element(ENVELOPE, prefix=soap, namespace_decls=decls, children=children))


def build_challenge_response(challenge: str, prefixes: Optional[Mapping[str, str]] = None) -> XmlDocument:
    """Envelope/Body/wst:Challenge, as returned by LoginCreateChallenge."""
    wst = _prefixes(prefixes)[WST_NS]
    return _envelope([element(CHALLENGE, prefix=wst, children=[text_node(challenge)])], False, prefixes)


def build_token_request(challenge: str, prefixes: Optional[Mapping[str, str]] = None) -> XmlDocument:
    """Unsigned LoginCreateToken request: empty Header, Body carrying the challenge."""
    wst = _prefixes(prefixes)[WST_NS]
    return _envelope([element(CHALLENGE, prefix=wst, children=[text_node(challenge)])], True, prefixes)


def challenge_in(doc: XmlDocument, body: NodePath) -> Optional[str]:
    """Text of the first Challenge child of ``body``, stripped."""
    for path in doc.child_paths(body, CHALLENGE):
        return doc.node_at(path).text_content().strip()
    return None


def read_challenge_response(doc: XmlDocument) -> str:
    if doc.root.name != ENVELOPE:
        raise ValueError("response is not a SOAP 1.2 Envelope")
    for body in doc.child_paths(doc.root_path, BODY):
        value = challenge_in(doc, body)
        if value:
            return value
    raise ValueError("response carries no Challenge")
