"""
Signature generation.

``sign`` is the hardened path: the document must conform to the policy's
structure profile, every expected reference must select exactly one node, and
each reference is written as a prefix-free expression inside an XPath Filter 2
"intersect" transform. Any deviation aborts; there is no fallback to ID
references.

``sign_with_id_references`` writes ``URI="#id"`` references the way common
WS-Security stacks do. It exists to produce captured messages for attack
fixtures and is not used by the hardened path.
"""
import base64
import logging
import uuid
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from config.constants import (
    BASE64_ENCODING_TYPE,
    DS_NS,
    DSP_NS,
    EXC_C14N,
    SIG_RSA_PSS_SHA256,
    DIGEST_SHA256,
    SOAP12_NS,
    WSSE_NS,
    WSU_NS,
    X509V3_VALUE_TYPE,
    XPATH_FILTER2,
)
from fastxpath import FastXPathExpr, evaluate, parse_fastxpath
from structure_guard import apply_instructions, validate_structure
from xml_core import NodePath, XmlAttribute, XmlDocument, XmlNode, canonicalize, insert_child, text_node, update_node
from xmldsig.crypto import DEFAULT_PROVIDER, Certificate, CryptoProvider, SigningKeyHandle
from xmldsig.errors import PolicyViolation
from xmldsig.layout import (
    ALGORITHM,
    BINARY_SECURITY_TOKEN,
    CANONICALIZATION_METHOD,
    DIGEST_METHOD,
    DIGEST_VALUE,
    ENCODING_TYPE,
    ENVELOPE,
    FILTER,
    FILTER_XPATH,
    HEADER,
    KEY_INFO,
    REFERENCE,
    SECURITY,
    SECURITY_TOKEN_REFERENCE,
    SIGNATURE,
    SIGNATURE_METHOD,
    SIGNATURE_VALUE,
    SIGNED_INFO,
    TRANSFORM,
    TRANSFORMS,
    URI,
    VALUE_TYPE,
    WSSE_REFERENCE,
    WSU_ID,
    choose_prefixes,
    first_child,
    make,
    registered_id,
)
from xmldsig.policy import SignaturePolicy

logger = logging.getLogger(__name__)

ReferenceBuilder = Callable[[Dict[str, str]], XmlNode]

BODY_EXPRESSION = parse_fastxpath(
    f'/*[local-name()="Envelope" and namespace-uri()="{SOAP12_NS}"]'
    f'/*[local-name()="Body" and namespace-uri()="{SOAP12_NS}"]'
)


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _ensure_id(doc: XmlDocument, path: NodePath, prefix_hint: str) -> Tuple[XmlDocument, str]:
    """Return the element's registered ID, adding a wsu:Id when it has none."""
    node = doc.node_at(path)
    existing = registered_id(doc, node)
    if existing is not None:
        return doc, existing
    value = f"{prefix_hint}-{uuid.uuid4()}"
    scope = doc.in_scope_namespaces(path)
    # The declaration lands on an existing element: it must not rebind a prefix in scope there
    prefixes, decls = choose_prefixes(scope, [("wsu", WSU_NS)], avoid=scope.keys())

    def add_id(target: XmlNode) -> XmlNode:
        attrs = list(target.attributes) + [XmlAttribute(WSU_ID, value, prefixes[WSU_NS])]
        return target.with_attributes(attrs).with_namespace_decls(list(target.namespace_decls) + decls)

    return update_node(doc, path, add_id), value


def ensure_security_token(doc: XmlDocument, certificate: Certificate) -> Tuple[XmlDocument, NodePath, NodePath]:
    """
    Make sure the Envelope carries Header/Security/BinarySecurityToken for
    ``certificate``. Returns the document with the Security and token paths.
    """
    root = doc.root_path
    if doc.root.name != ENVELOPE:
        raise PolicyViolation(f"document root is {doc.root.name}, expected a SOAP 1.2 Envelope")

    header = first_child(doc, root, HEADER)
    if header is None:
        prefixes, decls = choose_prefixes(doc.in_scope_namespaces(root), [("soap", SOAP12_NS)])
        doc = insert_child(doc, root, 0, make(HEADER, prefixes, decls=decls))
        header = root.child(0, HEADER)

    securities = doc.child_paths(header, SECURITY)
    if len(securities) > 1:
        raise PolicyViolation("Header holds more than one Security block")
    if not securities:
        prefixes, decls = choose_prefixes(doc.in_scope_namespaces(header), [("wsse", WSSE_NS)])
        position = len(doc.node_at(header).element_children())
        doc = insert_child(doc, header, position, make(SECURITY, prefixes, decls=decls))
        securities = [header.child(position, SECURITY)]
    security = securities[0]

    if doc.child_paths(security, SIGNATURE):
        raise PolicyViolation("Security block already carries a Signature")

    tokens = doc.child_paths(security, BINARY_SECURITY_TOKEN)
    if len(tokens) > 1:
        raise PolicyViolation("Security block holds more than one BinarySecurityToken")
    if tokens:
        token_text = doc.node_at(tokens[0]).text_content()
        try:
            present = Certificate.from_base64(token_text)
        except Exception as e:
            raise PolicyViolation(f"existing BinarySecurityToken is unusable: {e}") from e
        if present != certificate:
            raise PolicyViolation("existing BinarySecurityToken holds a different certificate")
        doc, _ = _ensure_id(doc, tokens[0], "X509")
        return doc, security, tokens[0]

    prefixes, decls = choose_prefixes(doc.in_scope_namespaces(security), [("wsse", WSSE_NS), ("wsu", WSU_NS)])
    token = make(
        BINARY_SECURITY_TOKEN,
        prefixes,
        attributes=[
            (ENCODING_TYPE, BASE64_ENCODING_TYPE),
            (VALUE_TYPE, X509V3_VALUE_TYPE),
            (WSU_ID, f"X509-{uuid.uuid4()}"),
        ],
        text=certificate.base64,
        decls=decls,
    )
    doc = insert_child(doc, security, 0, token)
    return doc, security, security.child(0, BINARY_SECURITY_TOKEN)


def _filter2_reference(expr: FastXPathExpr, digest: bytes, digest_alg: str) -> ReferenceBuilder:
    def build(p: Dict[str, str]) -> XmlNode:
        return make(REFERENCE, p, attributes=[(URI, "")], children=[
            make(TRANSFORMS, p, children=[
                make(TRANSFORM, p, attributes=[(ALGORITHM, XPATH_FILTER2)], children=[
                    make(FILTER_XPATH, p, attributes=[(FILTER, "intersect")], text=expr.to_text()),
                ]),
                make(TRANSFORM, p, attributes=[(ALGORITHM, EXC_C14N)]),
            ]),
            make(DIGEST_METHOD, p, attributes=[(ALGORITHM, digest_alg)]),
            make(DIGEST_VALUE, p, text=_b64(digest)),
        ])
    return build


def _id_reference(id_value: str, digest: bytes, digest_alg: str) -> ReferenceBuilder:
    def build(p: Dict[str, str]) -> XmlNode:
        return make(REFERENCE, p, attributes=[(URI, f"#{id_value}")], children=[
            make(TRANSFORMS, p, children=[make(TRANSFORM, p, attributes=[(ALGORITHM, EXC_C14N)])]),
            make(DIGEST_METHOD, p, attributes=[(ALGORITHM, digest_alg)]),
            make(DIGEST_VALUE, p, text=_b64(digest)),
        ])
    return build


def _attach_signature(
    doc: XmlDocument,
    security: NodePath,
    token: NodePath,
    references: Sequence[ReferenceBuilder],
    key: SigningKeyHandle,
    c14n_alg: str,
    sig_alg: str,
    provider: CryptoProvider,
) -> XmlDocument:
    doc, token_id = _ensure_id(doc, token, "X509")
    p, decls = choose_prefixes(
        doc.in_scope_namespaces(security), [("ds", DS_NS), ("dsp", DSP_NS), ("wsse", WSSE_NS)]
    )
    signature = make(SIGNATURE, p, decls=decls, children=[
        make(SIGNED_INFO, p, children=[
            make(CANONICALIZATION_METHOD, p, attributes=[(ALGORITHM, c14n_alg)]),
            make(SIGNATURE_METHOD, p, attributes=[(ALGORITHM, sig_alg)]),
            *[build(p) for build in references],
        ]),
        make(SIGNATURE_VALUE, p),
        make(KEY_INFO, p, children=[
            make(SECURITY_TOKEN_REFERENCE, p, children=[
                make(WSSE_REFERENCE, p, attributes=[(URI, f"#{token_id}"), (VALUE_TYPE, X509V3_VALUE_TYPE)]),
            ]),
        ]),
    ])
    position = token.index + 1
    doc = insert_child(doc, security, position, signature)
    signature_path = security.child(position, SIGNATURE)
    signed_info = signature_path.child(0, SIGNED_INFO)
    value = key.sign(canonicalize(doc, signed_info), sig_alg, provider)
    return update_node(
        doc,
        signature_path.child(1, SIGNATURE_VALUE),
        lambda node: node.with_children([text_node(_b64(value))]),
    )


def sign(
    doc: XmlDocument,
    policy: SignaturePolicy,
    key: SigningKeyHandle,
    provider: Optional[CryptoProvider] = None,
) -> XmlDocument:
    """
    Sign ``doc`` under ``policy`` with prefix-free FastXPath references.

    Raises:
        PolicyViolation: structure or instruction violations, or an expected
            reference that selects zero, several, or a Signature-enclosing node
        CryptoError: signing primitive failure
    """
    provider = provider or DEFAULT_PROVIDER
    doc, security, token = ensure_security_token(doc, key.certificate)

    violations = validate_structure(doc, policy.rules) + apply_instructions(doc, policy.instructions)
    if violations:
        details = "; ".join(f"{v.rule_id} at {v.path}: {v.reason}" for v in violations)
        raise PolicyViolation(f"document does not conform to {policy.rules.name}: {details}", violations)

    references: List[ReferenceBuilder] = []
    for expr in policy.expected_references:
        matches = evaluate(expr, doc)
        if len(matches) != 1:
            raise PolicyViolation(f"expected reference selects {len(matches)} nodes: {expr.to_text()}")
        target = matches[0]
        if target.contains(security):
            raise PolicyViolation(f"expected reference {target} would enclose the Signature")
        digest = provider.digest(canonicalize(doc, target), policy.digest_alg)
        references.append(_filter2_reference(expr, digest, policy.digest_alg))

    signed = _attach_signature(doc, security, token, references, key, policy.c14n_alg, policy.sig_alg, provider)
    logger.info(f"Signed document with {len(references)} FastXPath reference(s) under policy {policy.name}")
    return signed


def sign_with_id_references(
    doc: XmlDocument,
    key: SigningKeyHandle,
    targets: Sequence[FastXPathExpr] = (BODY_EXPRESSION,),
    sig_alg: str = SIG_RSA_PSS_SHA256,
    digest_alg: str = DIGEST_SHA256,
    provider: Optional[CryptoProvider] = None,
) -> XmlDocument:
    """Sign with ``URI="#id"`` references, adding wsu:Id to targets lacking an ID."""
    provider = provider or DEFAULT_PROVIDER
    doc, security, token = ensure_security_token(doc, key.certificate)
    references: List[ReferenceBuilder] = []
    for expr in targets:
        matches = evaluate(expr, doc)
        if len(matches) != 1:
            raise PolicyViolation(f"target selects {len(matches)} nodes: {expr.to_text()}")
        doc, id_value = _ensure_id(doc, matches[0], "id")
        digest = provider.digest(canonicalize(doc, matches[0]), digest_alg)
        references.append(_id_reference(id_value, digest, digest_alg))
    return _attach_signature(doc, security, token, references, key, EXC_C14N, sig_alg, provider)
