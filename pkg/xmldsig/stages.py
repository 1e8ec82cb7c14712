"""
The five checks of hardened signature verification.

Each check takes the document, the policy and whatever earlier checks found,
and returns ``(failure, findings)``. A check never raises for hostile input.
"""
import base64
import binascii
import hmac
from typing import Any, Dict, List, Optional, Tuple

from fastxpath import SubsetViolation, evaluate, expressions_equal, parse_fastxpath
from structure_guard import apply_instructions, validate_structure
from xml_core import AmbiguityError, NodePath, XmlDocument, canonicalize, resolve_id
from xmldsig.crypto import DEFAULT_PROVIDER, Certificate, CryptoProvider
from xmldsig.errors import CryptoError
from xmldsig.layout import (
    ALGORITHM,
    BINARY_SECURITY_TOKEN,
    CANONICALIZATION_METHOD,
    DIGEST_METHOD,
    DIGEST_VALUE,
    ENVELOPE,
    FILTER,
    FILTER_XPATH,
    HEADER,
    INCLUSIVE_NAMESPACES,
    KEY_INFO,
    PREFIX_LIST,
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
    WSSE_REFERENCE,
    first_child,
)
from xmldsig.policy import SignaturePolicy
from xmldsig.report import FailureCode, Stage, StageFailure
from xmldsig.states import CheckedReference
from config.constants import EXC_C14N, XPATH_FILTER2

Findings = Dict[str, Any]
Outcome = Tuple[Optional[StageFailure], Findings]


def _fail(stage: Stage, code: FailureCode, reason: str) -> Outcome:
    return StageFailure(stage, reason, code), {}


def _describe(violations) -> str:
    return "; ".join(f"{v.rule_id} at {v.path}: {v.reason}" for v in violations)


def check_structure(doc: XmlDocument, policy: SignaturePolicy) -> Outcome:
    violations = validate_structure(doc, policy.rules)
    if violations:
        return _fail(Stage.STRUCTURE, FailureCode.STRUCTURE_VIOLATION, _describe(violations))
    return None, {}


def check_signature_presence(doc: XmlDocument, policy: SignaturePolicy) -> Outcome:
    """Exactly one Signature, directly in Envelope/Header/Security, conforming to the signature profile."""
    stage = Stage.SIGNATURE_PRESENCE
    signatures = doc.paths_named(SIGNATURE)
    if not signatures:
        return _fail(stage, FailureCode.SIGNATURE_MISSING, "no Signature element")
    if len(signatures) > 1:
        return _fail(stage, FailureCode.SIGNATURE_MALFORMED, f"{len(signatures)} Signature elements, exactly one allowed")
    signature = signatures[0]
    names = [name for _, name in signature.steps]
    if names != [ENVELOPE, HEADER, SECURITY, SIGNATURE]:
        return _fail(stage, FailureCode.SIGNATURE_MALFORMED, f"Signature at {signature} is not inside Envelope/Header/Security")

    violations = validate_structure(XmlDocument(doc.node_at(signature), doc.id_attributes), policy.signature_rules)
    if violations:
        return _fail(stage, FailureCode.SIGNATURE_MALFORMED, f"Signature does not conform: {_describe(violations)}")
    return None, {
        "signature_path": signature,
        "security_path": signature.parent,
        "signed_info_path": first_child(doc, signature, SIGNED_INFO),
    }


def check_instructions(doc: XmlDocument, policy: SignaturePolicy) -> Outcome:
    violations = apply_instructions(doc, policy.instructions)
    if violations:
        return _fail(Stage.INSTRUCTIONS, FailureCode.INSTRUCTION_VIOLATION, _describe(violations))
    return None, {}


def _filter_expression(doc: XmlDocument, reference: NodePath) -> Tuple[Optional[str], Tuple[str, ...], str]:
    """
    Pull the XPath Filter 2 text and inclusive prefixes out of a Reference.
    Returns (text, prefixes, problem); text is None when the transform chain is not the allowed one.
    """
    transforms = first_child(doc, reference, TRANSFORMS)
    if transforms is None:
        return None, (), "Reference has no Transforms"
    chain = doc.child_paths(transforms, TRANSFORM)
    algorithms = [doc.node_at(t).get(ALGORITHM) for t in chain]
    if algorithms != [XPATH_FILTER2, EXC_C14N]:
        return None, (), f"transform chain {algorithms} is not XPath Filter 2 followed by exclusive c14n"

    xpaths = doc.child_paths(chain[0], FILTER_XPATH)
    if len(xpaths) != 1 or len(doc.node_at(chain[0]).element_children()) != 1:
        return None, (), "XPath Filter 2 transform must hold exactly one XPath"
    xpath = doc.node_at(xpaths[0])
    if xpath.get(FILTER) != "intersect":
        return None, (), f"XPath filter type {xpath.get(FILTER)!r} is not intersect"
    if doc.child_paths(chain[0], INCLUSIVE_NAMESPACES):
        return None, (), "InclusiveNamespaces belongs to the c14n transform"

    prefixes: Tuple[str, ...] = ()
    inclusive = first_child(doc, chain[1], INCLUSIVE_NAMESPACES)
    if inclusive is not None:
        prefixes = tuple((doc.node_at(inclusive).get(PREFIX_LIST) or "").split())
    if doc.child_paths(chain[1], FILTER_XPATH):
        return None, (), "exclusive c14n transform must not hold an XPath"
    return xpath.text_content(), prefixes, ""


def _resolve_token(doc: XmlDocument, signature: NodePath, security: NodePath) -> Outcome:
    stage = Stage.REFERENCE_CHECK
    key_info = first_child(doc, signature, KEY_INFO)
    token_ref = None
    if key_info is not None:
        str_path = first_child(doc, key_info, SECURITY_TOKEN_REFERENCE)
        if str_path is not None:
            token_ref = first_child(doc, str_path, WSSE_REFERENCE)
    if token_ref is None:
        return _fail(stage, FailureCode.KEY_RESOLUTION, "KeyInfo holds no SecurityTokenReference")
    uri = doc.node_at(token_ref).get(URI) or ""
    if not uri.startswith("#") or len(uri) < 2:
        return _fail(stage, FailureCode.KEY_RESOLUTION, f"token reference {uri!r} is not a same-document ID")
    try:
        token = resolve_id(doc, uri[1:])
    except AmbiguityError as e:
        return _fail(stage, FailureCode.KEY_RESOLUTION, str(e))
    if not security.is_ancestor_of(token) or token.name != BINARY_SECURITY_TOKEN:
        return _fail(stage, FailureCode.KEY_RESOLUTION,
                     f"token reference {uri} resolves to {token}, outside the Signature's Security block")
    try:
        certificate = Certificate.from_base64(doc.node_at(token).text_content())
    except CryptoError as e:
        return _fail(stage, FailureCode.KEY_RESOLUTION, f"token at {token}: {e}")
    return None, {"certificate": certificate, "token_path": token}


def check_references(
    doc: XmlDocument,
    policy: SignaturePolicy,
    signature_path: NodePath,
    security_path: NodePath,
    signed_info_path: NodePath,
) -> Outcome:
    """
    Every Reference must carry a prefix-free FastXPath matching one policy
    expression, each policy expression exactly once, each selecting exactly
    one node that does not enclose the Signature.
    """
    stage = Stage.REFERENCE_CHECK
    matched = [False] * len(policy.expected_references)
    checked: List[CheckedReference] = []

    for reference in doc.child_paths(signed_info_path, REFERENCE):
        uri = doc.node_at(reference).get(URI)
        if uri != "":
            return _fail(stage, FailureCode.REFERENCE_SCHEME, f"non-FastXPath referencing scheme URI={uri!r} at {reference}")
        text, prefixes, problem = _filter_expression(doc, reference)
        if text is None:
            return _fail(stage, FailureCode.REFERENCE_SCHEME, f"{problem} at {reference}")
        try:
            expression = parse_fastxpath(text)
        except SubsetViolation as e:
            return _fail(stage, FailureCode.REFERENCE_SCHEME, f"reference at {reference} is not prefix-free FastXPath: {e}")

        slot = next(
            (i for i, expected in enumerate(policy.expected_references)
             if not matched[i] and expressions_equal(expected, expression)),
            None,
        )
        if slot is None:
            return _fail(stage, FailureCode.REFERENCE_MISMATCH,
                         f"reference {expression.to_text()} is not expected by policy {policy.name} or is repeated")
        matched[slot] = True

        targets = evaluate(expression, doc)
        if len(targets) != 1:
            return _fail(stage, FailureCode.REFERENCE_CARDINALITY,
                         f"reference {expression.to_text()} selects {len(targets)} nodes")
        if targets[0].contains(signature_path):
            return _fail(stage, FailureCode.REFERENCE_MISMATCH, f"reference target {targets[0]} encloses the Signature")
        checked.append(CheckedReference(expression=expression, target=targets[0],
                                        reference=reference, inclusive_prefixes=prefixes))

    missing = [policy.expected_references[i].to_text() for i, done in enumerate(matched) if not done]
    if missing:
        return _fail(stage, FailureCode.REFERENCE_CARDINALITY, f"expected reference(s) not signed: {missing}")

    failure, findings = _resolve_token(doc, signature_path, security_path)
    if failure is not None:
        return failure, {}
    findings["references"] = checked
    return None, findings


def _b64decode(text: str) -> Optional[bytes]:
    try:
        return base64.b64decode("".join(text.split()), validate=True)
    except (binascii.Error, ValueError):
        return None


def check_crypto(
    doc: XmlDocument,
    policy: SignaturePolicy,
    signature_path: NodePath,
    signed_info_path: NodePath,
    references: List[CheckedReference],
    certificate: Certificate,
    provider: Optional[CryptoProvider] = None,
) -> Outcome:
    """Algorithms equal the policy's, the key is trusted, every digest and the signature verify."""
    stage = Stage.CRYPTO
    provider = provider or DEFAULT_PROVIDER

    c14n_alg = doc.node_at(first_child(doc, signed_info_path, CANONICALIZATION_METHOD)).get(ALGORITHM)
    sig_alg = doc.node_at(first_child(doc, signed_info_path, SIGNATURE_METHOD)).get(ALGORITHM)
    if c14n_alg != policy.c14n_alg:
        return _fail(stage, FailureCode.ALGORITHM_MISMATCH, f"canonicalization {c14n_alg} differs from policy")
    if sig_alg != policy.sig_alg:
        return _fail(stage, FailureCode.ALGORITHM_MISMATCH, f"signature algorithm {sig_alg} differs from policy")

    if certificate.fingerprint not in policy.trust_anchors:
        return _fail(stage, FailureCode.UNTRUSTED_CERTIFICATE,
                     f"certificate {certificate.subject_fields.common_name} ({certificate.fingerprint}) is not trusted")

    for checked in references:
        ref = checked["reference"]
        digest_alg = doc.node_at(first_child(doc, ref, DIGEST_METHOD)).get(ALGORITHM)
        if digest_alg != policy.digest_alg:
            return _fail(stage, FailureCode.ALGORITHM_MISMATCH, f"digest algorithm {digest_alg} differs from policy")
        expected = _b64decode(doc.node_at(first_child(doc, ref, DIGEST_VALUE)).text_content())
        actual = provider.digest(canonicalize(doc, checked["target"], checked["inclusive_prefixes"]), digest_alg)
        if expected is None or not hmac.compare_digest(expected, actual):
            return _fail(stage, FailureCode.DIGEST_MISMATCH, f"digest of {checked['target']} does not match")

    value = _b64decode(doc.node_at(first_child(doc, signature_path, SIGNATURE_VALUE)).text_content())
    if not value:
        return _fail(stage, FailureCode.SIGNATURE_INVALID, "SignatureValue is empty or not base64")
    try:
        provider.verify(certificate, value, canonicalize(doc, signed_info_path), sig_alg)
    except CryptoError as e:
        return _fail(stage, FailureCode.SIGNATURE_INVALID, str(e))
    return None, {}
