"""
Deliberately vulnerable verification, modelled on how ID-referencing stacks
process XML Signature:

* ``URI="#id"`` resolves to the first element carrying the ID, wherever it is;
* the key comes from whatever element the SecurityTokenReference ID hits first;
* the identity handed to business logic is the token of the last Security
  header block, which is where such stacks bind the caller;
* no structure or instruction checks are made.

Used as the attack target. Never use it to make a real decision.
"""
import base64
import binascii
import hmac
import logging
from typing import List, Optional, Sequence, Tuple

from config.constants import EXC_C14N, XPATH_FILTER2
from fastxpath import FastXPathExpr, SubsetViolation, evaluate, parse_fastxpath
from xml_core import NodePath, XmlDocument, canonicalize, first_id_match
from xmldsig.crypto import DEFAULT_PROVIDER, DIGEST_ALGORITHMS, SIGNATURE_ALGORITHMS, Certificate, CryptoProvider
from xmldsig.errors import CryptoError
from xmldsig.layout import (
    ALGORITHM,
    BINARY_SECURITY_TOKEN,
    CANONICALIZATION_METHOD,
    DIGEST_METHOD,
    DIGEST_VALUE,
    FILTER_XPATH,
    INCLUSIVE_NAMESPACES,
    KEY_INFO,
    PREFIX_LIST,
    REFERENCE,
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
    security_paths,
)
from xmldsig.report import FailureCode, Stage, StageFailure, Verdict, VerificationReport, VerifiedLocation

logger = logging.getLogger(__name__)


def _reject(stage: Stage, code: FailureCode, reason: str) -> VerificationReport:
    logger.debug(f"naive verifier rejects at {stage.value}: {reason}")
    return VerificationReport(
        verdict=Verdict.REJECTED,
        stage_reached=stage,
        verifier="naive",
        failure=StageFailure(stage, reason, code),
    )


def _b64(text: str) -> Optional[bytes]:
    try:
        return base64.b64decode("".join(text.split()), validate=True)
    except (binascii.Error, ValueError):
        return None


def _transforms(doc: XmlDocument, reference: NodePath) -> Tuple[Optional[str], Tuple[str, ...]]:
    """First filter XPath text (if any) and the inclusive prefixes of the reference."""
    xpath_text, prefixes = None, ()
    transforms = first_child(doc, reference, TRANSFORMS)
    if transforms is None:
        return None, ()
    for transform in doc.child_paths(transforms, TRANSFORM):
        algorithm = doc.node_at(transform).get(ALGORITHM)
        if algorithm == XPATH_FILTER2 and xpath_text is None:
            xpath = first_child(doc, transform, FILTER_XPATH)
            if xpath is not None:
                xpath_text = doc.node_at(xpath).text_content()
        elif algorithm == EXC_C14N:
            inclusive = first_child(doc, transform, INCLUSIVE_NAMESPACES)
            if inclusive is not None:
                prefixes = tuple((doc.node_at(inclusive).get(PREFIX_LIST) or "").split())
    return xpath_text, prefixes


def _key_certificate(doc: XmlDocument, signature: NodePath) -> Tuple[Optional[Certificate], Optional[NodePath], str]:
    token: Optional[NodePath] = None
    key_info = first_child(doc, signature, KEY_INFO)
    str_path = first_child(doc, key_info, SECURITY_TOKEN_REFERENCE) if key_info else None
    ref = first_child(doc, str_path, WSSE_REFERENCE) if str_path else None
    if ref is not None:
        uri = doc.node_at(ref).get(URI) or ""
        token = first_id_match(doc, uri[1:]) if uri.startswith("#") else None
    if token is None:
        tokens = doc.paths_named(BINARY_SECURITY_TOKEN)
        token = tokens[0] if tokens else None
    if token is None:
        return None, None, "no BinarySecurityToken found"
    try:
        return Certificate.from_base64(doc.node_at(token).text_content()), token, ""
    except CryptoError as e:
        return None, token, f"token at {token}: {e}"


def _identity_token(doc: XmlDocument) -> Optional[NodePath]:
    """Token of the last Security header block, as header-processing business logic binds it."""
    for security in reversed(security_paths(doc)):
        tokens = doc.child_paths(security, BINARY_SECURITY_TOKEN)
        if tokens:
            return tokens[0]
    return None


def verify_naive(
    doc: XmlDocument,
    trust: Sequence[str],
    provider: Optional[CryptoProvider] = None,
) -> VerificationReport:
    """Verify as an ID-referencing stack would. Reports only; never raises for hostile input."""
    provider = provider or DEFAULT_PROVIDER
    trusted = {fingerprint.lower() for fingerprint in trust}

    signatures = doc.paths_named(SIGNATURE)
    if not signatures:
        return _reject(Stage.SIGNATURE_PRESENCE, FailureCode.SIGNATURE_MISSING, "no Signature element")
    signature = signatures[0]
    signed_info = first_child(doc, signature, SIGNED_INFO)
    c14n_method = first_child(doc, signed_info, CANONICALIZATION_METHOD) if signed_info else None
    sig_method = first_child(doc, signed_info, SIGNATURE_METHOD) if signed_info else None
    if signed_info is None or c14n_method is None or sig_method is None:
        return _reject(Stage.SIGNATURE_PRESENCE, FailureCode.SIGNATURE_MALFORMED, "SignedInfo is incomplete")

    located: List[Tuple[NodePath, str, Optional[FastXPathExpr], NodePath, Tuple[str, ...]]] = []
    for reference in doc.child_paths(signed_info, REFERENCE):
        uri = doc.node_at(reference).get(URI) or ""
        xpath_text, prefixes = _transforms(doc, reference)
        expression = None
        if uri.startswith("#"):
            target = first_id_match(doc, uri[1:])
        elif uri == "" and xpath_text is not None:
            try:
                expression = parse_fastxpath(xpath_text)
            except SubsetViolation as e:
                return _reject(Stage.REFERENCE_CHECK, FailureCode.REFERENCE_SCHEME, f"unsupported XPath: {e}")
            matches = evaluate(expression, doc)
            target = matches[0] if matches else None
        else:
            return _reject(Stage.REFERENCE_CHECK, FailureCode.REFERENCE_SCHEME, f"unsupported reference URI={uri!r}")
        if target is None:
            return _reject(Stage.REFERENCE_CHECK, FailureCode.REFERENCE_MISMATCH, f"reference {uri or xpath_text} resolves to nothing")
        located.append((reference, uri, expression, target, prefixes))
    if not located:
        return _reject(Stage.SIGNATURE_PRESENCE, FailureCode.SIGNATURE_MALFORMED, "SignedInfo holds no Reference")

    key_cert, key_token, problem = _key_certificate(doc, signature)
    if key_cert is None:
        return _reject(Stage.REFERENCE_CHECK, FailureCode.KEY_RESOLUTION, problem)

    c14n_alg = doc.node_at(c14n_method).get(ALGORITHM)
    sig_alg = doc.node_at(sig_method).get(ALGORITHM)
    if c14n_alg != EXC_C14N or sig_alg not in SIGNATURE_ALGORITHMS:
        return _reject(Stage.CRYPTO, FailureCode.ALGORITHM_MISMATCH, f"unsupported algorithms {c14n_alg}, {sig_alg}")
    if key_cert.fingerprint not in trusted:
        return _reject(Stage.CRYPTO, FailureCode.UNTRUSTED_CERTIFICATE, f"certificate {key_cert.fingerprint} is not trusted")

    for reference, uri, _, target, prefixes in located:
        method = first_child(doc, reference, DIGEST_METHOD)
        value = first_child(doc, reference, DIGEST_VALUE)
        digest_alg = doc.node_at(method).get(ALGORITHM) if method else None
        if digest_alg not in DIGEST_ALGORITHMS or value is None:
            return _reject(Stage.CRYPTO, FailureCode.ALGORITHM_MISMATCH, f"unsupported digest on {reference}")
        expected = _b64(doc.node_at(value).text_content())
        actual = provider.digest(canonicalize(doc, target, prefixes), digest_alg)
        if expected is None or not hmac.compare_digest(expected, actual):
            return _reject(Stage.CRYPTO, FailureCode.DIGEST_MISMATCH, f"digest of {target} does not match")

    sig_value_path = first_child(doc, signature, SIGNATURE_VALUE)
    sig_value = _b64(doc.node_at(sig_value_path).text_content()) if sig_value_path else None
    if not sig_value:
        return _reject(Stage.CRYPTO, FailureCode.SIGNATURE_INVALID, "SignatureValue is empty or not base64")
    try:
        provider.verify(key_cert, sig_value, canonicalize(doc, signed_info), sig_alg)
    except CryptoError as e:
        return _reject(Stage.CRYPTO, FailureCode.SIGNATURE_INVALID, str(e))

    identity_token = _identity_token(doc)
    signer = key_cert
    if identity_token is not None:
        try:
            signer = Certificate.from_base64(doc.node_at(identity_token).text_content())
        except CryptoError:
            identity_token = key_token
    else:
        identity_token = key_token

    return VerificationReport(
        verdict=Verdict.ACCEPTED,
        stage_reached=Stage.CRYPTO,
        verifier="naive",
        verified_locations=tuple(
            VerifiedLocation(uri or (expression.to_text() if expression else ""), expression, target)
            for _, uri, expression, target, _ in located
        ),
        signer_certificate=signer,
        verification_certificate=key_cert,
        signer_token_path=identity_token,
        key_token_path=key_token,
    )
