"""
Minimal signed login confirmation.

The assertion is an XML element in its own namespace carrying the subject of
the authenticated certificate and its validity window, signed by the service
key over the exclusive canonical form of the element without its
SignatureValue child.
"""
import base64
import binascii
import datetime
import logging
import time
import uuid
from dataclasses import dataclass
from typing import Callable, Optional

from config.constants import ASSERTION_NS, PHR_ASSERTION_LIFETIME_SECONDS, SIG_RSA_PSS_SHA256
from phr_harness.errors import HarnessError
from xml_core import QName, XmlAttribute, XmlDocument, XmlNode, canonicalize_node, element, text_node
from xmldsig import DEFAULT_PROVIDER, Certificate, CryptoError, CryptoProvider, SigningKeyHandle, SubjectFields

logger = logging.getLogger(__name__)

ASSERTION = QName("Assertion", ASSERTION_NS)
SUBJECT = QName("Subject", ASSERTION_NS)
COMMON_NAME = QName("CommonName", ASSERTION_NS)
SUBJECT_DN = QName("SubjectDN", ASSERTION_NS)
ISSUER_DN = QName("IssuerDN", ASSERTION_NS)
FINGERPRINT = QName("Fingerprint", ASSERTION_NS)
SIGNATURE_VALUE = QName("SignatureValue", ASSERTION_NS)
ASSERTION_ID = QName("AssertionID")
ISSUE_INSTANT = QName("IssueInstant")
NOT_ON_OR_AFTER = QName("NotOnOrAfter")

_PREFIX = "a"


def _timestamp(seconds: float) -> str:
    return datetime.datetime.fromtimestamp(seconds, tz=datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _seconds(text: str) -> float:
    parsed = datetime.datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ")
    return parsed.replace(tzinfo=datetime.timezone.utc).timestamp()


@dataclass(frozen=True)
class Assertion:
    assertion_id: str
    subject: SubjectFields
    issued_at: float
    expires_at: float
    signature: bytes
    document: XmlDocument

    def as_dict(self):
        return {
            "assertion_id": self.assertion_id,
            "subject": self.subject.as_dict(),
            "issued_at": _timestamp(self.issued_at),
            "expires_at": _timestamp(self.expires_at),
        }


def _leaf(name: QName, value: str) -> XmlNode:
    return element(name, prefix=_PREFIX, children=[text_node(value)])


def _unsigned_assertion(assertion_id: str, subject: SubjectFields, issued_at: float, expires_at: float) -> XmlNode:
    return element(
        ASSERTION,
        prefix=_PREFIX,
        namespace_decls=[(_PREFIX, ASSERTION_NS)],
        attributes=[
            XmlAttribute(ASSERTION_ID, assertion_id),
            XmlAttribute(ISSUE_INSTANT, _timestamp(issued_at)),
            XmlAttribute(NOT_ON_OR_AFTER, _timestamp(expires_at)),
        ],
        children=[
            element(SUBJECT, prefix=_PREFIX, children=[
                _leaf(COMMON_NAME, subject.common_name),
                _leaf(SUBJECT_DN, subject.subject),
                _leaf(ISSUER_DN, subject.issuer),
                _leaf(FINGERPRINT, subject.fingerprint),
            ]),
        ],
    )


class AssertionIssuer:
    """Signs assertions with the service key."""

    def __init__(
        self,
        key: SigningKeyHandle,
        lifetime_seconds: float = PHR_ASSERTION_LIFETIME_SECONDS,
        clock: Callable[[], float] = time.time,
        provider: Optional[CryptoProvider] = None,
    ):
        self.key = key
        self.lifetime_seconds = lifetime_seconds
        self._clock = clock
        self._provider = provider or DEFAULT_PROVIDER

    @property
    def certificate(self) -> Certificate:
        return self.key.certificate

    def issue(self, subject: SubjectFields) -> Assertion:
        # Whole seconds, since the timestamps are rendered at that precision
        issued_at = float(int(self._clock()))
        expires_at = issued_at + self.lifetime_seconds
        assertion_id = f"_{uuid.uuid4().hex}"
        body = _unsigned_assertion(assertion_id, subject, issued_at, expires_at)
        signature = self.key.sign(canonicalize_node(body), SIG_RSA_PSS_SHA256, self._provider)
        signed = body.with_children(list(body.children) + [
            _leaf(SIGNATURE_VALUE, base64.b64encode(signature).decode("ascii")),
        ])
        logger.info(f"Issued assertion {assertion_id} for CN={subject.common_name}")
        return Assertion(assertion_id, subject, issued_at, expires_at, signature, XmlDocument(signed))


def verify_assertion(
    doc: XmlDocument,
    service_certificate: Certificate,
    provider: Optional[CryptoProvider] = None,
) -> Assertion:
    """
    Check an assertion's signature under the service certificate.

    Raises:
        HarnessError: the document is not an assertion or the signature fails
    """
    root = doc.root
    if root.name != ASSERTION:
        raise HarnessError(f"document root is {root.name}, not an assertion")
    signature_nodes = [c for c in root.element_children() if c.name == SIGNATURE_VALUE]
    subject_nodes = [c for c in root.element_children() if c.name == SUBJECT]
    if len(signature_nodes) != 1 or len(subject_nodes) != 1:
        raise HarnessError("assertion must hold one Subject and one SignatureValue")
    try:
        signature = base64.b64decode(signature_nodes[0].text_content(), validate=True)
    except (binascii.Error, ValueError) as e:
        raise HarnessError(f"assertion signature is not base64: {e}") from e

    body = root.with_children([c for c in root.children if not (c.is_element and c.name == SIGNATURE_VALUE)])
    try:
        (provider or DEFAULT_PROVIDER).verify(service_certificate, signature, canonicalize_node(body), SIG_RSA_PSS_SHA256)
    except CryptoError as e:
        raise HarnessError(f"assertion signature does not verify: {e}") from e

    fields = {c.name: c.text_content() for c in subject_nodes[0].element_children()}
    subject = SubjectFields(
        common_name=fields.get(COMMON_NAME, ""),
        subject=fields.get(SUBJECT_DN, ""),
        issuer=fields.get(ISSUER_DN, ""),
        fingerprint=fields.get(FINGERPRINT, ""),
    )
    return Assertion(
        assertion_id=root.get(ASSERTION_ID) or "",
        subject=subject,
        issued_at=_seconds(root.get(ISSUE_INSTANT) or ""),
        expires_at=_seconds(root.get(NOT_ON_OR_AFTER) or ""),
        signature=signature,
        document=doc,
    )
