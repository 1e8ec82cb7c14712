"""
Client side of the login protocol: sign the challenge, and a small HTTP
client talking to the authentication service.
"""
import logging
from typing import Mapping, Optional

import httpx

from config.constants import SOAP_CONTENT_TYPE
from phr_harness.assertions import Assertion, verify_assertion
from phr_harness.errors import HarnessError, Rejection, RejectionReason
from phr_harness.messages import build_token_request, read_challenge_response
from xml_core import XmlCoreError, XmlDocument, parse, serialize
from xmldsig import Certificate, SignaturePolicy, SigningKeyHandle, sign, sign_with_id_references

logger = logging.getLogger(__name__)

FAULT_REASON_HEADER = "X-PHR-Rejection"


def client_sign_challenge(
    challenge: str,
    key: SigningKeyHandle,
    policy: SignaturePolicy,
    prefixes: Optional[Mapping[str, str]] = None,
) -> XmlDocument:
    """The LoginCreateToken request, signed with prefix-free references."""
    return sign(build_token_request(challenge, prefixes), policy, key)


def capture_id_signed_request(challenge: str, key: SigningKeyHandle) -> XmlDocument:
    """
    The same request signed the way deployed clients sign it, with an
    ``URI="#id"`` reference to the Body. This is what an attacker captures.
    """
    return sign_with_id_references(build_token_request(challenge), key)


class PhrClient:
    def __init__(
        self,
        base_url: str,
        key: SigningKeyHandle,
        policy: SignaturePolicy,
        transport: Optional[httpx.BaseTransport] = None,
        timeout: float = 10.0,
    ):
        self.key = key
        self.policy = policy
        self._http = httpx.Client(base_url=base_url, transport=transport, timeout=timeout)

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "PhrClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _post(self, operation: str, body: bytes = b"") -> httpx.Response:
        try:
            return self._http.post(f"/{operation}", content=body, headers={"Content-Type": SOAP_CONTENT_TYPE})
        except httpx.HTTPError as e:
            raise HarnessError(f"{operation} failed: {e}") from e

    def create_challenge(self) -> str:
        response = self._post("LoginCreateChallenge")
        if response.status_code != 200:
            raise HarnessError(f"LoginCreateChallenge returned HTTP {response.status_code}")
        try:
            return read_challenge_response(parse(response.content))
        except (XmlCoreError, ValueError) as e:
            raise HarnessError(f"unreadable challenge response: {e}") from e

    def submit(self, request: XmlDocument) -> XmlDocument:
        """Send a signed LoginCreateToken request; returns the assertion document."""
        response = self._post("LoginCreateToken", serialize(request))
        if response.status_code == 403:
            reason = response.headers.get(FAULT_REASON_HEADER, RejectionReason.SIGNATURE_INVALID.value)
            raise Rejection(RejectionReason(reason), response.text)
        if response.status_code != 200:
            raise HarnessError(f"LoginCreateToken returned HTTP {response.status_code}")
        try:
            return parse(response.content)
        except XmlCoreError as e:
            raise HarnessError(f"unreadable assertion: {e}") from e

    def login(self, service_certificate: Optional[Certificate] = None) -> XmlDocument:
        """
        Run the whole protocol. With ``service_certificate`` the assertion's
        signature is checked before it is returned.

        Raises:
            Rejection: the service refused the request
            HarnessError: transport or message failures
        """
        challenge = self.create_challenge()
        logger.info(f"Received challenge {challenge}")
        assertion = self.submit(client_sign_challenge(challenge, self.key, self.policy))
        if service_certificate is not None:
            checked: Assertion = verify_assertion(assertion, service_certificate)
            logger.info(f"Assertion {checked.assertion_id} verified for CN={checked.subject.common_name}")
        return assertion
