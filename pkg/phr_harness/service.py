"""
The authentication service of the login protocol, runnable with the naive
or the hardened verifier.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

from phr_harness.assertions import Assertion, AssertionIssuer
from phr_harness.challenges import ChallengeStore
from phr_harness.errors import ChallengeError, Rejection, RejectionReason
from phr_harness.messages import build_challenge_response, challenge_in
from xml_core import XmlCoreError, XmlDocument, parse
from xmldsig import (
    FailureCode,
    SignaturePolicy,
    SigningKeyHandle,
    VerificationReport,
    extract_signer_identity,
    generate_identity,
    verify_hardened,
    verify_naive,
)
from xmldsig.layout import BODY, ENVELOPE

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    NAIVE = "naive"
    HARDENED = "hardened"


@dataclass(frozen=True)
class ServerMode:
    """Verification mode, fixed when the service starts."""
    mode: Mode
    policy: Optional[SignaturePolicy] = None
    trust: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is Mode.HARDENED and self.policy is None:
            raise ValueError("hardened mode needs a signature policy")
        if not self.trust and self.policy is not None:
            object.__setattr__(self, "trust", self.policy.trust_anchors)
        object.__setattr__(self, "trust", tuple(f.lower() for f in self.trust))

    @classmethod
    def hardened(cls, policy: SignaturePolicy) -> "ServerMode":
        return cls(Mode.HARDENED, policy)

    @classmethod
    def naive(cls, trust: Sequence[str]) -> "ServerMode":
        return cls(Mode.NAIVE, None, tuple(trust))


def _rejection_for(report: VerificationReport) -> Rejection:
    code = report.failure.code if report.failure else None
    reason = (
        RejectionReason.UNTRUSTED_CERTIFICATE
        if code is FailureCode.UNTRUSTED_CERTIFICATE
        else RejectionReason.SIGNATURE_INVALID
    )
    detail = f"{report.failure.stage.value}: {report.failure.reason}" if report.failure else "not accepted"
    return Rejection(reason, detail, report)


class AuthenticationService:
    """
    LoginCreateChallenge / LoginCreateToken.

    The challenge store is the only mutable state; verification is stateless.
    """

    def __init__(
        self,
        mode: ServerMode,
        store: Optional[ChallengeStore] = None,
        issuer: Optional[AssertionIssuer] = None,
        service_key: Optional[SigningKeyHandle] = None,
    ):
        self.mode = mode
        self.store = store or ChallengeStore()
        self.issuer = issuer or AssertionIssuer(service_key or generate_identity("PHR Authentication Service"))
        if mode.mode is Mode.NAIVE:
            logger.warning("=" * 72)
            logger.warning("UNSAFE: naive verification mode. ID references resolve to the first match and")
            logger.warning("UNSAFE: identity comes from the last Security block. For attack demos only.")
            logger.warning("=" * 72)
        else:
            logger.info(f"Authentication service in hardened mode with policy {mode.policy.name}")

    def login_create_challenge(self) -> XmlDocument:
        challenge = self.store.issue()
        return build_challenge_response(challenge.value)

    def verify(self, request: XmlDocument) -> VerificationReport:
        if self.mode.mode is Mode.HARDENED:
            return verify_hardened(request, self.mode.policy)
        return verify_naive(request, self.mode.trust)

    def _verified_challenge(self, request: XmlDocument, report: VerificationReport) -> str:
        """The challenge inside a node the signature actually covered."""
        for location in report.verified_locations:
            if location.path.name != BODY or location.path.depth != 2:
                continue
            value = challenge_in(request, location.path)
            if value:
                return value
        raise Rejection(RejectionReason.SIGNATURE_INVALID, "no verified Body carries a Challenge", report)

    def _last_body_challenge(self, request: XmlDocument) -> str:
        """Naive business logic: the last Body of the Envelope is the message."""
        bodies = request.child_paths(request.root_path, BODY) if request.root.name == ENVELOPE else []
        value = challenge_in(request, bodies[-1]) if bodies else None
        if not value:
            raise Rejection(RejectionReason.MALFORMED_REQUEST, "request carries no Challenge")
        return value

    def login_create_token(self, request: Union[XmlDocument, bytes]) -> Assertion:
        """
        Verify the signed request, consume its challenge and issue an assertion.

        Raises:
            Rejection: verification failed or the challenge is unknown,
                expired or already used
        """
        if isinstance(request, (bytes, bytearray)):
            try:
                request = parse(bytes(request))
            except XmlCoreError as e:
                raise Rejection(RejectionReason.MALFORMED_REQUEST, str(e)) from e

        report = self.verify(request)
        if not report.accepted:
            rejection = _rejection_for(report)
            logger.info(f"LoginCreateToken rejected ({self.mode.mode.value}): {rejection}")
            raise rejection

        if self.mode.mode is Mode.HARDENED:
            value = self._verified_challenge(request, report)
        else:
            value = self._last_body_challenge(request)

        try:
            self.store.consume(value)
        except ChallengeError as e:
            logger.info(f"LoginCreateToken rejected: {e}")
            raise Rejection(e.reason, str(e), report) from e

        return self.issuer.issue(extract_signer_identity(report))
