"""
In-process run of the login protocol: one honest login, then each PHR attack
replayed against the same service with a freshly issued challenge.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from attack_forge import CHALLENGE_KINDS, PHR_KINDS, AttackVariant, forge
from phr_harness.client import capture_id_signed_request, client_sign_challenge
from phr_harness.errors import Rejection
from phr_harness.messages import read_challenge_response
from phr_harness.service import AuthenticationService
from xmldsig import SignaturePolicy, SigningKeyHandle

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SessionOutcome:
    request: str
    accepted: bool
    subject: Optional[str] = None
    reason: Optional[str] = None
    detail: str = ""

    def as_dict(self) -> Dict[str, Any]:
        return {
            "request": self.request,
            "accepted": self.accepted,
            "subject": self.subject,
            "reason": self.reason,
            "detail": self.detail,
        }


def _submit(service: AuthenticationService, name: str, request) -> SessionOutcome:
    try:
        assertion = service.login_create_token(request)
    except Rejection as e:
        logger.info(f"{name}: rejected ({e.reason.value})")
        return SessionOutcome(name, False, reason=e.reason.value, detail=e.detail)
    logger.info(f"{name}: assertion issued for CN={assertion.subject.common_name}")
    return SessionOutcome(name, True, subject=assertion.subject.common_name)


def simulate_session(
    service: AuthenticationService,
    client: SigningKeyHandle,
    attacker: SigningKeyHandle,
    policy: SignaturePolicy,
) -> List[SessionOutcome]:
    """
    The challenge attacks reuse a request captured from an ID-referencing
    client after its login went through; the certificate attacks rewrite a
    request intercepted in flight. Every attempt uses a challenge freshly
    issued by ``service``.
    """
    outcomes = []
    challenge = read_challenge_response(service.login_create_challenge())
    outcomes.append(_submit(service, "honest-login", client_sign_challenge(challenge, client, policy)))

    earlier = read_challenge_response(service.login_create_challenge())
    captured = capture_id_signed_request(earlier, client)
    outcomes.append(_submit(service, "id-referenced-login", captured))
    outcomes.append(_submit(service, "captured-replay", captured))

    for kind in PHR_KINDS:
        fresh = read_challenge_response(service.login_create_challenge())
        if kind in CHALLENGE_KINDS:
            forged = forge(captured, AttackVariant(kind, fresh))
        else:
            intercepted = capture_id_signed_request(fresh, client)
            forged = forge(intercepted, AttackVariant(kind, attacker.certificate.der))
        outcomes.append(_submit(service, kind.value, forged))
    return outcomes
