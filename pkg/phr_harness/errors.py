from enum import Enum


class HarnessError(Exception):
    """Base exception for the authentication harness."""
    pass


class RejectionReason(str, Enum):
    SIGNATURE_INVALID = "signature-invalid"
    CHALLENGE_UNKNOWN = "challenge-unknown"
    CHALLENGE_EXPIRED = "challenge-expired"
    CHALLENGE_REPLAYED = "challenge-replayed"
    UNTRUSTED_CERTIFICATE = "untrusted-certificate"
    MALFORMED_REQUEST = "malformed-request"


class Rejection(HarnessError):
    """Raised when LoginCreateToken refuses to issue an assertion."""

    def __init__(self, reason: RejectionReason, detail: str = "", report=None):
        self.reason = RejectionReason(reason)
        self.detail = detail
        self.report = report
        super().__init__(f"{self.reason.value}: {detail}" if detail else self.reason.value)


class ChallengeError(HarnessError):
    """Base exception for challenge store failures."""
    reason = RejectionReason.CHALLENGE_UNKNOWN


class ChallengeUnknown(ChallengeError):
    """Raised for a challenge the store never issued or has already evicted."""
    reason = RejectionReason.CHALLENGE_UNKNOWN


class ChallengeExpired(ChallengeError):
    """Raised for a challenge older than its time to live."""
    reason = RejectionReason.CHALLENGE_EXPIRED


class ChallengeReplayed(ChallengeError):
    """Raised for a challenge that was already consumed."""
    reason = RejectionReason.CHALLENGE_REPLAYED
