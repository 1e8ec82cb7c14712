from phr_harness.errors import (
    ChallengeError,
    ChallengeExpired,
    ChallengeReplayed,
    ChallengeUnknown,
    HarnessError,
    Rejection,
    RejectionReason,
)
from phr_harness.challenges import Challenge, ChallengeState, ChallengeStore, new_challenge_value
from phr_harness.messages import build_challenge_response, build_token_request, challenge_in, read_challenge_response
from phr_harness.assertions import Assertion, AssertionIssuer, verify_assertion
from phr_harness.service import AuthenticationService, Mode, ServerMode
from phr_harness.client import PhrClient, capture_id_signed_request, client_sign_challenge
from phr_harness.matrix import (
    BENIGN,
    BENIGN_PREFIX_PROBE,
    FixtureSet,
    MatrixCell,
    MatrixReport,
    build_fixture_set,
    run_fixture_matrix,
    run_matrix,
)
from phr_harness.simulation import SessionOutcome, simulate_session

__all__ = [
    "ChallengeError",
    "ChallengeExpired",
    "ChallengeReplayed",
    "ChallengeUnknown",
    "HarnessError",
    "Rejection",
    "RejectionReason",
    "Challenge",
    "ChallengeState",
    "ChallengeStore",
    "new_challenge_value",
    "build_challenge_response",
    "build_token_request",
    "challenge_in",
    "read_challenge_response",
    "Assertion",
    "AssertionIssuer",
    "verify_assertion",
    "AuthenticationService",
    "Mode",
    "ServerMode",
    "PhrClient",
    "capture_id_signed_request",
    "client_sign_challenge",
    "BENIGN",
    "BENIGN_PREFIX_PROBE",
    "FixtureSet",
    "MatrixCell",
    "MatrixReport",
    "build_fixture_set",
    "run_fixture_matrix",
    "run_matrix",
    "SessionOutcome",
    "simulate_session",
]
