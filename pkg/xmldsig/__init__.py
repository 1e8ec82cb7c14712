from xmldsig.errors import CryptoError, NotAccepted, PolicyLoadError, PolicyViolation, XmlDsigError
from xmldsig.crypto import (
    DEFAULT_PROVIDER,
    Certificate,
    CryptoProvider,
    SigningKeyHandle,
    SubjectFields,
    VerifyKeyHandle,
    generate_identity,
    identity_to_pem,
    load_certificate,
    load_signing_key,
    save_identity,
)
from xmldsig.policy import SignaturePolicy, load_policy
from xmldsig.report import (
    STAGE_ORDER,
    FailureCode,
    Stage,
    StageFailure,
    StageResult,
    Verdict,
    VerificationReport,
    VerifiedLocation,
    extract_signer_identity,
)
from xmldsig.signer import BODY_EXPRESSION, ensure_security_token, sign, sign_with_id_references
from xmldsig.workflow import VerificationWorkflow, verify_hardened
from xmldsig.naive import verify_naive

__all__ = [
    "CryptoError",
    "NotAccepted",
    "PolicyLoadError",
    "PolicyViolation",
    "XmlDsigError",
    "DEFAULT_PROVIDER",
    "Certificate",
    "CryptoProvider",
    "SigningKeyHandle",
    "SubjectFields",
    "VerifyKeyHandle",
    "generate_identity",
    "identity_to_pem",
    "load_certificate",
    "load_signing_key",
    "save_identity",
    "SignaturePolicy",
    "load_policy",
    "STAGE_ORDER",
    "FailureCode",
    "Stage",
    "StageFailure",
    "StageResult",
    "Verdict",
    "VerificationReport",
    "VerifiedLocation",
    "extract_signer_identity",
    "BODY_EXPRESSION",
    "ensure_security_token",
    "sign",
    "sign_with_id_references",
    "VerificationWorkflow",
    "verify_hardened",
    "verify_naive",
]
