from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from fastxpath import FastXPathExpr
from xml_core import NodePath
from xmldsig.crypto import Certificate, SubjectFields
from xmldsig.errors import NotAccepted


class Verdict(str, Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"


class Stage(str, Enum):
    STRUCTURE = "structure"
    SIGNATURE_PRESENCE = "signature-presence"
    INSTRUCTIONS = "instructions"
    REFERENCE_CHECK = "reference-check"
    CRYPTO = "crypto"


STAGE_ORDER: Tuple[Stage, ...] = (
    Stage.STRUCTURE,
    Stage.SIGNATURE_PRESENCE,
    Stage.INSTRUCTIONS,
    Stage.REFERENCE_CHECK,
    Stage.CRYPTO,
)


class FailureCode(str, Enum):
    STRUCTURE_VIOLATION = "structure-violation"
    SIGNATURE_MISSING = "signature-missing"
    SIGNATURE_MALFORMED = "signature-malformed"
    INSTRUCTION_VIOLATION = "instruction-violation"
    REFERENCE_SCHEME = "non-fastxpath-reference"
    REFERENCE_MISMATCH = "reference-mismatch"
    REFERENCE_CARDINALITY = "reference-cardinality"
    KEY_RESOLUTION = "key-resolution"
    ALGORITHM_MISMATCH = "algorithm-mismatch"
    UNTRUSTED_CERTIFICATE = "untrusted-certificate"
    DIGEST_MISMATCH = "digest-mismatch"
    SIGNATURE_INVALID = "signature-invalid"


@dataclass(frozen=True)
class StageFailure:
    stage: Stage
    reason: str
    code: FailureCode


@dataclass(frozen=True)
class StageResult:
    stage: Stage
    passed: bool
    detail: str = ""
    skipped: bool = False

    def as_dict(self) -> Dict[str, Any]:
        status = "skipped" if self.skipped else ("pass" if self.passed else "fail")
        return {"stage": self.stage.value, "status": status, "detail": self.detail}


@dataclass(frozen=True)
class VerifiedLocation:
    """A reference that verified, and the node its digest covered."""
    reference: str
    expression: Optional[FastXPathExpr]
    path: NodePath


@dataclass(frozen=True)
class VerificationReport:
    verdict: Verdict
    stage_reached: Stage
    verifier: str
    verified_locations: Tuple[VerifiedLocation, ...] = ()
    failure: Optional[StageFailure] = None
    signer_certificate: Optional[Certificate] = None
    verification_certificate: Optional[Certificate] = None
    stage_results: Tuple[StageResult, ...] = ()
    signer_token_path: Optional[NodePath] = None
    key_token_path: Optional[NodePath] = None

    def __post_init__(self):
        if self.verdict is Verdict.ACCEPTED:
            if self.failure is not None or self.signer_certificate is None or not self.verified_locations:
                raise ValueError("an accepted report needs locations, a signer and no failure")
        elif self.failure is None:
            raise ValueError("a rejected report needs a failure")

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPTED

    def location_for(self, expression: FastXPathExpr) -> Optional[VerifiedLocation]:
        for location in self.verified_locations:
            if location.expression is not None and location.expression.steps == expression.steps:
                return location
        return None

    def to_dict(self) -> Dict[str, Any]:
        """Flat, JSON-ready view of the report."""
        signer = self.signer_certificate.subject_fields if self.signer_certificate else None
        verifying = self.verification_certificate.subject_fields if self.verification_certificate else None
        return {
            "verdict": self.verdict.value,
            "verifier": self.verifier,
            "stage_reached": self.stage_reached.value,
            "failure_stage": self.failure.stage.value if self.failure else None,
            "failure_code": self.failure.code.value if self.failure else None,
            "failure_reason": self.failure.reason if self.failure else None,
            "signer_common_name": signer.common_name if signer else None,
            "signer_fingerprint": signer.fingerprint if signer else None,
            "verification_common_name": verifying.common_name if verifying else None,
            "verification_fingerprint": verifying.fingerprint if verifying else None,
            "verified_locations": [
                {
                    "reference": location.reference,
                    "expression": location.expression.to_text() if location.expression else None,
                    "path": str(location.path),
                }
                for location in self.verified_locations
            ],
            "stage_results": [result.as_dict() for result in self.stage_results],
        }


def extract_signer_identity(report: VerificationReport) -> SubjectFields:
    """Subject of the certificate the report vouches for; NotAccepted unless accepted."""
    if not report.accepted or report.signer_certificate is None:
        raise NotAccepted(f"report verdict is {report.verdict.value}; no identity can be taken from it")
    return report.signer_certificate.subject_fields
