"""
Differential attack matrix: every document against both verifiers.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from attack_forge import PHR_KINDS, AttackKind, AttackVariant, forge, forge_all
from phr_harness.client import capture_id_signed_request, client_sign_challenge
from phr_harness.challenges import new_challenge_value
from xml_core import XmlDocument
from xmldsig import SignaturePolicy, SigningKeyHandle, generate_identity, load_policy, verify_hardened, verify_naive

logger = logging.getLogger(__name__)

BENIGN = "benign"
MODES = ("naive", "hardened")
BENIGN_PREFIX_PROBE = "prefix-redefinition-benign"


@dataclass(frozen=True)
class FixtureSet:
    """Everything the matrix needs, built from two fresh identities."""
    client: SigningKeyHandle
    attacker: SigningKeyHandle
    policy: SignaturePolicy
    signed_challenge: str
    fresh_challenge: str
    benign: XmlDocument
    captured: XmlDocument
    attacks: Tuple[Tuple[AttackVariant, XmlDocument], ...]
    probes: Tuple[Tuple[str, XmlDocument], ...]


def build_fixture_set(
    policy_name: str = "phr",
    client: Optional[SigningKeyHandle] = None,
    attacker: Optional[SigningKeyHandle] = None,
) -> FixtureSet:
    """
    The benign request is signed with prefix-free references; the attacks are
    forged from an ID-referenced capture of an earlier login, carrying a
    challenge the attacker did not sign.
    """
    client = client or generate_identity("TestPatient")
    attacker = attacker or generate_identity("Attacker")
    policy = load_policy(policy_name).with_trust([client.certificate.fingerprint])

    signed_challenge = new_challenge_value()
    fresh_challenge = new_challenge_value()
    benign = client_sign_challenge(signed_challenge, client, policy)
    captured = capture_id_signed_request(signed_challenge, client)
    attacks = tuple(forge_all(captured, fresh_challenge, attacker.certificate.der))
    probe = forge(benign, AttackVariant(AttackKind.PREFIX_REDEFINITION))
    return FixtureSet(
        client=client,
        attacker=attacker,
        policy=policy,
        signed_challenge=signed_challenge,
        fresh_challenge=fresh_challenge,
        benign=benign,
        captured=captured,
        attacks=attacks,
        probes=((BENIGN_PREFIX_PROBE, probe),),
    )


@dataclass(frozen=True)
class MatrixCell:
    document: str
    mode: str
    verdict: str
    stage: Optional[str] = None
    code: Optional[str] = None
    signer: Optional[str] = None

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"

    def as_dict(self) -> Dict[str, Any]:
        return {
            "document": self.document,
            "mode": self.mode,
            "verdict": self.verdict,
            "stage": self.stage,
            "code": self.code,
            "signer": self.signer,
        }


@dataclass
class MatrixReport:
    cells: List[MatrixCell] = field(default_factory=list)
    probes: List[MatrixCell] = field(default_factory=list)

    def cell(self, document: str, mode: str) -> MatrixCell:
        for cell in self.cells + self.probes:
            if cell.document == document and cell.mode == mode:
                return cell
        raise KeyError(f"no cell for {document} / {mode}")

    @property
    def documents(self) -> List[str]:
        return list(dict.fromkeys(cell.document for cell in self.cells))

    def row(self, mode: str) -> Dict[str, MatrixCell]:
        return {cell.document: cell for cell in self.cells if cell.mode == mode}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cells": [cell.as_dict() for cell in self.cells],
            "probes": [cell.as_dict() for cell in self.probes],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MatrixReport":
        return cls(
            cells=[MatrixCell(**cell) for cell in data.get("cells", [])],
            probes=[MatrixCell(**cell) for cell in data.get("probes", [])],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MatrixReport":
        return cls.from_dict(json.loads(text))


def _run_cell(name: str, doc: XmlDocument, mode: str, policy: SignaturePolicy) -> MatrixCell:
    if mode == "hardened":
        report = verify_hardened(doc, policy)
    else:
        report = verify_naive(doc, policy.trust_anchors)
    signer = report.signer_certificate.subject_fields.common_name if report.accepted else None
    cell = MatrixCell(
        document=name,
        mode=mode,
        verdict=report.verdict.value,
        stage=report.failure.stage.value if report.failure else None,
        code=report.failure.code.value if report.failure else None,
        signer=signer,
    )
    logger.info(f"{name:<32} {mode:<9} {cell.verdict}{f' at {cell.stage}' if cell.stage else ''}")
    return cell


def run_matrix(
    benign: XmlDocument,
    attacks: Iterable[Tuple[AttackVariant, XmlDocument]],
    policy: SignaturePolicy,
    probes: Sequence[Tuple[str, XmlDocument]] = (),
) -> MatrixReport:
    """
    Verify the benign document and each PHR attack in both modes. Other
    forged documents (the prefix-redefinition probe) and ``probes`` go into
    the separate probe section.
    """
    documents: List[Tuple[str, XmlDocument]] = [(BENIGN, benign)]
    probe_documents: List[Tuple[str, XmlDocument]] = []
    for variant, doc in attacks:
        (documents if variant.kind in PHR_KINDS else probe_documents).append((variant.label, doc))
    probe_documents.extend(probes)

    report = MatrixReport()
    for name, doc in documents:
        for mode in MODES:
            report.cells.append(_run_cell(name, doc, mode, policy))
    for name, doc in probe_documents:
        for mode in MODES:
            report.probes.append(_run_cell(name, doc, mode, policy))
    return report


def run_fixture_matrix(fixtures: Optional[FixtureSet] = None) -> MatrixReport:
    fixtures = fixtures or build_fixture_set()
    return run_matrix(fixtures.benign, fixtures.attacks, fixtures.policy, fixtures.probes)
