import asyncio

from attack_forge import AttackKind
from cli.audit import audit, render_checklist
from xml_core import serialize
from xmldsig import STAGE_ORDER, FailureCode, Stage, VerificationWorkflow, verify_hardened
from xmldsig.states import VerificationConfig


def attack(fixtures, kind):
    return next(doc for variant, doc in fixtures.attacks if variant.kind is kind)


def statuses(report):
    return {result.stage: result.as_dict()["status"] for result in report.stage_results}


def test_every_stage_passes_for_the_benign_request(fixtures):
    report = VerificationWorkflow(fixtures.policy).run(fixtures.benign)
    assert report.accepted
    assert [r.stage for r in report.stage_results] == list(STAGE_ORDER)
    assert set(statuses(report).values()) == {"pass"}


def test_first_failure_stops_the_pipeline(fixtures):
    report = verify_hardened(attack(fixtures, AttackKind.SIBLING_VALUE_CHALLENGE), fixtures.policy)
    assert report.failure.stage is Stage.STRUCTURE
    assert report.failure.code is FailureCode.STRUCTURE_VIOLATION
    assert statuses(report) == {
        Stage.STRUCTURE: "fail",
        Stage.SIGNATURE_PRESENCE: "skipped",
        Stage.INSTRUCTIONS: "skipped",
        Stage.REFERENCE_CHECK: "skipped",
        Stage.CRYPTO: "skipped",
    }


def test_audit_mode_runs_the_remaining_stages(fixtures):
    report = verify_hardened(attack(fixtures, AttackKind.SIBLING_VALUE_CHALLENGE), fixtures.policy, audit=True)
    assert report.failure.stage is Stage.STRUCTURE
    assert statuses(report) == {
        Stage.STRUCTURE: "fail",
        Stage.SIGNATURE_PRESENCE: "pass",
        Stage.INSTRUCTIONS: "pass",
        Stage.REFERENCE_CHECK: "fail",
        Stage.CRYPTO: "skipped",
    }


def test_audit_and_normal_mode_agree_on_the_verdict(fixtures):
    documents = [fixtures.benign] + [doc for _, doc in fixtures.attacks]
    for doc in documents:
        normal = verify_hardened(doc, fixtures.policy)
        audited = verify_hardened(doc, fixtures.policy, audit=True)
        assert normal.verdict is audited.verdict
        assert normal.stage_reached is audited.stage_reached


def test_async_run_matches_sync_run(fixtures):
    workflow = VerificationWorkflow(fixtures.policy, VerificationConfig(log_stages=False))
    doc = attack(fixtures, AttackKind.SIMPLE_ANCESTRY_CHALLENGE)
    report = asyncio.run(workflow.arun(doc))
    assert report == workflow.run(doc)
    assert report.failure.stage is Stage.REFERENCE_CHECK


def test_audit_checklist(tmp_path, fixtures):
    path = tmp_path / "attack.xml"
    path.write_bytes(serialize(attack(fixtures, AttackKind.SIBLING_VALUE_CERTIFICATE)))
    result = audit(path, fixtures.policy)
    assert not result.accepted
    text = render_checklist(result)
    assert "  [PASS] structure" in text
    assert "  [FAIL] instructions" in text
    assert text.endswith("Verdict: REJECTED")
    assert result.to_dict()["first_failure_stage"] == "instructions"


def test_audit_of_the_benign_request(tmp_path, fixtures):
    path = tmp_path / "benign.xml"
    path.write_bytes(serialize(fixtures.benign))
    result = audit(path, fixtures.policy)
    assert result.accepted
    assert render_checklist(result).endswith("Verdict: ACCEPTED")
    assert [s["status"] for s in result.to_dict()["stages"]] == ["pass"] * 5
