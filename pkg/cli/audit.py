"""
Auditor view of the verification pipeline: every stage runs and is reported,
even after a failure.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Union

from xml_core import parse
from xmldsig import SignaturePolicy, StageResult, VerificationReport, verify_hardened

logger = logging.getLogger(__name__)

_MARKS = {"pass": "PASS", "fail": "FAIL", "skipped": "SKIP"}


@dataclass(frozen=True)
class AuditReport:
    source: str
    policy: str
    report: VerificationReport

    @property
    def stages(self) -> List[StageResult]:
        return list(self.report.stage_results)

    @property
    def accepted(self) -> bool:
        return self.report.accepted

    def to_dict(self) -> Dict[str, Any]:
        return {
            "source": self.source,
            "policy": self.policy,
            "verdict": self.report.verdict.value,
            "first_failure_stage": self.report.failure.stage.value if self.report.failure else None,
            "stages": [result.as_dict() for result in self.stages],
        }


def audit(doc_file: Union[str, Path], policy: SignaturePolicy) -> AuditReport:
    """
    Run the hardened pipeline in report-everything mode.

    Raises:
        OSError: the file cannot be read
        XmlCoreError: the file does not parse
    """
    data = Path(doc_file).read_bytes()
    report = verify_hardened(parse(data), policy, audit=True)
    logger.debug(f"Audited {doc_file}: {report.verdict.value}")
    return AuditReport(str(doc_file), policy.name, report)


def render_checklist(result: AuditReport) -> str:
    lines = [f"Audit of {result.source} under policy {result.policy}", ""]
    for stage in result.stages:
        status = stage.as_dict()["status"]
        line = f"  [{_MARKS[status]}] {stage.stage.value}"
        if stage.detail:
            line += f": {stage.detail}"
        lines.append(line)
    lines.append("")
    lines.append(f"Verdict: {result.report.verdict.value.upper()}")
    return "\n".join(lines)
