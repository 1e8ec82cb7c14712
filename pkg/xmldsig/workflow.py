# Standard library imports
import logging
import traceback
from functools import lru_cache
from typing import Dict, Optional

# Third-party imports
from langgraph.graph import END, START, StateGraph

# Local application imports
from xml_core import XmlDocument
from xmldsig import stages
from xmldsig.crypto import CryptoProvider
from xmldsig.policy import SignaturePolicy
from xmldsig.report import (
    STAGE_ORDER,
    FailureCode,
    Stage,
    StageFailure,
    StageResult,
    Verdict,
    VerificationReport,
    VerifiedLocation,
)
from xmldsig.states import VerificationConfig, VerificationState

logger = logging.getLogger(__name__)

# Findings each stage needs from earlier ones; a stage whose inputs are missing is skipped.
_REQUIRES = {
    Stage.STRUCTURE: (),
    Stage.SIGNATURE_PRESENCE: (),
    Stage.INSTRUCTIONS: (),
    Stage.REFERENCE_CHECK: ("signature_path", "security_path", "signed_info_path"),
    Stage.CRYPTO: ("signature_path", "signed_info_path", "references", "certificate"),
}


class VerificationWorkflow:
    """Hardened verification as a graph: one node per stage, stop at the first failure"""

    def __init__(
        self,
        policy: SignaturePolicy,
        config: Optional[VerificationConfig] = None,
        provider: Optional[CryptoProvider] = None,
    ):
        self.policy = policy
        self.config = config or VerificationConfig()
        self.provider = provider
        self.graph = self._create_workflow()

    def _create_workflow(self):
        """Creates the stage graph with a router after every stage"""
        graph = StateGraph(VerificationState)

        graph.add_node("structure", self._structure)
        graph.add_node("signature_presence", self._signature_presence)
        graph.add_node("instructions", self._instructions)
        graph.add_node("reference_check", self._reference_check)
        graph.add_node("crypto", self._crypto)

        order = ["structure", "signature_presence", "instructions", "reference_check", "crypto"]
        graph.add_edge(START, order[0])

        def make_router(next_node: str):
            def stage_router(state: Dict) -> str:
                if state.get("failure") is not None and not state.get("audit"):
                    return END
                return next_node
            return stage_router

        for current, following in zip(order, order[1:]):
            graph.add_conditional_edges(current, make_router(following), [following, END])
        graph.add_edge(order[-1], END)

        return graph.compile()

    def _record(self, state: VerificationState, stage: Stage, check) -> VerificationState:
        missing = [key for key in _REQUIRES[stage] if state.get(key) is None]
        if missing:
            state["stage_results"] = state["stage_results"] + [
                StageResult(stage, False, f"skipped: earlier stage did not provide {', '.join(missing)}", skipped=True)
            ]
            return state
        try:
            failure, findings = check(state)
        except Exception as e:
            logger.error(f"{stage.value} check raised: {e}\n{traceback.format_exc()}")
            failure, findings = StageFailure(stage, f"internal error: {e}", _internal_code(stage)), {}

        state.update(findings)
        if failure is None:
            result = StageResult(stage, True)
        else:
            result = StageResult(stage, False, failure.reason)
            if state.get("failure") is None:
                state["failure"] = failure
        state["stage_results"] = state["stage_results"] + [result]
        if self.config.log_stages:
            status = "pass" if failure is None else f"FAIL ({failure.code.value}): {failure.reason}"
            logger.info(f"[VERIFY] {stage.value}: {status}")
        return state

    def _structure(self, state: VerificationState) -> VerificationState:
        return self._record(state, Stage.STRUCTURE,
                            lambda s: stages.check_structure(s["document"], self.policy))

    def _signature_presence(self, state: VerificationState) -> VerificationState:
        return self._record(state, Stage.SIGNATURE_PRESENCE,
                            lambda s: stages.check_signature_presence(s["document"], self.policy))

    def _instructions(self, state: VerificationState) -> VerificationState:
        return self._record(state, Stage.INSTRUCTIONS,
                            lambda s: stages.check_instructions(s["document"], self.policy))

    def _reference_check(self, state: VerificationState) -> VerificationState:
        return self._record(state, Stage.REFERENCE_CHECK, lambda s: stages.check_references(
            s["document"], self.policy, s["signature_path"], s["security_path"], s["signed_info_path"]))

    def _crypto(self, state: VerificationState) -> VerificationState:
        return self._record(state, Stage.CRYPTO, lambda s: stages.check_crypto(
            s["document"], self.policy, s["signature_path"], s["signed_info_path"],
            s["references"], s["certificate"], self.provider))

    def _initial_state(self, doc: XmlDocument) -> VerificationState:
        return {
            "document": doc,
            "audit": self.config.audit,
            "stage_results": [],
            "failure": None,
            "signature_path": None,
            "security_path": None,
            "signed_info_path": None,
            "references": None,
            "certificate": None,
            "token_path": None,
        }

    def _report(self, state: VerificationState) -> VerificationReport:
        results = list(state["stage_results"])
        # Stages the router never reached are recorded as skipped
        reached = {result.stage for result in results}
        for stage in STAGE_ORDER:
            if stage not in reached:
                results.append(StageResult(stage, False, "skipped: verification stopped earlier", skipped=True))
        results.sort(key=lambda r: STAGE_ORDER.index(r.stage))

        failure = state.get("failure")
        if failure is not None:
            return VerificationReport(
                verdict=Verdict.REJECTED,
                stage_reached=failure.stage,
                verifier="hardened",
                failure=failure,
                stage_results=tuple(results),
            )
        certificate = state["certificate"]
        return VerificationReport(
            verdict=Verdict.ACCEPTED,
            stage_reached=Stage.CRYPTO,
            verifier="hardened",
            verified_locations=tuple(
                VerifiedLocation(ref["expression"].to_text(), ref["expression"], ref["target"])
                for ref in state["references"]
            ),
            signer_certificate=certificate,
            verification_certificate=certificate,
            stage_results=tuple(results),
            signer_token_path=state["token_path"],
            key_token_path=state["token_path"],
        )

    def run(self, doc: XmlDocument) -> VerificationReport:
        """Runs the stages on a parsed document"""
        final_state = self.graph.invoke(self._initial_state(doc))
        return self._report(final_state)

    async def arun(self, doc: XmlDocument) -> VerificationReport:
        final_state = await self.graph.ainvoke(self._initial_state(doc))
        return self._report(final_state)


def _internal_code(stage: Stage):
    return {
        Stage.STRUCTURE: FailureCode.STRUCTURE_VIOLATION,
        Stage.SIGNATURE_PRESENCE: FailureCode.SIGNATURE_MALFORMED,
        Stage.INSTRUCTIONS: FailureCode.INSTRUCTION_VIOLATION,
        Stage.REFERENCE_CHECK: FailureCode.REFERENCE_MISMATCH,
        Stage.CRYPTO: FailureCode.SIGNATURE_INVALID,
    }[stage]


@lru_cache(maxsize=32)
def _workflow_for(policy: SignaturePolicy, audit: bool) -> VerificationWorkflow:
    return VerificationWorkflow(policy, VerificationConfig(audit=audit, log_stages=audit))


def verify_hardened(doc: XmlDocument, policy: SignaturePolicy, audit: bool = False) -> VerificationReport:
    """
    Verify ``doc`` under ``policy``. Never raises for hostile input.

    With ``audit`` every stage whose inputs exist still runs after a failure;
    the verdict and failure are those of the first failing stage either way.
    """
    return _workflow_for(policy, audit).run(doc)
