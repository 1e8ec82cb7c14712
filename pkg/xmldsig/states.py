from typing import List, Optional, Tuple, TypedDict

from fastxpath import FastXPathExpr
from xml_core import NodePath, XmlDocument
from xmldsig.crypto import Certificate
from xmldsig.report import StageFailure, StageResult


class CheckedReference(TypedDict):
    """A Reference that passed the reference check"""
    expression: FastXPathExpr
    target: NodePath                   # the single node the expression selects
    reference: NodePath                # the ds:Reference element
    inclusive_prefixes: Tuple[str, ...]


class VerificationState(TypedDict):
    """State for the signature verification workflow"""
    document: XmlDocument              # Message under verification
    audit: bool                        # Keep going after a failing stage
    stage_results: List[StageResult]   # One record per stage, in order
    failure: Optional[StageFailure]    # First failure, if any
    signature_path: Optional[NodePath]
    security_path: Optional[NodePath]  # Security block enclosing the Signature
    signed_info_path: Optional[NodePath]
    references: List[CheckedReference]
    certificate: Optional[Certificate]  # From the token the KeyInfo points to
    token_path: Optional[NodePath]


class VerificationConfig:
    """Configuration for the verification workflow"""
    def __init__(
        self,
        audit: bool = False,
        log_stages: bool = True
    ):
        self.audit = audit
        self.log_stages = log_stages
