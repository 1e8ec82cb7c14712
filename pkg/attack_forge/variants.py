from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Union

from attack_forge.errors import AttackConfigError
from config.constants import ATTACKER_NS, DEFAULT_WRAPPER_LOCAL_NAME
from xml_core import NodePath, QName


class AttackKind(str, Enum):
    SIMPLE_ANCESTRY_CHALLENGE = "simple-ancestry-challenge"
    SIMPLE_ANCESTRY_CERTIFICATE = "simple-ancestry-certificate"
    SIBLING_VALUE_CHALLENGE = "sibling-value-challenge"
    SIBLING_VALUE_CERTIFICATE = "sibling-value-certificate"
    GENERIC_WRAP = "generic-wrap"
    OPTIONAL_ELEMENT_ERASE = "optional-element-erase"
    PREFIX_REDEFINITION = "prefix-redefinition"


PHR_KINDS = (
    AttackKind.SIBLING_VALUE_CHALLENGE,
    AttackKind.SIBLING_VALUE_CERTIFICATE,
    AttackKind.SIMPLE_ANCESTRY_CHALLENGE,
    AttackKind.SIMPLE_ANCESTRY_CERTIFICATE,
)
CHALLENGE_KINDS = (AttackKind.SIMPLE_ANCESTRY_CHALLENGE, AttackKind.SIBLING_VALUE_CHALLENGE)
CERTIFICATE_KINDS = (AttackKind.SIMPLE_ANCESTRY_CERTIFICATE, AttackKind.SIBLING_VALUE_CERTIFICATE)


class CertificatePlacement(str, Enum):
    """Where the sibling-value certificate attack puts the injected token."""
    TWO_SECURITY_HEADERS = "two-security-headers"
    SAME_SECURITY = "same-security"
    SECOND_HEADER = "second-header"


class WrapPlacement(str, Enum):
    """Where generic-wrap leaves the signed target."""
    WRAPPER = "wrapper"
    SIBLING_CONTAINER = "sibling-container"


DEFAULT_WRAPPER = QName(DEFAULT_WRAPPER_LOCAL_NAME)


@dataclass(frozen=True)
class AttackVariant:
    """
    One documented transformation.

    ``payload`` is the fresh challenge (str) for the challenge kinds, the
    injected certificate DER (bytes) for the certificate kinds, and optional
    replacement text for generic-wrap.
    """
    kind: AttackKind
    payload: Optional[Union[str, bytes]] = None
    wrapper: QName = DEFAULT_WRAPPER
    target: Optional[NodePath] = None
    placement: CertificatePlacement = CertificatePlacement.TWO_SECURITY_HEADERS
    wrap_placement: WrapPlacement = WrapPlacement.WRAPPER
    prefix: Optional[str] = None
    new_uri: str = ATTACKER_NS

    def __post_init__(self):
        kind = AttackKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "placement", CertificatePlacement(self.placement))
        object.__setattr__(self, "wrap_placement", WrapPlacement(self.wrap_placement))
        if kind in CHALLENGE_KINDS and not isinstance(self.payload, str):
            raise AttackConfigError(f"{kind.value} needs the fresh challenge as payload")
        if kind in CERTIFICATE_KINDS and not isinstance(self.payload, (bytes, bytearray)):
            raise AttackConfigError(f"{kind.value} needs the injected certificate octets as payload")
        if kind in (AttackKind.GENERIC_WRAP, AttackKind.OPTIONAL_ELEMENT_ERASE) and self.target is None:
            raise AttackConfigError(f"{kind.value} needs a target path")
        if kind is AttackKind.PREFIX_REDEFINITION and not self.new_uri:
            raise AttackConfigError("prefix-redefinition needs a namespace URI")

    @property
    def label(self) -> str:
        """Stable name used for file names and matrix rows."""
        if self.kind is AttackKind.SIBLING_VALUE_CERTIFICATE and self.placement is not CertificatePlacement.TWO_SECURITY_HEADERS:
            return f"{self.kind.value}-{self.placement.value}"
        if self.kind is AttackKind.GENERIC_WRAP and self.wrap_placement is WrapPlacement.SIBLING_CONTAINER:
            return f"{self.kind.value}-{self.wrap_placement.value}"
        return self.kind.value

    def describe(self) -> Dict[str, Any]:
        info: Dict[str, Any] = {"kind": self.kind.value, "label": self.label}
        if self.kind in CHALLENGE_KINDS:
            info["challenge"] = self.payload
        if self.kind in CERTIFICATE_KINDS:
            info["injected_certificate_bytes"] = len(self.payload)
        if self.kind is AttackKind.SIBLING_VALUE_CERTIFICATE:
            info["placement"] = self.placement.value
        if self.kind is AttackKind.GENERIC_WRAP:
            info["placement"] = self.wrap_placement.value
        if self.kind in (AttackKind.SIMPLE_ANCESTRY_CHALLENGE, AttackKind.SIMPLE_ANCESTRY_CERTIFICATE,
                         AttackKind.GENERIC_WRAP, AttackKind.OPTIONAL_ELEMENT_ERASE):
            info["wrapper"] = self.wrapper.clark
        if self.target is not None:
            info["target"] = str(self.target)
        if self.kind is AttackKind.PREFIX_REDEFINITION:
            info["prefix"] = self.prefix
            info["new_uri"] = self.new_uri
        return info
