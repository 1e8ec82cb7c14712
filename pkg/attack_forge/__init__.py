from attack_forge.errors import AlreadyAttacked, AttackConfigError, AttackForgeError, TargetNotFound
from attack_forge.variants import (
    CERTIFICATE_KINDS,
    CHALLENGE_KINDS,
    DEFAULT_WRAPPER,
    PHR_KINDS,
    AttackKind,
    AttackVariant,
    CertificatePlacement,
    WrapPlacement,
)
from attack_forge.forge import forge, forge_all

__all__ = [
    "AlreadyAttacked",
    "AttackConfigError",
    "AttackForgeError",
    "TargetNotFound",
    "CERTIFICATE_KINDS",
    "CHALLENGE_KINDS",
    "DEFAULT_WRAPPER",
    "PHR_KINDS",
    "AttackKind",
    "AttackVariant",
    "CertificatePlacement",
    "WrapPlacement",
    "forge",
    "forge_all",
]
