import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence, Tuple, Union

import yaml

from config.constants import (
    DIGEST_SHA256,
    EXC_C14N,
    POLICY_DIR,
    POLICY_SUFFIX,
    SIG_RSA_PSS_SHA256,
    SIGNATURE_PROFILE_NAME,
)
from fastxpath import FastXPathExpr, SubsetViolation, parse_fastxpath
from structure_guard import (
    StructureGuardError,
    StructureRuleSet,
    ValidationInstruction,
    load_profile,
)
from xmldsig.crypto import DIGEST_ALGORITHMS, SIGNATURE_ALGORITHMS, load_certificate
from xmldsig.errors import CryptoError, PolicyLoadError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SignaturePolicy:
    """
    Out-of-band agreement between signer and verifier: which nodes are signed
    (prefix-free expressions), under which structure profile, with which
    algorithms, and which certificates are trusted.
    """
    name: str
    expected_references: Tuple[FastXPathExpr, ...]
    rules: StructureRuleSet
    instructions: Tuple[ValidationInstruction, ...]
    signature_rules: StructureRuleSet
    trust_anchors: Tuple[str, ...] = ()
    digest_alg: str = DIGEST_SHA256
    sig_alg: str = SIG_RSA_PSS_SHA256
    c14n_alg: str = EXC_C14N

    def __post_init__(self):
        if not self.expected_references:
            raise PolicyLoadError(f"policy {self.name} lists no expected references")
        if self.digest_alg not in DIGEST_ALGORITHMS:
            raise PolicyLoadError(f"policy {self.name}: unsupported digest algorithm {self.digest_alg}")
        if self.sig_alg not in SIGNATURE_ALGORITHMS:
            raise PolicyLoadError(f"policy {self.name}: unsupported signature algorithm {self.sig_alg}")
        if self.c14n_alg != EXC_C14N:
            raise PolicyLoadError(f"policy {self.name}: canonicalization must be {EXC_C14N}")
        object.__setattr__(self, "trust_anchors", tuple(f.lower() for f in self.trust_anchors))

    def with_trust(self, fingerprints: Iterable[str]) -> "SignaturePolicy":
        merged = tuple(dict.fromkeys(list(self.trust_anchors) + [f.lower() for f in fingerprints]))
        return replace(self, trust_anchors=merged)

    def with_sig_alg(self, sig_alg: str) -> "SignaturePolicy":
        return replace(self, sig_alg=sig_alg)


def _resolve_policy_path(name_or_path: Union[str, Path]) -> Path:
    text = str(name_or_path)
    if isinstance(name_or_path, Path) or text.endswith((".yaml", ".yml")) or "/" in text:
        return Path(name_or_path)
    return POLICY_DIR / f"{text}{POLICY_SUFFIX}"


def _load_profile_ref(ref: str, base: Path):
    candidate = base / ref
    target = candidate if ("/" in ref or ref.endswith(".profile")) and candidate.is_file() else ref
    return load_profile(target)


def load_policy(
    name_or_path: Union[str, Path],
    trust_certs: Sequence[Union[str, Path]] = (),
    trust_fingerprints: Sequence[str] = (),
) -> SignaturePolicy:
    """
    Read a YAML policy by name (config/policies/<name>.yaml) or path.

    Trust anchors come from the file plus ``trust_certs`` (certificate files)
    and ``trust_fingerprints`` (SHA-256 hex).

    Raises:
        PolicyLoadError: missing file, bad YAML, bad expression or profile
    """
    path = _resolve_policy_path(name_or_path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise PolicyLoadError(f"cannot read policy {path}: {e}") from e
    except yaml.YAMLError as e:
        raise PolicyLoadError(f"policy {path} is not valid YAML: {e}") from e
    if not isinstance(data, dict):
        raise PolicyLoadError(f"policy {path} must be a mapping")

    try:
        profile = _load_profile_ref(str(data.get("profile", "")), path.parent)
        signature_profile = _load_profile_ref(str(data.get("signature_profile", SIGNATURE_PROFILE_NAME)), path.parent)
    except StructureGuardError as e:
        raise PolicyLoadError(f"policy {path}: {e}") from e

    expressions = []
    for text in data.get("references") or []:
        try:
            expressions.append(parse_fastxpath(str(text)))
        except SubsetViolation as e:
            raise PolicyLoadError(f"policy {path}: reference is not prefix-free FastXPath: {e}") from e

    anchors = [str(f) for f in data.get("trust_anchors") or []]
    anchors.extend(trust_fingerprints)
    for cert_path in trust_certs:
        try:
            anchors.append(load_certificate(cert_path).fingerprint)
        except CryptoError as e:
            raise PolicyLoadError(f"trust certificate {cert_path}: {e}") from e

    algorithms = data.get("algorithms") or {}
    policy = SignaturePolicy(
        name=str(data.get("name", path.stem)),
        expected_references=tuple(expressions),
        rules=profile.rules,
        instructions=tuple(profile.instructions),
        signature_rules=signature_profile.rules,
        trust_anchors=tuple(anchors),
        digest_alg=algorithms.get("digest", DIGEST_SHA256),
        sig_alg=algorithms.get("signature", SIG_RSA_PSS_SHA256),
        c14n_alg=algorithms.get("canonicalization", EXC_C14N),
    )
    logger.info(f"Loaded policy {policy.name}: {len(policy.expected_references)} references, "
                f"{len(policy.trust_anchors)} trust anchors")
    return policy
