"""
Key handles, certificates and the pluggable signature provider.

All primitives come from ``cryptography``; nothing here implements a cipher.
"""
import base64
import datetime
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

from cryptography import x509
from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import padding, rsa
from cryptography.x509.oid import NameOID

from config.constants import DIGEST_SHA256, SIG_RSA_PSS_SHA256, SIG_RSA_SHA256
from xmldsig.errors import CryptoError

logger = logging.getLogger(__name__)

PSS_SALT_LENGTH = 32


@dataclass(frozen=True)
class SubjectFields:
    common_name: str
    subject: str
    issuer: str
    fingerprint: str

    def as_dict(self) -> Dict[str, str]:
        return {
            "common_name": self.common_name,
            "subject": self.subject,
            "issuer": self.issuer,
            "fingerprint": self.fingerprint,
        }


def _common_name(name: x509.Name) -> str:
    attributes = name.get_attributes_for_oid(NameOID.COMMON_NAME)
    return str(attributes[0].value) if attributes else ""


@dataclass(frozen=True)
class Certificate:
    """An X.509 certificate kept as DER octets; equality is octet equality."""
    der: bytes
    _parsed: x509.Certificate = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self._parsed is None:
            try:
                parsed = x509.load_der_x509_certificate(self.der)
            except (ValueError, TypeError) as e:
                raise CryptoError(f"cannot parse certificate: {e}") from e
            object.__setattr__(self, "_parsed", parsed)

    @classmethod
    def from_base64(cls, text: str) -> "Certificate":
        try:
            der = base64.b64decode("".join(text.split()), validate=True)
        except (ValueError, TypeError) as e:
            raise CryptoError(f"token content is not base64: {e}") from e
        return cls(der)

    @classmethod
    def from_pem(cls, data: bytes) -> "Certificate":
        try:
            parsed = x509.load_pem_x509_certificate(data)
        except ValueError as e:
            raise CryptoError(f"cannot parse PEM certificate: {e}") from e
        return cls(parsed.public_bytes(serialization.Encoding.DER), parsed)

    @property
    def x509(self) -> x509.Certificate:
        return self._parsed

    @property
    def fingerprint(self) -> str:
        return self._parsed.fingerprint(hashes.SHA256()).hex()

    @property
    def base64(self) -> str:
        return base64.b64encode(self.der).decode("ascii")

    @property
    def subject_fields(self) -> SubjectFields:
        return SubjectFields(
            common_name=_common_name(self._parsed.subject),
            subject=self._parsed.subject.rfc4514_string(),
            issuer=self._parsed.issuer.rfc4514_string(),
            fingerprint=self.fingerprint,
        )

    def to_pem(self) -> bytes:
        return self._parsed.public_bytes(serialization.Encoding.PEM)


VerifyKeyHandle = Certificate


class SigningKeyHandle:
    """Private key plus its certificate. The key never leaves the handle."""

    def __init__(self, private_key: rsa.RSAPrivateKey, certificate: Certificate):
        if not isinstance(private_key, rsa.RSAPrivateKey):
            raise CryptoError("only RSA signing keys are supported")
        if private_key.public_key().public_numbers() != certificate.x509.public_key().public_numbers():
            raise CryptoError("private key does not match the certificate")
        self._private_key = private_key
        self.certificate = certificate

    def sign(self, data: bytes, algorithm: str, provider: Optional["CryptoProvider"] = None) -> bytes:
        return (provider or DEFAULT_PROVIDER).sign(self._private_key, data, algorithm)

    def __repr__(self) -> str:
        return f"SigningKeyHandle({self.certificate.subject_fields.common_name!r})"


class CryptoProvider:
    """Signature and digest primitives keyed by algorithm URI."""

    def _padding(self, algorithm: str):
        if algorithm == SIG_RSA_PSS_SHA256:
            return padding.PSS(mgf=padding.MGF1(hashes.SHA256()), salt_length=PSS_SALT_LENGTH)
        if algorithm == SIG_RSA_SHA256:
            return padding.PKCS1v15()
        raise CryptoError(f"unsupported signature algorithm {algorithm}")

    def digest(self, data: bytes, algorithm: str) -> bytes:
        if algorithm != DIGEST_SHA256:
            raise CryptoError(f"unsupported digest algorithm {algorithm}")
        h = hashes.Hash(hashes.SHA256())
        h.update(data)
        return h.finalize()

    def sign(self, private_key: rsa.RSAPrivateKey, data: bytes, algorithm: str) -> bytes:
        return private_key.sign(data, self._padding(algorithm), hashes.SHA256())

    def verify(self, certificate: Certificate, signature: bytes, data: bytes, algorithm: str) -> None:
        public_key = certificate.x509.public_key()
        if not isinstance(public_key, rsa.RSAPublicKey):
            raise CryptoError("certificate does not carry an RSA key")
        try:
            public_key.verify(signature, data, self._padding(algorithm), hashes.SHA256())
        except InvalidSignature as e:
            raise CryptoError("signature value does not verify") from e


SIGNATURE_ALGORITHMS = (SIG_RSA_PSS_SHA256, SIG_RSA_SHA256)
DIGEST_ALGORITHMS = (DIGEST_SHA256,)
DEFAULT_PROVIDER = CryptoProvider()


def generate_identity(common_name: str, key_size: int = 2048, days: int = 365) -> SigningKeyHandle:
    """RSA key with a self-signed certificate for ``CN=common_name``."""
    key = rsa.generate_private_key(public_exponent=65537, key_size=key_size)
    name = x509.Name([x509.NameAttribute(NameOID.COMMON_NAME, common_name)])
    now = datetime.datetime.now(datetime.timezone.utc)
    cert = (
        x509.CertificateBuilder()
        .subject_name(name)
        .issuer_name(name)
        .public_key(key.public_key())
        .serial_number(x509.random_serial_number())
        .not_valid_before(now - datetime.timedelta(minutes=5))
        .not_valid_after(now + datetime.timedelta(days=days))
        .sign(key, hashes.SHA256())
    )
    logger.debug("Generated identity CN=%s", common_name)
    return SigningKeyHandle(key, Certificate(cert.public_bytes(serialization.Encoding.DER), cert))


def identity_to_pem(handle: SigningKeyHandle) -> bytes:
    key_pem = handle._private_key.private_bytes(
        serialization.Encoding.PEM,
        serialization.PrivateFormat.PKCS8,
        serialization.NoEncryption(),
    )
    return key_pem + handle.certificate.to_pem()


def save_identity(handle: SigningKeyHandle, path: Union[str, Path]) -> Path:
    """Write the key and certificate as one PEM bundle."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(identity_to_pem(handle))
    return path


def load_signing_key(source: Union[str, Path, bytes]) -> SigningKeyHandle:
    """Load a PEM bundle holding an RSA private key followed by its certificate."""
    if isinstance(source, bytes):
        data = source
    else:
        try:
            data = Path(source).read_bytes()
        except OSError as e:
            raise CryptoError(f"cannot read key bundle {source}: {e}") from e
    try:
        key = serialization.load_pem_private_key(data, password=None)
    except (ValueError, TypeError) as e:
        raise CryptoError(f"cannot load private key: {e}") from e
    marker = b"-----BEGIN CERTIFICATE-----"
    start = data.find(marker)
    if start < 0:
        raise CryptoError("key bundle holds no certificate")
    return SigningKeyHandle(key, Certificate.from_pem(data[start:]))


def load_certificate(source: Union[str, Path, bytes]) -> Certificate:
    """PEM or DER certificate from a file or octets."""
    if isinstance(source, bytes):
        data = source
    else:
        try:
            data = Path(source).read_bytes()
        except OSError as e:
            raise CryptoError(f"cannot read certificate {source}: {e}") from e
    if b"-----BEGIN CERTIFICATE-----" in data:
        start = data.find(b"-----BEGIN CERTIFICATE-----")
        return Certificate.from_pem(data[start:])
    return Certificate(data)
