"""
Constants used throughout the application.
"""
import os
from pathlib import Path
from dotenv import load_dotenv
load_dotenv()


class ConfigurationError(Exception):
    """Exception raised for invalid configuration values."""
    pass


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(f"Environment variable {name} must be an integer, got {raw!r}")
    if value <= 0:
        raise ConfigurationError(f"Environment variable {name} must be positive, got {value}")
    return value


# Namespaces
SOAP12_NS = "http://www.w3.org/2003/05/soap-envelope"
WSSE_NS = "http://docs.oasis-open.org/wss/2004/01/oasis-200401-wss-wssecurity-secext-1.0.xsd"
WSU_NS = "http://docs.oasis-open.org/wss/2004/01/oasis-200401-wss-wssecurity-utility-1.0.xsd"
DS_NS = "http://www.w3.org/2000/09/xmldsig#"
DSP_NS = "http://www.w3.org/2002/06/xmldsig-filter2"
WST_NS = "http://docs.oasis-open.org/ws-sx/ws-trust/200512"
XML_NS = "http://www.w3.org/XML/1998/namespace"
ASSERTION_NS = "urn:phr:authentication:assertion"
ATTACKER_NS = "http://attacker.invalid/redefined"

# Prefixes used when this code builds messages
DEFAULT_PREFIXES = {
    "soap": SOAP12_NS,
    "wsse": WSSE_NS,
    "wsu": WSU_NS,
    "ds": DS_NS,
    "dsp": DSP_NS,
    "wst": WST_NS,
}

# Algorithm identifiers
EXC_C14N = "http://www.w3.org/2001/10/xml-exc-c14n#"
DIGEST_SHA256 = "http://www.w3.org/2001/04/xmlenc#sha256"
SIG_RSA_PSS_SHA256 = "http://www.w3.org/2007/05/xmldsig-more#sha256-rsa-MGF1"
SIG_RSA_SHA256 = "http://www.w3.org/2001/04/xmldsig-more#rsa-sha256"
XPATH_FILTER2 = DSP_NS
X509V3_VALUE_TYPE = (
    "http://docs.oasis-open.org/wss/2004/01/oasis-200401-wss-x509-token-profile-1.0#X509v3"
)
BASE64_ENCODING_TYPE = (
    "http://docs.oasis-open.org/wss/2004/01/oasis-200401-wss-soap-message-security-1.0#Base64Binary"
)

# Attributes registered as XML IDs: (namespace-uri, local-name)
DEFAULT_ID_ATTRIBUTES = (
    (WSU_NS, "Id"),
    ("", "Id"),
    ("", "ID"),
    ("", "id"),
)

# File Paths
PROJECT_ROOT = Path(__file__).resolve().parent.parent
PROFILE_DIR = PROJECT_ROOT / "config" / "profiles"
POLICY_DIR = PROJECT_ROOT / "config" / "policies"
GROUND_TRUTH_MATRIX = PROJECT_ROOT / "ground_truth" / "phr_matrix.yaml"
GROUND_TRUTH_C14N = PROJECT_ROOT / "ground_truth" / "c14n"
DEFAULT_MANIFEST_TEMPLATE = PROJECT_ROOT / "config" / "templates" / "manifest.yaml"
PROFILE_SUFFIX = ".profile"
POLICY_SUFFIX = ".yaml"

# Profiles shipped with the repository
PHR_PROFILE_NAME = "soap12-hardened-phr"
SIGNATURE_PROFILE_NAME = "xmldsig-signature"

# Harness settings
PHR_CHALLENGE_TTL_SECONDS = _env_int("PHR_CHALLENGE_TTL_SECONDS", 300)
PHR_CHALLENGE_LENGTH = 32
PHR_ASSERTION_LIFETIME_SECONDS = _env_int("PHR_ASSERTION_LIFETIME_SECONDS", 3600)
PHR_SERVER_MODE = os.getenv("PHR_SERVER_MODE", "hardened")
if PHR_SERVER_MODE not in ("naive", "hardened"):
    raise ConfigurationError(f"PHR_SERVER_MODE must be 'naive' or 'hardened', got {PHR_SERVER_MODE!r}")
PHR_POLICY = os.getenv("PHR_POLICY", "phr")
PHR_TRUST_CERTS = [p.strip() for p in os.getenv("PHR_TRUST_CERTS", "").split(",") if p.strip()]
PHR_SERVICE_KEY = os.getenv("PHR_SERVICE_KEY")
PHR_LISTEN_HOST = os.getenv("PHR_LISTEN_HOST", "127.0.0.1")
PHR_LISTEN_PORT = _env_int("PHR_LISTEN_PORT", 8000)

# Wrapper element used by the wrapping attacks
DEFAULT_WRAPPER_LOCAL_NAME = "Wrapper"

# Content types
SOAP_CONTENT_TYPE = "application/soap+xml"

# Exit codes
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2
