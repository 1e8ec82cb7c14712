class XmlDsigError(Exception):
    """Base exception for XML signature errors."""
    pass


class PolicyViolation(XmlDsigError):
    """Raised when a document cannot be signed under the given policy."""

    def __init__(self, message: str, violations=()):
        self.violations = list(violations)
        super().__init__(message)


class CryptoError(XmlDsigError):
    """Raised for key, certificate or signature primitive failures."""
    pass


class NotAccepted(XmlDsigError):
    """Raised when identity is requested from a report that was not accepted."""
    pass


class PolicyLoadError(XmlDsigError):
    """Raised when a signature policy file is missing or invalid."""
    pass
