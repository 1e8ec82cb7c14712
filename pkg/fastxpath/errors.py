class FastXPathError(Exception):
    """Base exception for FastXPath handling."""
    pass


class SubsetViolation(FastXPathError):
    """Raised when an expression uses anything outside the prefix-free FastXPath subset."""

    def __init__(self, message: str, text: str = "", offset: int = -1):
        self.text = text
        self.offset = offset
        if offset >= 0:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class AmbiguityUnresolvable(FastXPathError):
    """Raised when no expression can single out the target element."""
    pass
