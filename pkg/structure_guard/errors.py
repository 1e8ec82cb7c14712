class StructureGuardError(Exception):
    """Base exception for structure guard errors."""
    pass


class UnknownProfile(StructureGuardError):
    """Raised when a profile name matches no shipped profile."""
    pass


class ProfileParseError(StructureGuardError):
    """Raised when a profile file is missing or malformed."""

    def __init__(self, message: str, source: str = "<string>", line: int = 0):
        self.source = source
        self.line = line
        location = f"{source}:{line}" if line else source
        super().__init__(f"{location}: {message}")
