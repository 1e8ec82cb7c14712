from typing import Sequence


class XmlCoreError(Exception):
    """Base exception for XML document model errors."""
    pass


class WellFormednessError(XmlCoreError):
    """Raised when the input is not well-formed, namespace-correct XML."""
    pass


class UnsupportedConstruct(XmlCoreError):
    """Raised for constructs that are rejected outright (DTD, PI, entities, non UTF-8)."""
    pass


class CanonicalizationError(XmlCoreError):
    """Raised when a subtree cannot be rendered canonically."""
    pass


class PathResolutionError(XmlCoreError):
    """Raised when a NodePath does not address a node of the document."""
    pass


class AmbiguityError(XmlCoreError):
    """Raised when an ID value matches zero or several elements."""

    def __init__(self, id_value: str, matches: Sequence = ()):
        self.id_value = id_value
        self.matches = tuple(matches)
        if not self.matches:
            message = f"ID {id_value!r} matches no element"
        else:
            message = f"ID {id_value!r} matches {len(self.matches)} elements"
        super().__init__(message)
