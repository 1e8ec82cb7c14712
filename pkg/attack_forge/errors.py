class AttackForgeError(Exception):
    """Base exception for attack construction errors."""
    pass


class TargetNotFound(AttackForgeError):
    """Raised when the document lacks the element a variant attacks."""
    pass


class AlreadyAttacked(AttackForgeError):
    """Raised when the document already carries the variant's transformation."""
    pass


class AttackConfigError(AttackForgeError):
    """Raised for an incomplete or inapplicable attack variant."""
    pass
