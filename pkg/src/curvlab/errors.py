class ValidationError(ValueError):
    """Raised when an input object violates its structural contract."""


class CertificationError(ValueError):
    """Raised when an operator fails a required intertwining identity."""
