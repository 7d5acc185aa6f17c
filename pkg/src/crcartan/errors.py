"""Shared exception types."""


class CrcartanError(Exception):
    """Base class for all package errors."""


class TermCeilingError(CrcartanError):
    """Raised when a polynomial product exceeds the active term ceiling."""

    def __init__(self, count, ceiling):
        super().__init__(
            "expression blow-up: %d terms exceeds ceiling %d" % (count, ceiling)
        )
        self.count = count
        self.ceiling = ceiling


class DegreeOverflowError(CrcartanError):
    """Raised when a product would overflow a packed exponent field."""


class ParseError(CrcartanError):
    """Raised on malformed expression text; carries a character offset."""

    def __init__(self, message, offset):
        super().__init__("%s (at offset %d)" % (message, offset))
        self.offset = offset


class PoleError(CrcartanError):
    """Raised when evaluation meets a vanishing or near-vanishing denominator."""


class FrameError(CrcartanError):
    """Raised when the adapted frame cannot be built for an input surface."""


class MembershipError(CrcartanError):
    """Raised when an input surface fails a class-membership condition."""


class SingularMatrixError(CrcartanError):
    """Raised when an exact linear solve meets a singular matrix."""


class InputError(CrcartanError):
    """Raised on malformed input files or bad CLI usage."""
