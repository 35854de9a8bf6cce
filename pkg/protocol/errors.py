"""
Protocol errors - every abort of a two-party session maps to exit code 3
"""

from models.errors import SplitLinkError


class ProtocolError(SplitLinkError):
    """Base class for session aborts"""
    pass


class AgreementMismatch(ProtocolError):
    """The parties do not hold the same reference set, mapping or schema"""
    pass


class ProtocolViolation(ProtocolError):
    """A malformed or out-of-order message"""
    pass


class TransportError(ProtocolError):
    """The connection failed or closed mid-session"""
    pass


class PeerAborted(ProtocolError):
    """The peer sent an Error message"""
    pass


class FrameDecodeError(ProtocolViolation, ValueError):
    pass


class BadMagicError(FrameDecodeError):
    pass


class TruncatedFrameError(FrameDecodeError):
    pass


class VersionMismatchError(FrameDecodeError):
    def __init__(self, expected: int, actual: int, what: str = "frame"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"Unsupported {what} version {actual}, expected {expected}")


class LengthOverflowError(FrameDecodeError):
    def __init__(self, declared: int, available: int, what: str = "payload"):
        self.declared = declared
        self.available = available
        super().__init__(f"Declared {what} of {declared} bytes exceeds the {available} bytes available")
