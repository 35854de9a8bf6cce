"""
Two-party protocol: wire formats, transports and the party session
"""

from .errors import (
    AgreementMismatch, BadMagicError, FrameDecodeError, LengthOverflowError, PeerAborted,
    ProtocolError, ProtocolViolation, TransportError, TruncatedFrameError, VersionMismatchError,
)
from .leakage import audit_payloads, find_leaked_substrings
from .session import PartySession, run_party, simulate_session
from .transport import (
    InProcessTransport, RecordingTransport, TcpListener, TcpTransport, Transport,
    TransportWrapper, connect, listen,
)
from .wire import (
    Hello, MessageKind, ProtocolAgreement, ProtocolMessage, decode_match_result,
    decode_smashed_batch, encode_match_result, encode_smashed_batch,
)

__all__ = [
    'AgreementMismatch', 'BadMagicError', 'FrameDecodeError', 'LengthOverflowError', 'PeerAborted',
    'ProtocolError', 'ProtocolViolation', 'TransportError', 'TruncatedFrameError', 'VersionMismatchError',
    'audit_payloads', 'find_leaked_substrings',
    'PartySession', 'run_party', 'simulate_session',
    'InProcessTransport', 'RecordingTransport', 'TcpListener', 'TcpTransport', 'Transport',
    'TransportWrapper', 'connect', 'listen',
    'Hello', 'MessageKind', 'ProtocolAgreement', 'ProtocolMessage', 'decode_match_result',
    'decode_smashed_batch', 'encode_match_result', 'encode_smashed_batch',
]
