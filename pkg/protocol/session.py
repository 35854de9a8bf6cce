"""
Party Session - one dataholder's run of the two-party split-matching protocol.

Message order on the wire: Hello, AgreementCheck, SmashedBatch*, MatchResult,
Done. At every step party A sends before it receives and party B receives
before it sends, so a session over a single stream never deadlocks.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

from models.config import ExperimentConfig
from models.errors import ConfigurationError
from models.match_array import MatchArray
from models.record import Party, RecordSet
from models.reference_set import ReferenceSet
from models.vectors import SmashedVector
from services.linkage_service import SplitParty
from .errors import (
    AgreementMismatch, PeerAborted, ProtocolError, ProtocolViolation,
    TransportError, VersionMismatchError,
)
from .transport import InProcessTransport, Transport
from .wire import (
    FORMAT_VERSION, Hello, MessageKind, ProtocolAgreement, ProtocolMessage,
    decode_match_result, decode_smashed_batch, encode_match_result, encode_smashed_batch,
)

log = logging.getLogger(__name__)

BATCH_RECORDS = 5000


class PartySession:
    """Runs the protocol for ``recs.party`` over ``transport``"""

    def __init__(
        self,
        recs: RecordSet,
        reference_set: ReferenceSet,
        config: ExperimentConfig,
        transport: Transport,
        batch_records: int = BATCH_RECORDS
    ):
        self.role = recs.party
        self.party = SplitParty(recs, reference_set, config)
        self.transport = transport
        self.batch_records = max(1, batch_records)
        self.agreement: Optional[ProtocolAgreement] = None
        self.peer_smashed: List[SmashedVector] = []
        self.result: Optional[MatchArray] = None
        self.peer_matches: List[Tuple[str, str]] = []

    def run(self) -> MatchArray:
        try:
            return self._run()
        except (PeerAborted, TransportError):
            raise
        except Exception as exc:
            self._send_error(exc)
            raise

    def _run(self) -> MatchArray:
        recs = self.party.recs
        log.info(f"Party {self.role.value}: starting session with {len(recs)} records")
        peer_hello = Hello.from_message(
            self._exchange(Hello(self.role, len(recs)).to_message(), MessageKind.HELLO)
        )
        self._check_hello(peer_hello)

        mapping = self.party.smashing_service.mapping_for(recs.schema)
        self.agreement = ProtocolAgreement.build(self.party.reference_set, mapping, recs.schema)
        peer_agreement = self._exchange(
            ProtocolMessage(MessageKind.AGREEMENT_CHECK, self.agreement.to_bytes()),
            MessageKind.AGREEMENT_CHECK
        )
        self._check_agreement(peer_agreement.payload)

        smashed = self.party.prepare()
        self.peer_smashed = self._exchange_batches(smashed, peer_hello.record_count)
        self._check_peer_batch(len(mapping), len(self.party.reference_set))

        self.result = self.party.match(self.peer_smashed)
        peer_result = self._exchange(
            ProtocolMessage(MessageKind.MATCH_RESULT, encode_match_result(self.result.matched_pairs())),
            MessageKind.MATCH_RESULT
        )
        self.peer_matches = decode_match_result(peer_result.payload)
        self._exchange(ProtocolMessage(MessageKind.DONE), MessageKind.DONE)
        log.info(
            f"Party {self.role.value}: session complete, {len(self.result.matched_pairs())} "
            f"local and {len(self.peer_matches)} peer matches"
        )
        return self.result

    def _send(self, message: ProtocolMessage) -> None:
        log.debug(f"Party {self.role.value} -> {message}")
        self.transport.send(message.encode())

    def _receive(self, expected: MessageKind) -> ProtocolMessage:
        message = ProtocolMessage.decode(self.transport.receive())
        log.debug(f"Party {self.role.value} <- {message}")
        if message.kind is MessageKind.ERROR:
            raise PeerAborted(f"Peer aborted: {message.payload.decode('utf-8', 'replace')}")
        if message.kind is not expected:
            raise ProtocolViolation(f"Expected {expected.name}, received {message.kind.name}")
        return message

    def _exchange(self, message: ProtocolMessage, expected: MessageKind) -> ProtocolMessage:
        if self.role is Party.A:
            self._send(message)
            return self._receive(expected)
        reply = self._receive(expected)
        self._send(message)
        return reply

    def _exchange_batches(self, smashed: Sequence[SmashedVector], peer_count: int) -> List[SmashedVector]:
        if self.role is Party.A:
            self._send_batches(smashed)
            return self._receive_batches(peer_count)
        received = self._receive_batches(peer_count)
        self._send_batches(smashed)
        return received

    def _send_batches(self, smashed: Sequence[SmashedVector]) -> None:
        for start in range(0, len(smashed), self.batch_records):
            batch = smashed[start:start + self.batch_records]
            self._send(ProtocolMessage(MessageKind.SMASHED_BATCH, encode_smashed_batch(batch)))

    def _receive_batches(self, count: int) -> List[SmashedVector]:
        vectors: List[SmashedVector] = []
        while len(vectors) < count:
            batch = decode_smashed_batch(self._receive(MessageKind.SMASHED_BATCH).payload)
            if not batch:
                raise ProtocolViolation("Received an empty smashed batch")
            vectors.extend(batch)
        if len(vectors) != count:
            raise ProtocolViolation(f"Peer announced {count} records but sent {len(vectors)}")
        return vectors

    def _check_hello(self, hello: Hello) -> None:
        if hello.format_version != FORMAT_VERSION:
            raise VersionMismatchError(FORMAT_VERSION, hello.format_version, "protocol")
        if hello.role is not self.role.peer:
            raise ProtocolViolation(
                f"Peer claims role {hello.role.value}, expected {self.role.peer.value}"
            )
        if hello.record_count < 1:
            raise ProtocolViolation("Peer announced an empty record set")

    def _check_agreement(self, payload: bytes) -> None:
        if payload == self.agreement.to_bytes():
            return
        differences = self.agreement.differences(ProtocolAgreement.from_bytes(payload))
        raise AgreementMismatch(f"Agreement differs from the peer's in: {', '.join(differences)}")

    def _check_peer_batch(self, group_count: int, group_len: int) -> None:
        seen = set()
        for vector in self.peer_smashed:
            if vector.shape != (group_count, group_len):
                raise ProtocolViolation(
                    f"Peer vector {vector.record_id} has shape {vector.shape}, "
                    f"agreement implies {(group_count, group_len)}"
                )
            if vector.record_id in seen:
                raise ProtocolViolation(f"Peer sent record ID {vector.record_id} twice")
            seen.add(vector.record_id)

    def _send_error(self, exc: Exception) -> None:
        try:
            self._send(ProtocolMessage(MessageKind.ERROR, f"{type(exc).__name__}: {exc}".encode("utf-8")))
        except ProtocolError:
            log.debug(f"Party {self.role.value}: could not notify peer of {type(exc).__name__}")


def run_party(
    role: Party,
    recs: RecordSet,
    rs: ReferenceSet,
    cfg: ExperimentConfig,
    transport: Transport
) -> MatchArray:
    """Run one side of the protocol and return the local MatchArray"""
    if recs.party is not role:
        raise ConfigurationError(f"Records belong to party {recs.party.value}, not {role.value}")
    return PartySession(recs, rs, cfg, transport).run()


def simulate_session(
    recs_a: RecordSet,
    recs_b: RecordSet,
    rs_a: ReferenceSet,
    cfg: ExperimentConfig,
    rs_b: Optional[ReferenceSet] = None,
    wrap=None
) -> Tuple[PartySession, PartySession]:
    """
    Both parties on threads over an in-process channel. ``wrap`` optionally
    wraps each party's transport (e.g. ``RecordingTransport``).
    """
    end_a, end_b = InProcessTransport.pair()
    transport_a = wrap(end_a) if wrap else end_a
    transport_b = wrap(end_b) if wrap else end_b
    sessions = (
        PartySession(recs_a, rs_a, cfg, transport_a),
        PartySession(recs_b, rs_b if rs_b is not None else rs_a, cfg, transport_b),
    )

    def run(session: PartySession) -> MatchArray:
        try:
            return session.run()
        finally:
            session.transport.close()

    with ThreadPoolExecutor(max_workers=2) as pool:
        futures = [pool.submit(run, session) for session in sessions]
        errors = [future.exception() for future in futures]
    for error in errors:
        if error is not None and not isinstance(error, (PeerAborted, TransportError)):
            raise error
    for error in errors:
        if error is not None:
            raise error
    return sessions
