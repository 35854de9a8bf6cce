"""
Test suite for the wire formats, transports and the two-party session

"""

import socket
import struct
import threading
import unittest

from models.config import ExperimentConfig
from models.errors import ConfigurationError, StructureMismatchError, ValidationError
from models.record import Party
from models.reference_set import AttributeMapping, ReferenceSet
from models.vectors import SmashedVector
from protocol.errors import (
    AgreementMismatch, BadMagicError, FrameDecodeError, LengthOverflowError, PeerAborted,
    ProtocolViolation, TransportError, TruncatedFrameError, VersionMismatchError,
)
from protocol.leakage import audit_payloads, find_leaked_substrings
from protocol.session import PartySession, run_party, simulate_session
from protocol.transport import InProcessTransport, RecordingTransport, TcpListener, TcpTransport, connect
from protocol.wire import (
    Hello, MessageKind, ProtocolAgreement, ProtocolMessage, decode_match_result,
    decode_smashed_batch, encode_match_result, encode_smashed_batch,
)
from tests.support import ACTOR_SCHEMA, VOTER_SCHEMA, example_reference_set, linked_parties

EXAMPLE_GROUPS = [[6, 3], [5, 5], [7, 2], [5, 5]]


class TestSmashedBatchFrame(unittest.TestCase):
    """Test cases for the smashed-batch frame"""

    def setUp(self):
        """Set up test fixtures"""
        self.vector = SmashedVector("A-000001", EXAMPLE_GROUPS)
        self.frame = encode_smashed_batch([self.vector])

    def test_exact_layout(self):
        """Test the byte layout of a one-record batch"""
        expected = (
            b"SLSD" + struct.pack(">HIII", 1, 4, 2, 1)
            + struct.pack(">H", 8) + b"A-000001"
            + struct.pack(">8I", 6, 3, 5, 5, 7, 2, 5, 5)
        )
        self.assertEqual(self.frame, expected)

    def test_round_trip(self):
        """Test decoding restores IDs and distances"""
        vectors = [self.vector, SmashedVector("A-000002", [[0, 1], [2, 3], [4, 5], [6, 70000]])]
        self.assertEqual(decode_smashed_batch(encode_smashed_batch(vectors)), vectors)
        unicode_id = SmashedVector("Ä-1", [[1]])
        self.assertEqual(decode_smashed_batch(encode_smashed_batch([unicode_id])), [unicode_id])

    def test_encode_errors(self):
        """Test empty and ragged batches"""
        with self.assertRaises(ValidationError):
            encode_smashed_batch([])
        with self.assertRaises(StructureMismatchError) as ctx:
            encode_smashed_batch([self.vector, SmashedVector("A-000002", [[1, 2, 3]])])
        self.assertEqual(ctx.exception.pair_index, 1)

    def test_bad_magic(self):
        """Test a frame with the wrong magic"""
        with self.assertRaises(BadMagicError):
            decode_smashed_batch(b"XXXX" + self.frame[4:])

    def test_truncation(self):
        """Test frames shorter than declared"""
        for cut in (2, 10, len(self.frame) - 1):
            with self.subTest(cut=cut):
                with self.assertRaises(TruncatedFrameError):
                    decode_smashed_batch(self.frame[:cut])

    def test_version_mismatch(self):
        """Test an unsupported frame version"""
        frame = self.frame[:4] + struct.pack(">H", 9999) + self.frame[6:]
        with self.assertRaises(VersionMismatchError) as ctx:
            decode_smashed_batch(frame)
        self.assertEqual(ctx.exception.actual, 9999)

    def test_length_overflow(self):
        """Test declared sizes beyond 32 bits are refused before allocation"""
        frame = b"SLSD" + struct.pack(">HIII", 1, 0xFFFFFFFF, 0xFFFF, 1)
        with self.assertRaises(LengthOverflowError):
            decode_smashed_batch(frame)

    def test_trailing_bytes(self):
        """Test extra bytes after the last record"""
        with self.assertRaises(FrameDecodeError):
            decode_smashed_batch(self.frame + b"\x00")

    def test_decode_errors_are_value_errors(self):
        """Test decode failures can be caught as ValueError"""
        with self.assertRaises(ValueError):
            decode_smashed_batch(b"")


class TestMessages(unittest.TestCase):
    """Test cases for protocol messages and payloads"""

    def test_message_frame(self):
        """Test the kind byte prefix"""
        message = ProtocolMessage(MessageKind.DONE)
        self.assertEqual(message.encode(), b"\x05")
        self.assertEqual(ProtocolMessage.decode(b"\x03abc"), ProtocolMessage(MessageKind.SMASHED_BATCH, b"abc"))
        with self.assertRaises(TruncatedFrameError):
            ProtocolMessage.decode(b"")
        with self.assertRaises(ProtocolViolation):
            ProtocolMessage.decode(b"\x09")

    def test_hello(self):
        """Test the Hello payload"""
        hello = Hello(Party.B, 12)
        self.assertEqual(Hello.from_message(hello.to_message()), hello)
        with self.assertRaises(ProtocolViolation):
            Hello.from_message(ProtocolMessage(MessageKind.HELLO, b"not json"))
        with self.assertRaises(ProtocolViolation):
            Hello.from_message(ProtocolMessage(MessageKind.HELLO, b'{"role": "C"}'))

    def test_agreement(self):
        """Test the agreement payload and its differences"""
        rs = example_reference_set()
        mapping = AttributeMapping.default(VOTER_SCHEMA, ACTOR_SCHEMA)
        agreement = ProtocolAgreement.build(rs, mapping, VOTER_SCHEMA)
        self.assertEqual(ProtocolAgreement.from_bytes(agreement.to_bytes()), agreement)
        other = ProtocolAgreement.build(ReferenceSet(ACTOR_SCHEMA, rs.rows[::-1]), mapping, VOTER_SCHEMA)
        self.assertEqual(agreement.differences(other), ["reference_set_digest"])
        with self.assertRaises(ProtocolViolation):
            ProtocolAgreement.from_bytes(b"[]")

    def test_match_result(self):
        """Test the match-result payload"""
        pairs = [("A-000001", "B-000004"), ("A-000002", "B-000001")]
        payload = encode_match_result(pairs)
        self.assertTrue(payload.startswith(b"record_id_A,record_id_B\n"))
        self.assertEqual(decode_match_result(payload), pairs)
        self.assertEqual(decode_match_result(encode_match_result([])), [])
        with self.assertRaises(ProtocolViolation):
            decode_match_result(b"A-1,B-1\n")


class TestTransports(unittest.TestCase):
    """Test cases for the transports"""

    def test_in_process_pair(self):
        """Test frames cross an in-process pair in order"""
        left, right = InProcessTransport.pair(timeout=1.0)
        left.send(b"one")
        left.send(b"two")
        self.assertEqual(right.receive(), b"one")
        self.assertEqual(right.receive(), b"two")
        left.close()
        with self.assertRaises(TransportError):
            right.receive()
        with self.assertRaises(TransportError):
            left.send(b"three")

    def test_in_process_timeout(self):
        """Test a silent peer times out"""
        left, _ = InProcessTransport.pair(timeout=0.05)
        with self.assertRaises(TransportError):
            left.receive()

    def test_tcp_framing(self):
        """Test the u32 length prefix over a stream socket"""
        raw_a, raw_b = socket.socketpair()
        with TcpTransport(raw_a) as sender:
            sender.send(b"hello")
            self.assertEqual(raw_b.recv(9), b"\x00\x00\x00\x05hello")
            sender.send(b"")
            receiver = TcpTransport(raw_b)
            self.assertEqual(receiver.receive(), b"")
        with self.assertRaises(TransportError):
            receiver.receive()
        receiver.close()

    def test_tcp_large_frame(self):
        """Test a frame larger than one receive chunk"""
        raw_a, raw_b = socket.socketpair()
        payload = bytes(range(256)) * 2000
        sender, receiver = TcpTransport(raw_a), TcpTransport(raw_b)
        thread = threading.Thread(target=sender.send, args=(payload,))
        thread.start()
        self.assertEqual(receiver.receive(), payload)
        thread.join()
        sender.close()
        receiver.close()

    def test_recording_transport(self):
        """Test recorded copies of sent and received frames"""
        left, right = InProcessTransport.pair(timeout=1.0)
        recorder = RecordingTransport(left)
        recorder.send(b"ping")
        right.send(b"pong")
        self.assertEqual(recorder.receive(), b"pong")
        self.assertEqual(recorder.sent, [b"ping"])
        self.assertEqual(recorder.received, [b"pong"])


class TestPartySession(unittest.TestCase):
    """Test cases for the two-party session"""

    def setUp(self):
        """Set up test fixtures"""
        self.alice, self.bob, self.rs = linked_parties()
        self.cfg = ExperimentConfig(training_size=8, C=10.0, rng_seed=4)

    def test_in_process_session(self):
        """Test both parties finish with full arrays and exchange their matches"""
        session_a, session_b = simulate_session(self.alice, self.bob, self.rs, self.cfg)
        self.assertEqual(len(session_a.result), 64)
        self.assertEqual(len(session_b.result), 64)
        self.assertEqual(session_a.result.ids_a, session_b.result.ids_a)
        self.assertEqual(session_a.peer_matches, session_b.result.matched_pairs())
        self.assertEqual(session_b.peer_matches, session_a.result.matched_pairs())
        self.assertEqual(session_a.peer_smashed, session_b.party.smashed)
        self.assertEqual(session_a.agreement, session_b.agreement)

    def test_session_matches_direct_computation(self):
        """Test the session result equals matching the parties directly"""
        session_a, _ = simulate_session(self.alice, self.bob, self.rs, self.cfg)
        direct = session_a.party.match(session_a.peer_smashed)
        self.assertEqual(session_a.result, direct)

    def test_small_batches(self):
        """Test smashed vectors split across several batches"""
        end_a, end_b = InProcessTransport.pair(timeout=30.0)
        sessions = [
            PartySession(self.alice, self.rs, self.cfg, end_a, batch_records=3),
            PartySession(self.bob, self.rs, self.cfg, end_b, batch_records=3),
        ]
        threads = [threading.Thread(target=session.run) for session in sessions]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        self.assertEqual(sessions[0].peer_smashed, sessions[1].party.smashed)
        self.assertIsNotNone(sessions[1].result)

    def test_payloads_leak_no_quasi_identifiers(self):
        """Test nothing on the wire contains plaintext attribute substrings"""
        session_a, session_b = simulate_session(
            self.alice, self.bob, self.rs, self.cfg, wrap=RecordingTransport
        )
        frames = session_a.transport.sent + session_b.transport.sent
        self.assertEqual(frames, session_b.transport.received + session_a.transport.received)
        self.assertEqual(audit_payloads(frames, self.alice), [])
        self.assertEqual(audit_payloads(frames, self.bob), [])

    def test_tcp_session_is_byte_identical(self):
        """Test a TCP session sends the same frames as an in-process one"""
        reference_a, reference_b = simulate_session(
            self.alice, self.bob, self.rs, self.cfg, wrap=RecordingTransport
        )
        outcome = {}
        with TcpListener("127.0.0.1", 0, timeout=30.0) as listener:
            def serve():
                with RecordingTransport(listener.accept()) as transport:
                    session = PartySession(self.bob, self.rs, self.cfg, transport)
                    session.run()
                    outcome["b"] = session

            thread = threading.Thread(target=serve)
            thread.start()
            with RecordingTransport(connect("127.0.0.1", listener.port, retries=5, delay=0.1)) as transport:
                session_a = PartySession(self.alice, self.rs, self.cfg, transport)
                session_a.run()
            thread.join()
        self.assertEqual(session_a.transport.sent, reference_a.transport.sent)
        self.assertEqual(outcome["b"].transport.sent, reference_b.transport.sent)
        self.assertEqual(session_a.result, reference_a.result)

    def test_agreement_mismatch(self):
        """Test differing reference sets abort before any smashed data moves"""
        other_rs = ReferenceSet(self.rs.schema, self.rs.rows[::-1])
        with self.assertRaises(AgreementMismatch) as ctx:
            simulate_session(self.alice, self.bob, self.rs, self.cfg, rs_b=other_rs, wrap=RecordingTransport)
        self.assertIn("reference_set_digest", str(ctx.exception))

    def test_out_of_order_message(self):
        """Test an unexpected message kind is a protocol violation"""
        end_a, end_b = InProcessTransport.pair(timeout=1.0)
        end_b.send(ProtocolMessage(MessageKind.DONE).encode())
        with self.assertRaises(ProtocolViolation):
            PartySession(self.alice, self.rs, self.cfg, end_a).run()
        self.assertEqual(ProtocolMessage.decode(end_b.receive()).kind, MessageKind.HELLO)
        self.assertEqual(ProtocolMessage.decode(end_b.receive()).kind, MessageKind.ERROR)

    def test_peer_version_and_role(self):
        """Test Hello checks on version and role"""
        for hello, error in (
            (Hello(Party.B, 8, format_version=9999), VersionMismatchError),
            (Hello(Party.A, 8), ProtocolViolation),
            (Hello(Party.B, 0), ProtocolViolation),
        ):
            with self.subTest(hello=hello):
                end_a, end_b = InProcessTransport.pair(timeout=1.0)
                end_b.send(hello.to_message().encode())
                with self.assertRaises(error):
                    PartySession(self.alice, self.rs, self.cfg, end_a).run()

    def test_peer_abort(self):
        """Test an Error message from the peer"""
        end_a, end_b = InProcessTransport.pair(timeout=0.2)
        end_b.send(ProtocolMessage(MessageKind.ERROR, b"DataError: broken").encode())
        with self.assertRaises(PeerAborted) as ctx:
            PartySession(self.alice, self.rs, self.cfg, end_a).run()
        self.assertIn("broken", str(ctx.exception))
        self.assertEqual(ProtocolMessage.decode(end_b.receive()).kind, MessageKind.HELLO)
        with self.assertRaises(TransportError):
            end_b.receive()

    def test_run_party_checks_role(self):
        """Test the role must match the record set"""
        end_a, _ = InProcessTransport.pair(timeout=1.0)
        with self.assertRaises(ConfigurationError):
            run_party(Party.B, self.alice, self.rs, self.cfg, end_a)


class TestLeakageAudit(unittest.TestCase):
    """Test cases for the leakage audit"""

    def test_finds_substrings(self):
        """Test plaintext windows are detected"""
        alice, _, _ = linked_parties()
        self.assertEqual(find_leaked_substrings(b"..ADA..", alice), ["ADA"])
        self.assertEqual(find_leaked_substrings(b"xxKINGxx", alice), ["ING", "KIN"])
        self.assertEqual(find_leaked_substrings(b"nothing", alice), [])
        with self.assertRaises(ValueError):
            find_leaked_substrings(b"", alice, min_len=0)


if __name__ == "__main__":
    unittest.main()
