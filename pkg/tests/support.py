"""
Shared test data
"""

from typing import Sequence

from models.config import CorruptionSpec
from models.record import Party, Record, RecordSet, mint_record_id
from models.reference_set import ReferenceSet
from services.datagen_service import corrupt_recordset

VOTER_SCHEMA = ("first_name", "middle_name", "last_name")
ACTOR_SCHEMA = ("first_name", "last_name")

VOTERS = [
    ("ADA", "IVY", "KING"),
    ("BRUNO", "OTTO", "MILLER"),
    ("CLARA", "JUNE", "PETERS"),
    ("DMITRI", "LEE", "NOVAK"),
    ("EDITH", "ROSE", "WALSH"),
    ("FELIX", "GRANT", "HOLM"),
    ("GRETA", "MAE", "STONE"),
    ("HUGO", "DEAN", "BAKER"),
]

ACTORS = [
    ("CHARLIE", "ADLER"),
    ("JAY", "ADLER"),
    ("MARLON", "BRANDO"),
    ("AUDREY", "HEPBURN"),
    ("SOPHIA", "LOREN"),
    ("TOSHIRO", "MIFUNE"),
]


def make_recordset(rows: Sequence[Sequence[str]], party: Party = Party.A, schema=VOTER_SCHEMA) -> RecordSet:
    records = [
        Record(mint_record_id(party, number), zip(schema, row), source_id=str(number))
        for number, row in enumerate(rows, start=1)
    ]
    return RecordSet(party, schema, records)


def example_record() -> Record:
    return Record("A-000001", zip(VOTER_SCHEMA, ("ada", "ivy", "king")))


def example_reference_set() -> ReferenceSet:
    return ReferenceSet(ACTOR_SCHEMA, ACTORS[:2])


def actor_reference_set() -> ReferenceSet:
    return ReferenceSet(ACTOR_SCHEMA, ACTORS)


def linked_parties(seed: int = 5):
    """Alice, Bob (Alice corrupted and shuffled) and a reference set disjoint from both"""
    alice = make_recordset(VOTERS)
    bob = corrupt_recordset(alice, CorruptionSpec(rng_seed=seed)).assign_party(Party.B, [3, 1, 7, 0, 5, 2, 6, 4])
    rs = actor_reference_set().without_values(alice.attribute_values() | bob.attribute_values())
    return alice, bob, rs
