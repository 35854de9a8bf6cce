from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple
from enum import Enum

from .errors import ValidationError


class Party(Enum):
    """Dataholder roles"""
    A = "A"
    B = "B"

    @property
    def peer(self) -> "Party":
        return Party.B if self is Party.A else Party.A


def normalize_value(value: str) -> str:
    """Case-fold (uppercase) after trimming surrounding whitespace"""
    return value.strip().upper()


def mint_record_id(party: Party, row_number: int) -> str:
    """Opaque per-party record ID from a 1-based source row number"""
    return f"{party.value}-{row_number:06d}"


class Record:
    """
    A plaintext row of quasi-identifiers.

    ``source_id`` is bookkeeping for the evaluation harness (ground truth);
    it never leaves the owning party.
    """

    def __init__(
        self,
        record_id: str,
        attributes: Sequence[Tuple[str, str]],
        source_id: Optional[str] = None
    ):
        if not record_id or not isinstance(record_id, str):
            raise ValidationError("Record ID must be a non-empty string")
        self._record_id = record_id
        self._attributes: Tuple[Tuple[str, str], ...] = tuple(
            (name, normalize_value(value)) for name, value in attributes
        )
        self._source_id = source_id

    @property
    def record_id(self) -> str:
        return self._record_id

    @property
    def source_id(self) -> Optional[str]:
        return self._source_id

    @property
    def attributes(self) -> Tuple[Tuple[str, str], ...]:
        return self._attributes

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self._attributes)

    @property
    def values(self) -> Tuple[str, ...]:
        return tuple(value for _, value in self._attributes)

    def value(self, name: str) -> str:
        for attr_name, value in self._attributes:
            if attr_name == name:
                return value
        raise KeyError(name)

    def with_values(self, values: Sequence[str]) -> "Record":
        """Copy with replaced attribute values, same ID and names"""
        if len(values) != len(self._attributes):
            raise ValidationError(
                f"Expected {len(self._attributes)} values, got {len(values)}"
            )
        return Record(self._record_id, list(zip(self.names, values)), self._source_id)

    def with_id(self, record_id: str) -> "Record":
        return Record(record_id, self._attributes, self._source_id)

    # Serialization
    def to_dict(self) -> Dict[str, Any]:
        return {
            "record_id": self._record_id,
            "attributes": [[name, value] for name, value in self._attributes],
            "source_id": self._source_id
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Record":
        return cls(
            record_id=data["record_id"],
            attributes=[(name, value) for name, value in data["attributes"]],
            source_id=data.get("source_id")
        )

    def __str__(self) -> str:
        return f"Record({self._record_id})"

    def __repr__(self) -> str:
        return f"Record(record_id='{self._record_id}', attributes={list(self._attributes)})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Record)
            and self._record_id == other._record_id
            and self._attributes == other._attributes
            and self._source_id == other._source_id
        )

    def __hash__(self) -> int:
        return hash((self._record_id, self._attributes))


class RecordSet:
    """
    One party's recordset over an agreed, ordered schema of m matching attributes
    """

    def __init__(self, party: Party, schema: Sequence[str], records: Iterable[Record] = ()):
        self._party = party
        self._schema: Tuple[str, ...] = tuple(schema)
        if not self._schema:
            raise ValidationError("Schema needs at least one matching attribute")
        if len(set(self._schema)) != len(self._schema):
            raise ValidationError(f"Duplicate attribute names in schema {list(self._schema)}")
        self._records: Tuple[Record, ...] = tuple(records)
        self._index: Dict[str, int] = {}
        for position, record in enumerate(self._records):
            if record.names != self._schema:
                raise ValidationError(
                    f"Record {record.record_id} attributes {list(record.names)} "
                    f"do not match schema {list(self._schema)}"
                )
            if record.record_id in self._index:
                raise ValidationError(f"Duplicate record ID {record.record_id}")
            self._index[record.record_id] = position

    @property
    def party(self) -> Party:
        return self._party

    @property
    def schema(self) -> Tuple[str, ...]:
        return self._schema

    @property
    def records(self) -> Tuple[Record, ...]:
        return self._records

    @property
    def record_ids(self) -> List[str]:
        return [record.record_id for record in self._records]

    def get(self, record_id: str) -> Optional[Record]:
        position = self._index.get(record_id)
        return None if position is None else self._records[position]

    def attribute_values(self) -> Set[str]:
        """Every distinct attribute value in the set"""
        return {value for record in self._records for value in record.values}

    def is_candidate_key(self) -> bool:
        """True when the concatenated matching attributes are unique per record"""
        keys = {record.values for record in self._records}
        return len(keys) == len(self._records)

    def with_records(self, records: Iterable[Record]) -> "RecordSet":
        return RecordSet(self._party, self._schema, records)

    def head(self, n: int) -> "RecordSet":
        return self.with_records(self._records[:n])

    def assign_party(self, party: Party, order: Optional[Sequence[int]] = None) -> "RecordSet":
        """
        Re-mint record IDs for ``party`` (optionally after reordering rows);
        source IDs are kept so the harness can still derive ground truth
        """
        positions = range(len(self._records)) if order is None else order
        records = [
            self._records[position].with_id(mint_record_id(party, row))
            for row, position in enumerate(positions, start=1)
        ]
        return RecordSet(party, self._schema, records)

    # Serialization
    def to_dict(self) -> Dict[str, Any]:
        return {
            "party": self._party.value,
            "schema": list(self._schema),
            "records": [record.to_dict() for record in self._records]
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RecordSet":
        return cls(
            party=Party(data["party"]),
            schema=data["schema"],
            records=[Record.from_dict(item) for item in data["records"]]
        )

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[Record]:
        return iter(self._records)

    def __getitem__(self, position: int) -> Record:
        return self._records[position]

    def __str__(self) -> str:
        return f"RecordSet({self._party.value}, {len(self._records)} records)"

    def __repr__(self) -> str:
        return f"RecordSet(party='{self._party.value}', schema={list(self._schema)}, size={len(self._records)})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RecordSet)
            and self._party == other._party
            and self._schema == other._schema
            and self._records == other._records
        )
