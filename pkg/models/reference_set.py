"""
Reference set and attribute mapping - the public coordinate system both parties agree on
"""

import hashlib
import json
from typing import Any, Dict, Iterable, List, Sequence, Set, Tuple

from .errors import ConfigurationError, ValidationError
from .record import RecordSet, normalize_value


class ReferenceSet:
    """
    Public corpus of k string attributes per row, disjoint from all recordsets
    """

    def __init__(self, schema: Sequence[str], rows: Iterable[Sequence[str]]):
        self._schema: Tuple[str, ...] = tuple(schema)
        if not self._schema:
            raise ValidationError("Reference set needs at least one attribute")
        self._rows: Tuple[Tuple[str, ...], ...] = tuple(
            tuple(normalize_value(value) for value in row) for row in rows
        )
        for number, row in enumerate(self._rows, start=1):
            if len(row) != len(self._schema):
                raise ValidationError(
                    f"Reference row {number} has {len(row)} values, schema has {len(self._schema)}"
                )

    @property
    def schema(self) -> Tuple[str, ...]:
        return self._schema

    @property
    def rows(self) -> Tuple[Tuple[str, ...], ...]:
        return self._rows

    @property
    def k(self) -> int:
        return len(self._schema)

    def column(self, name: str) -> List[str]:
        """All values of one reference attribute, in row order"""
        try:
            position = self._schema.index(name)
        except ValueError:
            raise ConfigurationError(f"Unknown reference attribute '{name}'") from None
        return [row[position] for row in self._rows]

    def attribute_values(self) -> Set[str]:
        return {value for row in self._rows for value in row}

    def head(self, n: int) -> "ReferenceSet":
        return ReferenceSet(self._schema, self._rows[:n])

    def without_values(self, values: Set[str]) -> "ReferenceSet":
        """Drop every row holding any of ``values``"""
        return ReferenceSet(
            self._schema,
            [row for row in self._rows if not any(value in values for value in row)]
        )

    def canonical_bytes(self) -> bytes:
        """Canonical serialization both parties hash for the agreement"""
        return json.dumps(
            {"schema": list(self._schema), "rows": [list(row) for row in self._rows]},
            ensure_ascii=False,
            separators=(",", ":")
        ).encode("utf-8")

    def digest(self) -> bytes:
        return hashlib.sha256(self.canonical_bytes()).digest()

    def to_dict(self) -> Dict[str, Any]:
        return {"schema": list(self._schema), "rows": [list(row) for row in self._rows]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ReferenceSet":
        return cls(data["schema"], data["rows"])

    def __len__(self) -> int:
        return len(self._rows)

    def __str__(self) -> str:
        return f"ReferenceSet({len(self._rows)} rows, k={self.k})"

    def __repr__(self) -> str:
        return f"ReferenceSet(schema={list(self._schema)}, size={len(self._rows)})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ReferenceSet)
            and self._schema == other._schema
            and self._rows == other._rows
        )


def validate_disjointness(rs: ReferenceSet, recs: RecordSet) -> bool:
    """True iff no attribute value of ``recs`` appears as any value in ``rs``"""
    reference_values = rs.attribute_values()
    return not any(value in reference_values for value in recs.attribute_values())


class AttributeMapping:
    """
    Ordered (record_attribute, reference_attribute) pairs. The pair order is part
    of the protocol agreement: it fixes the group order of every smashed vector.
    """

    def __init__(self, pairs: Iterable[Tuple[str, str]]):
        self._pairs: Tuple[Tuple[str, str], ...] = tuple(
            (str(record_attr), str(reference_attr)) for record_attr, reference_attr in pairs
        )
        if not self._pairs:
            raise ConfigurationError("Attribute mapping needs at least one pair")
        if len(set(self._pairs)) != len(self._pairs):
            raise ConfigurationError(f"Duplicate pairs in attribute mapping {self}")

    @property
    def pairs(self) -> Tuple[Tuple[str, str], ...]:
        return self._pairs

    @classmethod
    def default(cls, record_schema: Sequence[str], reference_schema: Sequence[str]) -> "AttributeMapping":
        """
        Record attributes also named in the RS map 1:1 and come first; every
        other record attribute then maps to all RS attributes
        (first->first, last->last, middle->first, middle->last)
        """
        pairs: List[Tuple[str, str]] = [
            (name, name) for name in record_schema if name in reference_schema
        ]
        for name in record_schema:
            if name not in reference_schema:
                pairs.extend((name, reference_name) for reference_name in reference_schema)
        return cls(pairs)

    @classmethod
    def parse(cls, text: str) -> "AttributeMapping":
        """Parse ``rec:ref,rec:ref,...``"""
        pairs = []
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            if item.count(":") != 1:
                raise ConfigurationError(f"Mapping pair '{item}' is not of the form rec:ref")
            record_attr, reference_attr = (part.strip() for part in item.split(":"))
            if not record_attr or not reference_attr:
                raise ConfigurationError(f"Mapping pair '{item}' has an empty name")
            pairs.append((record_attr, reference_attr))
        return cls(pairs)

    def validate(self, record_schema: Sequence[str], reference_schema: Sequence[str]) -> None:
        """Check every name against both schemas and that every record attribute is covered"""
        for record_attr, reference_attr in self._pairs:
            if record_attr not in record_schema:
                raise ConfigurationError(f"Unknown record attribute '{record_attr}' in mapping")
            if reference_attr not in reference_schema:
                raise ConfigurationError(f"Unknown reference attribute '{reference_attr}' in mapping")
        covered = {record_attr for record_attr, _ in self._pairs}
        for name in record_schema:
            if name not in covered:
                raise ConfigurationError(f"Record attribute '{name}' is not mapped")

    def dimensionality(self, reference_size: int) -> int:
        return len(self._pairs) * reference_size

    def to_text(self) -> str:
        return ",".join(f"{record_attr}:{reference_attr}" for record_attr, reference_attr in self._pairs)

    def to_dict(self) -> Dict[str, Any]:
        return {"pairs": [list(pair) for pair in self._pairs]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AttributeMapping":
        return cls((record_attr, reference_attr) for record_attr, reference_attr in data["pairs"])

    def __len__(self) -> int:
        return len(self._pairs)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"AttributeMapping('{self.to_text()}')"

    def __eq__(self, other) -> bool:
        return isinstance(other, AttributeMapping) and self._pairs == other._pairs

    def __hash__(self) -> int:
        return hash(self._pairs)
