"""
MatchArray - classified cross-party record pairs, the protocol's output
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from .errors import ValidationError


class MatchLabel(Enum):
    """Predicted class of a record pair"""
    MATCH = 1
    NON_MATCH = 0

    @classmethod
    def from_decision(cls, decision_value: float) -> "MatchLabel":
        return cls.MATCH if decision_value >= 0 else cls.NON_MATCH


@dataclass(frozen=True)
class MatchEntry:
    record_id_a: str
    record_id_b: str
    decision_value: float
    predicted: MatchLabel

    def to_dict(self) -> Dict[str, Any]:
        return {
            "record_id_a": self.record_id_a,
            "record_id_b": self.record_id_b,
            "decision_value": self.decision_value,
            "predicted": self.predicted.value
        }


class MatchArray:
    """
    Decision values for the full cross product of A's and B's record IDs.

    Stored as a dense grid; rows and columns are kept sorted so iteration yields
    entries in canonical (record_id_a, record_id_b) order regardless of the
    order the inputs arrived in.
    """

    def __init__(self, ids_a: Sequence[str], ids_b: Sequence[str], decision_values: Any):
        values = np.array(decision_values, dtype=np.float64).reshape(len(ids_a), len(ids_b))
        if len(set(ids_a)) != len(ids_a) or len(set(ids_b)) != len(ids_b):
            raise ValidationError("MatchArray record IDs must be unique per side")
        row_order = sorted(range(len(ids_a)), key=lambda i: ids_a[i])
        col_order = sorted(range(len(ids_b)), key=lambda j: ids_b[j])
        values = values[np.ix_(row_order, col_order)] if values.size else values
        values.setflags(write=False)
        self._ids_a: Tuple[str, ...] = tuple(ids_a[i] for i in row_order)
        self._ids_b: Tuple[str, ...] = tuple(ids_b[j] for j in col_order)
        self._values = values

    @classmethod
    def from_blocks(cls, blocks: Iterable[Tuple[Sequence[str], np.ndarray]], ids_b: Sequence[str]) -> "MatchArray":
        """Merge row blocks scored by separate workers"""
        ids_a: List[str] = []
        rows: List[np.ndarray] = []
        for block_ids, block_values in blocks:
            ids_a.extend(block_ids)
            rows.append(np.asarray(block_values, dtype=np.float64).reshape(len(block_ids), len(ids_b)))
        values = np.concatenate(rows) if rows else np.zeros((0, len(ids_b)))
        return cls(ids_a, ids_b, values)

    @classmethod
    def from_entries(cls, entries: Iterable[MatchEntry]) -> "MatchArray":
        """Rebuild from entries; they must cover a complete cross product"""
        collected = list(entries)
        ids_a = sorted({entry.record_id_a for entry in collected})
        ids_b = sorted({entry.record_id_b for entry in collected})
        if len(collected) != len(ids_a) * len(ids_b):
            raise ValidationError(
                f"Entries do not form a cross product: {len(collected)} entries "
                f"for {len(ids_a)} x {len(ids_b)} IDs"
            )
        row = {record_id: i for i, record_id in enumerate(ids_a)}
        col = {record_id: j for j, record_id in enumerate(ids_b)}
        values = np.full((len(ids_a), len(ids_b)), np.nan)
        for entry in collected:
            i, j = row[entry.record_id_a], col[entry.record_id_b]
            if not np.isnan(values[i, j]):
                raise ValidationError(
                    f"Duplicate pair ({entry.record_id_a}, {entry.record_id_b})"
                )
            if entry.predicted is not MatchLabel.from_decision(entry.decision_value):
                raise ValidationError(
                    f"Pair ({entry.record_id_a}, {entry.record_id_b}) label disagrees "
                    f"with decision value {entry.decision_value!r}"
                )
            values[i, j] = entry.decision_value
        return cls(ids_a, ids_b, values)

    @property
    def ids_a(self) -> Tuple[str, ...]:
        return self._ids_a

    @property
    def ids_b(self) -> Tuple[str, ...]:
        return self._ids_b

    @property
    def decision_values(self) -> np.ndarray:
        """Read-only (|A|, |B|) grid in canonical order"""
        return self._values

    @property
    def predicted(self) -> np.ndarray:
        return self._values >= 0

    def entries(self) -> Iterator[MatchEntry]:
        for i, record_id_a in enumerate(self._ids_a):
            row = self._values[i]
            for j, record_id_b in enumerate(self._ids_b):
                value = float(row[j])
                yield MatchEntry(record_id_a, record_id_b, value, MatchLabel.from_decision(value))

    def matched_pairs(self) -> List[Tuple[str, str]]:
        """Predicted-match pairs in canonical order"""
        rows, cols = np.nonzero(self.predicted)
        return [(self._ids_a[i], self._ids_b[j]) for i, j in zip(rows.tolist(), cols.tolist())]

    def decision_value(self, record_id_a: str, record_id_b: str) -> float:
        return float(self._values[self._ids_a.index(record_id_a), self._ids_b.index(record_id_b)])

    def match_count(self) -> int:
        return int(np.count_nonzero(self.predicted))

    def __len__(self) -> int:
        return len(self._ids_a) * len(self._ids_b)

    def __iter__(self) -> Iterator[MatchEntry]:
        return self.entries()

    def __str__(self) -> str:
        return f"MatchArray({len(self._ids_a)}x{len(self._ids_b)}, {self.match_count()} matches)"

    def __repr__(self) -> str:
        return f"MatchArray(ids_a={len(self._ids_a)}, ids_b={len(self._ids_b)})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MatchArray)
            and self._ids_a == other._ids_a
            and self._ids_b == other._ids_b
            and bool(np.array_equal(self._values, other._values))
        )
