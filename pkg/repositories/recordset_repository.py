"""
RecordSet / ReferenceSet Repositories - CSV files with a header row, UTF-8
"""

import csv
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from models.errors import DataError
from models.record import Party, Record, RecordSet, mint_record_id
from models.reference_set import ReferenceSet
from .base_repository import BaseRepository, PathLike

SOURCE_COLUMN = "source_id"


def _read_rows(path: Path) -> Tuple[List[str], List[List[str]]]:
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = [name.strip() for name in next(reader)]
        except StopIteration:
            raise DataError(f"{path} is empty; a header row is required") from None
        rows = [row for row in reader if any(cell.strip() for cell in row)]
    for number, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}:{number}: expected {len(header)} columns, got {len(row)}")
    return header, rows


def _select(header: List[str], columns: Sequence[str], path: Path) -> List[int]:
    positions = []
    for name in columns:
        if name not in header:
            raise DataError(f"{path}: column '{name}' not found in header {header}")
        positions.append(header.index(name))
    return positions


class RecordSetRepository(BaseRepository[RecordSet]):
    """
    Loads one party's records. Record IDs are minted from the party and the
    1-based data row number; the optional ``source_id`` column (or the row
    number) becomes the record's source ID for ground-truth bookkeeping.
    """

    def __init__(self, party: Party, columns: Optional[Sequence[str]] = None):
        self.party = party
        self.columns = list(columns) if columns else None

    def load(self, path: PathLike) -> RecordSet:
        path = self._open_for_read(path)
        header, rows = _read_rows(path)
        schema = self.columns or [name for name in header if name != SOURCE_COLUMN]
        positions = _select(header, schema, path)
        source = header.index(SOURCE_COLUMN) if SOURCE_COLUMN in header else None
        records = [
            Record(
                mint_record_id(self.party, number),
                [(name, row[position]) for name, position in zip(schema, positions)],
                source_id=(row[source] or None) if source is not None else str(number)
            )
            for number, row in enumerate(rows, start=1)
        ]
        return RecordSet(self.party, schema, records)

    def save(self, recs: RecordSet, path: PathLike) -> Path:
        path = self._prepare_for_write(path)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(list(recs.schema) + [SOURCE_COLUMN])
            for record in recs:
                writer.writerow(list(record.values) + [record.source_id or ""])
        return path


class ReferenceSetRepository(BaseRepository[ReferenceSet]):
    """Loads the public reference set; ``columns`` selects its k attributes"""

    def __init__(self, columns: Optional[Sequence[str]] = None):
        self.columns = list(columns) if columns else None

    def load(self, path: PathLike) -> ReferenceSet:
        path = self._open_for_read(path)
        header, rows = _read_rows(path)
        schema = self.columns or header
        positions = _select(header, schema, path)
        return ReferenceSet(schema, [[row[position] for position in positions] for row in rows])

    def save(self, rs: ReferenceSet, path: PathLike) -> Path:
        path = self._prepare_for_write(path)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(rs.schema)
            writer.writerows(rs.rows)
        return path
