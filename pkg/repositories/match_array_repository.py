"""
MatchArray Repository - one CSV row per classified pair
"""

import csv
from pathlib import Path

from models.errors import DataError, ValidationError
from models.match_array import MatchArray, MatchEntry, MatchLabel
from .base_repository import BaseRepository, PathLike

HEADER = ["record_id_A", "record_id_B", "decision_value", "predicted"]


class MatchArrayRepository(BaseRepository[MatchArray]):
    """
    Rows are written in canonical (record_id_A, record_id_B) order with
    17 significant digits, so equal arrays give byte-identical files.
    """

    def save(self, ma: MatchArray, path: PathLike) -> Path:
        path = self._prepare_for_write(path)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(HEADER)
            for entry in ma:
                writer.writerow([
                    entry.record_id_a,
                    entry.record_id_b,
                    f"{entry.decision_value:.17g}",
                    entry.predicted.value
                ])
        return path

    def load(self, path: PathLike) -> MatchArray:
        path = self._open_for_read(path)
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            if next(reader, None) != HEADER:
                raise DataError(f"{path}: expected header {','.join(HEADER)}")
            entries = []
            for number, row in enumerate(reader, start=2):
                try:
                    record_id_a, record_id_b, value, predicted = row
                    entries.append(MatchEntry(record_id_a, record_id_b, float(value), MatchLabel(int(predicted))))
                except ValueError as exc:
                    raise DataError(f"{path}:{number}: malformed match row {row}") from exc
        try:
            return MatchArray.from_entries(entries)
        except ValidationError as exc:
            raise DataError(f"{path}: {exc}") from exc
