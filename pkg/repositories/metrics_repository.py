"""
Metrics Repository - MetricsReport rows as CSV; the config echo is a JSON column
"""

import csv
import json
from dataclasses import fields
from pathlib import Path
from typing import List

from models.errors import DataError
from models.metrics import MetricsReport
from .base_repository import BaseRepository, PathLike

COLUMNS = [f.name for f in fields(MetricsReport)]
_INTEGER = {"repetition", "seed"}
_FLAG = {"precision_undefined", "recall_undefined"}
_TEXT = {"party"}


def _format(name: str, value) -> str:
    if name == "config":
        return json.dumps(value, sort_keys=True)
    if name in _FLAG:
        return "1" if value else "0"
    if name in _INTEGER or name in _TEXT:
        return str(value)
    return repr(float(value))


def _parse(name: str, text: str):
    if name == "config":
        return json.loads(text) if text else {}
    if name in _FLAG:
        return text == "1"
    if name in _INTEGER:
        return int(text)
    if name in _TEXT:
        return text
    return float(text)


class MetricsReportRepository(BaseRepository[List[MetricsReport]]):

    def save(self, reports: List[MetricsReport], path: PathLike) -> Path:
        path = self._prepare_for_write(path)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(COLUMNS)
            for report in reports:
                data = report.to_dict()
                writer.writerow([_format(name, data[name]) for name in COLUMNS])
        return path

    def load(self, path: PathLike) -> List[MetricsReport]:
        path = self._open_for_read(path)
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            missing = set(COLUMNS) - set(reader.fieldnames or [])
            if missing:
                raise DataError(f"{path}: missing columns {sorted(missing)}")
            try:
                return [
                    MetricsReport.from_dict({name: _parse(name, row[name]) for name in COLUMNS})
                    for row in reader
                ]
            except (ValueError, TypeError) as exc:
                raise DataError(f"{path}: malformed metrics row: {exc}") from exc
