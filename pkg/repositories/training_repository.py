"""
Training Data Repository - labeled feature vectors as CSV (f1..fd, label)
"""

import csv
from pathlib import Path
from typing import List

from models.errors import DataError, ValidationError
from models.vectors import FeatureVector, LabeledExample
from .base_repository import BaseRepository, PathLike


class TrainingDataRepository(BaseRepository[List[LabeledExample]]):

    def save(self, examples: List[LabeledExample], path: PathLike) -> Path:
        if not examples:
            raise DataError("No training examples to save")
        dimension = len(examples[0].features)
        path = self._prepare_for_write(path)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow([f"f{i}" for i in range(1, dimension + 1)] + ["label"])
            for example in examples:
                if len(example.features) != dimension:
                    raise DataError(
                        f"Training example has {len(example.features)} features, expected {dimension}"
                    )
                writer.writerow([repr(value) for value in example.features.values] + [example.label])
        return path

    def load(self, path: PathLike) -> List[LabeledExample]:
        path = self._open_for_read(path)
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if not header or header[-1] != "label":
                raise DataError(f"{path}: last column must be 'label'")
            examples = []
            for number, row in enumerate(reader, start=2):
                if len(row) != len(header):
                    raise DataError(f"{path}:{number}: expected {len(header)} columns, got {len(row)}")
                try:
                    features = FeatureVector(tuple(float(value) for value in row[:-1]))
                    examples.append(LabeledExample(features, int(row[-1])))
                except (ValueError, ValidationError) as exc:
                    raise DataError(f"{path}:{number}: {exc}") from exc
        return examples
