"""
Numeric payloads: smashed distance vectors, feature vectors and labeled examples
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from .errors import StructureMismatchError, ValidationError


class SmashedVector:
    """
    Per-record grouped edit distances to the reference set: one group per mapping
    pair, |RS| non-negative integers per group. Holds no string payload besides
    the opaque record ID.
    """

    def __init__(self, record_id: str, groups: Any):
        array = np.array(groups, dtype=np.int64)
        if array.ndim != 2:
            raise ValidationError(
                f"Smashed vector {record_id} must be a list of equal-length groups"
            )
        if array.size and array.min() < 0:
            raise ValidationError(f"Smashed vector {record_id} holds a negative distance")
        array.setflags(write=False)
        self._record_id = record_id
        self._groups = array

    @property
    def record_id(self) -> str:
        return self._record_id

    @property
    def groups(self) -> np.ndarray:
        """Read-only (group_count, group_len) integer array"""
        return self._groups

    @property
    def group_count(self) -> int:
        return int(self._groups.shape[0])

    @property
    def group_len(self) -> int:
        return int(self._groups.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.group_count, self.group_len

    def to_lists(self) -> List[List[int]]:
        return self._groups.tolist()

    def to_dict(self) -> Dict[str, Any]:
        return {"record_id": self._record_id, "groups": self.to_lists()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SmashedVector":
        return cls(data["record_id"], data["groups"])

    def __repr__(self) -> str:
        return f"SmashedVector(record_id='{self._record_id}', groups={self.to_lists()})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SmashedVector)
            and self._record_id == other._record_id
            and self._groups.shape == other._groups.shape
            and bool(np.array_equal(self._groups, other._groups))
        )


def stack_groups(vectors: Sequence[SmashedVector]) -> np.ndarray:
    """Stack a uniform batch into a (records, groups, group_len) array"""
    if not vectors:
        return np.zeros((0, 0, 0), dtype=np.int64)
    shape = vectors[0].shape
    for position, vector in enumerate(vectors):
        if vector.shape != shape:
            raise StructureMismatchError(
                f"Smashed vector {vector.record_id} has shape {vector.shape}, "
                f"batch shape is {shape}",
                pair_index=position
            )
    return np.stack([vector.groups for vector in vectors])


@dataclass(frozen=True)
class FeatureVector:
    """Per-pair cosine distances, one per mapping pair"""
    values: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(value) for value in self.values))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class LabeledExample:
    """A feature vector with label 1 (match) or 0 (non-match)"""
    features: FeatureVector
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValidationError(f"Label must be 0 or 1, got {self.label}")

    def to_dict(self) -> Dict[str, Any]:
        return {"features": list(self.features.values), "label": self.label}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LabeledExample":
        return cls(FeatureVector(tuple(data["features"])), int(data["label"]))


def examples_to_arrays(examples: Sequence[LabeledExample]) -> Tuple[np.ndarray, np.ndarray]:
    """Feature matrix and 0/1 label vector"""
    if not examples:
        return np.zeros((0, 0)), np.zeros(0, dtype=np.int64)
    dim = len(examples[0].features)
    for example in examples:
        if len(example.features) != dim:
            raise ValidationError(
                f"Inconsistent feature dimensions: {dim} and {len(example.features)}"
            )
    features = np.array([example.features.values for example in examples], dtype=np.float64)
    labels = np.array([example.label for example in examples], dtype=np.int64)
    return features, labels
