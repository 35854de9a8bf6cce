"""
Data Generation Service - dataset preparation, the seeded record corrupter and
synthetic training-set building from a party's own records
"""

import logging
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np

from models.config import CorruptionSpec
from models.errors import CorruptionError, DataError, StructureMismatchError
from models.record import Record, RecordSet
from models.reference_set import AttributeMapping, ReferenceSet
from models.vectors import FeatureVector, LabeledExample, SmashedVector
from services.distance import paired_group_distances
from services.smashing_service import SmashingService

log = logging.getLogger(__name__)

MAX_REDRAWS = 100

# Independent random streams derived from one seed
CORRUPTION_STREAM = 1
NEGATIVE_STREAM = 2
SHUFFLE_STREAM = 3
SAMPLE_STREAM = 4
TRAINING_STREAM = 5


def derive_rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Per-record generator: results never depend on scheduling or order of calls"""
    return np.random.default_rng([seed, stream, index])


def deduplicate(recs: RecordSet) -> RecordSet:
    """Keep the first occurrence of each distinct matching-attribute tuple"""
    seen: Set[Tuple[str, ...]] = set()
    kept = []
    for record in recs:
        if record.values not in seen:
            seen.add(record.values)
            kept.append(record)
    removed = len(recs) - len(kept)
    if removed:
        log.info(f"Removed {removed} duplicate records from party {recs.party.value}")
    return recs.with_records(kept)


def _apply_operation(value: str, operation: str, alphabet: str, rng: np.random.Generator) -> Optional[str]:
    """One edit on ``value``, or None when the operation cannot change it"""
    if operation == "insert":
        position = int(rng.integers(len(value) + 1))
        char = alphabet[int(rng.integers(len(alphabet)))]
        return value[:position] + char + value[position:]
    if not value:
        return None
    if operation == "delete":
        position = int(rng.integers(len(value)))
        return value[:position] + value[position + 1:]
    if operation == "substitute":
        position = int(rng.integers(len(value)))
        choices = [char for char in alphabet if char != value[position]]
        if not choices:
            return None
        char = choices[int(rng.integers(len(choices)))]
        return value[:position] + char + value[position + 1:]
    if operation == "transpose":
        if len(value) < 2:
            return None
        position = int(rng.integers(len(value) - 1))
        if value[position] == value[position + 1]:
            return None
        return value[:position] + value[position + 1] + value[position] + value[position + 2:]
    raise CorruptionError(f"Unknown corruption operation '{operation}'")


def corrupt_record(r: Record, spec: CorruptionSpec, rng: np.random.Generator) -> Record:
    """
    Apply ``spec.errors_per_row`` random edits, each to a uniformly chosen
    attribute at a uniformly chosen position. Inapplicable draws are re-drawn.
    """
    values = list(r.values)
    if not values:
        raise CorruptionError(f"Record {r.record_id} has no attributes to corrupt")
    for _ in range(spec.errors_per_row):
        for _ in range(MAX_REDRAWS):
            attribute = int(rng.integers(len(values)))
            operation = spec.operations[int(rng.integers(len(spec.operations)))]
            changed = _apply_operation(values[attribute], operation, spec.alphabet, rng)
            if changed is not None:
                values[attribute] = changed
                break
        else:
            raise CorruptionError(
                f"No applicable corruption for record {r.record_id} after {MAX_REDRAWS} draws"
            )
    return r.with_values(values)


def corrupt_recordset(recs: RecordSet, spec: CorruptionSpec, avoid_collisions: bool = True) -> RecordSet:
    """
    Corrupt every record, keeping record IDs. With ``avoid_collisions`` a
    corrupted tuple never equals an original tuple or an earlier corrupted
    one, so a join on the quasi-identifiers comes back empty.
    """
    taken: Set[Tuple[str, ...]] = {record.values for record in recs} if avoid_collisions else set()
    corrupted = []
    for index, record in enumerate(recs):
        rng = derive_rng(spec.rng_seed, CORRUPTION_STREAM, index)
        for _ in range(MAX_REDRAWS):
            candidate = corrupt_record(record, spec, rng)
            if not avoid_collisions or candidate.values not in taken:
                break
        else:
            raise CorruptionError(
                f"Corruptions of record {record.record_id} keep colliding with existing records"
            )
        if avoid_collisions:
            taken.add(candidate.values)
        corrupted.append(candidate)
    log.info(f"Corrupted {len(corrupted)} records with {spec.errors_per_row} error(s) per row")
    return recs.with_records(corrupted)


def sample_negative_indices(n: int, seed: int) -> List[int]:
    """For each row i, one index k != i drawn uniformly"""
    if n < 2:
        raise DataError(f"Need at least 2 records to draw non-matching pairs, got {n}")
    indices = []
    for i in range(n):
        k = int(derive_rng(seed, NEGATIVE_STREAM, i).integers(n - 1))
        indices.append(k + 1 if k >= i else k)
    return indices


class TrainingDataBuilder:
    """
    Builds a balanced synthetic training set from one party's own records:
    (d(D_i, D'_i), 1) and (d(D_i, D'_k), 0) with k != i, where D' smashes a
    corrupted copy of the records.
    """

    def __init__(self, smashing_service: SmashingService, spec: CorruptionSpec):
        self.smashing_service = smashing_service
        self.spec = spec

    def build(self, smashed: Sequence[SmashedVector], recs: RecordSet) -> List[LabeledExample]:
        n = len(recs)
        if n < 2:
            raise DataError(f"Need at least 2 records to build training data, got {n}")
        if len(smashed) != n:
            raise StructureMismatchError(f"{len(smashed)} smashed vectors for {n} records")
        for pair_index, (vector, record) in enumerate(zip(smashed, recs)):
            if vector.record_id != record.record_id:
                raise StructureMismatchError(
                    f"Smashed vector {vector.record_id} does not belong to record {record.record_id}",
                    pair_index=pair_index
                )
        corrupted = corrupt_recordset(recs, self.spec)
        corrupted_smashed = self.smashing_service.map_recordset(corrupted)
        negatives = sample_negative_indices(n, self.spec.rng_seed)

        positive_features = paired_group_distances(smashed, corrupted_smashed)
        negative_features = paired_group_distances(smashed, [corrupted_smashed[k] for k in negatives])
        examples = []
        for i in range(n):
            examples.append(LabeledExample(FeatureVector(tuple(positive_features[i].tolist())), 1))
            examples.append(LabeledExample(FeatureVector(tuple(negative_features[i].tolist())), 0))
        log.info(f"Built {len(examples)} training examples from {n} records")
        return examples


def build_training_data(
    D: Sequence[SmashedVector],
    recs: RecordSet,
    rs: ReferenceSet,
    m: Optional[AttributeMapping],
    spec: CorruptionSpec,
    smashing_service: Optional[SmashingService] = None
) -> List[LabeledExample]:
    service = smashing_service or SmashingService(rs, m)
    return TrainingDataBuilder(service, spec).build(D, recs)


def shuffled_order(n: int, seed: int) -> List[int]:
    return derive_rng(seed, SHUFFLE_STREAM).permutation(n).tolist()


def sample_records(recs: RecordSet, size: int, seed: int) -> RecordSet:
    """A seeded subset of ``size`` records in original order (all when size >= len)"""
    if size >= len(recs):
        return recs
    chosen = sorted(derive_rng(seed, SAMPLE_STREAM).choice(len(recs), size=size, replace=False).tolist())
    return recs.with_records(recs[i] for i in chosen)


def derive_seed(seed: int, *keys: int) -> int:
    """A 32-bit sub-seed for an independent consumer of ``seed``"""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])
