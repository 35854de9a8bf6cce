"""
Linkage Service - split matching over exchanged smashed vectors, the plain
(non-private) SVM baseline and the threshold-based ideal-match oracle
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.config import CorruptionSpec, ExperimentConfig, IdealMatchConfig, SvmConfig
from models.errors import DataError, StructureMismatchError, ValidationError
from models.match_array import MatchArray
from models.record import Party, Record, RecordSet
from models.reference_set import AttributeMapping, ReferenceSet, validate_disjointness
from models.svm_model import SvmModel
from models.vectors import FeatureVector, LabeledExample, SmashedVector, stack_groups
from services.datagen_service import (
    TRAINING_STREAM, TrainingDataBuilder, corrupt_recordset, derive_seed,
    sample_negative_indices, sample_records,
)
from services.distance import EncodedStrings, cross_group_distances, edit_distance, edit_distances
from services.smashing_service import SmashingService
from services.svm_service import SmoTrainer, decision_values

log = logging.getLogger(__name__)

PAIR_WARNING_LIMIT = 10 ** 8
BLOCK_PAIRS = 1 << 21


def similarity(a: str, b: str) -> float:
    """Normalized edit similarity 1 - ed(a, b) / max(len(a), len(b), 1)"""
    return 1.0 - edit_distance(a, b) / max(len(a), len(b), 1)


def similarity_features(a: Record, b: Record) -> FeatureVector:
    """Per-attribute similarities of two plaintext records (baseline features)"""
    if a.names != b.names:
        raise DataError(f"Schema mismatch: {list(a.names)} vs {list(b.names)}")
    return FeatureVector(tuple(similarity(x, y) for x, y in zip(a.values, b.values)))


def ideal_match(a: Record, b: Record, cfg: IdealMatchConfig) -> int:
    """1 iff every attribute similarity reaches its threshold"""
    if a.names != b.names:
        raise ValidationError(f"Schema mismatch: {list(a.names)} vs {list(b.names)}")
    if len(cfg.thresholds) != len(a.names):
        raise ValidationError(
            f"{len(cfg.thresholds)} thresholds for {len(a.names)} attributes"
        )
    matched = all(
        similarity(x, y) >= threshold
        for x, y, threshold in zip(a.values, b.values, cfg.thresholds)
    )
    return 1 if matched else 0


def _row_blocks(n_rows: int, n_cols: int) -> List[Tuple[int, int]]:
    rows = max(1, BLOCK_PAIRS // max(n_cols, 1))
    return [(start, min(start + rows, n_rows)) for start in range(0, n_rows, rows)]


def _warn_size(n_a: int, n_b: int) -> None:
    if n_a * n_b > PAIR_WARNING_LIMIT:
        log.warning(f"Scoring {n_a * n_b} pairs without blocking; this will be slow")


def _check_batch(vectors: Sequence[SmashedVector], shape: Tuple[int, int], side: str) -> None:
    for index, vector in enumerate(vectors):
        if vector.shape != shape:
            group_index = 0 if vector.group_count == shape[0] else min(vector.group_count, shape[0])
            raise StructureMismatchError(
                f"Smashed vector {vector.record_id} ({side}[{index}]) has shape "
                f"{vector.shape}, expected {shape}",
                group_index=group_index,
                pair_index=index
            )


def split_match(
    DA: Sequence[SmashedVector],
    DB: Sequence[SmashedVector],
    model: SvmModel,
    workers: int = 1
) -> MatchArray:
    """
    Classify d(DA_i, DB_j) for every cross-party pair with the local model.
    Rows are scored in blocks (optionally on worker threads) and merged in
    canonical order, so the result does not depend on scheduling.
    """
    ids_a = [vector.record_id for vector in DA]
    ids_b = [vector.record_id for vector in DB]
    if not DA or not DB:
        return MatchArray(ids_a, ids_b, np.zeros((len(ids_a), len(ids_b))))
    shape = DA[0].shape
    _check_batch(DA, shape, "A")
    _check_batch(DB, shape, "B")
    if model.dimension != shape[0]:
        raise StructureMismatchError(
            f"Model expects {model.dimension} features, smashed vectors have {shape[0]} groups"
        )
    _warn_size(len(DA), len(DB))
    stack_a = stack_groups(DA)
    stack_b = stack_groups(DB)

    def score(block: Tuple[int, int]) -> Tuple[List[str], np.ndarray]:
        start, end = block
        features = cross_group_distances(stack_a[start:end], stack_b)
        values = decision_values(model, features.reshape(-1, shape[0]))
        return ids_a[start:end], values.reshape(end - start, len(ids_b))

    blocks = _row_blocks(len(DA), len(DB))
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(score, blocks))
    else:
        scored = [score(block) for block in blocks]
    return MatchArray.from_blocks(scored, ids_b)


class SimilarityTable:
    """Per-attribute similarity matrices over the distinct values of two recordsets"""

    def __init__(self, a: RecordSet, b: RecordSet):
        if a.schema != b.schema:
            raise DataError(f"Schema mismatch: {list(a.schema)} vs {list(b.schema)}")
        self.index_a: List[np.ndarray] = []
        self.index_b: List[np.ndarray] = []
        self.tables: List[np.ndarray] = []
        for position in range(len(a.schema)):
            values_a = [record.values[position] for record in a]
            values_b = [record.values[position] for record in b]
            distinct_a, index_a = self._distinct(values_a)
            distinct_b, index_b = self._distinct(values_b)
            encoded_b = EncodedStrings(distinct_b)
            lengths_b = encoded_b.lengths
            table = np.empty((len(distinct_a), len(distinct_b)))
            for row, value in enumerate(distinct_a):
                longest = np.maximum(np.maximum(lengths_b, len(value)), 1)
                table[row] = 1.0 - edit_distances(value, encoded_b) / longest
            self.index_a.append(index_a)
            self.index_b.append(index_b)
            self.tables.append(table)

    @staticmethod
    def _distinct(values: Sequence[str]) -> Tuple[List[str], np.ndarray]:
        positions: Dict[str, int] = {}
        index = np.array([positions.setdefault(value, len(positions)) for value in values], dtype=np.int64)
        return list(positions), index

    def features(self, start: int, end: int) -> np.ndarray:
        """(end - start, |B|, m) features for A rows [start, end)"""
        return np.stack([
            table[index_a[start:end]][:, index_b]
            for table, index_a, index_b in zip(self.tables, self.index_a, self.index_b)
        ], axis=-1)


def plain_match(A: RecordSet, B: RecordSet, model: SvmModel, workers: int = 1) -> MatchArray:
    """Non-private baseline: per-attribute similarities on plaintext, one central model"""
    if A.schema != B.schema:
        raise DataError(f"Schema mismatch: {list(A.schema)} vs {list(B.schema)}")
    if model.dimension != len(A.schema):
        raise StructureMismatchError(
            f"Model expects {model.dimension} features, schema has {len(A.schema)} attributes"
        )
    ids_a, ids_b = A.record_ids, B.record_ids
    if not len(A) or not len(B):
        return MatchArray(ids_a, ids_b, np.zeros((len(ids_a), len(ids_b))))
    _warn_size(len(A), len(B))
    table = SimilarityTable(A, B)
    m = len(A.schema)

    def score(block: Tuple[int, int]) -> Tuple[List[str], np.ndarray]:
        start, end = block
        values = decision_values(model, table.features(start, end).reshape(-1, m))
        return ids_a[start:end], values.reshape(end - start, len(ids_b))

    blocks = _row_blocks(len(A), len(B))
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(score, blocks))
    else:
        scored = [score(block) for block in blocks]
    return MatchArray.from_blocks(scored, ids_b)


def build_plain_training_data(recs: RecordSet, spec: CorruptionSpec) -> List[LabeledExample]:
    """Self-corruption positives and other-corruption negatives on similarity features"""
    n = len(recs)
    if n < 2:
        raise DataError(f"Need at least 2 records to train the baseline, got {n}")
    corrupted = corrupt_recordset(recs, spec)
    negatives = sample_negative_indices(n, spec.rng_seed)
    examples = []
    for i, record in enumerate(recs):
        examples.append(LabeledExample(similarity_features(record, corrupted[i]), 1))
        examples.append(LabeledExample(similarity_features(record, corrupted[negatives[i]]), 0))
    return examples


def train_plain_baseline(recs: RecordSet, spec: CorruptionSpec, cfg: SvmConfig) -> SvmModel:
    examples = build_plain_training_data(recs, spec)
    log.info(f"Training plain baseline on {len(examples)} examples")
    return SmoTrainer(cfg, seed=spec.rng_seed).train(examples)


class SplitParty:
    """
    One dataholder's side of split matching: smash own records, build synthetic
    training data from them, train the local model, then score the cross
    product against the peer's smashed vectors.
    """

    def __init__(self, recs: RecordSet, reference_set: ReferenceSet, config: ExperimentConfig):
        self.recs = recs
        self.reference_set = reference_set
        self.config = config
        self.smashing_service = SmashingService(reference_set, config.mapping)
        self.mapping: Optional[AttributeMapping] = None
        self.smashed: List[SmashedVector] = []
        self.model: Optional[SvmModel] = None
        self.match_seconds = 0.0

    @property
    def party_seed(self) -> int:
        return derive_seed(self.config.rng_seed, TRAINING_STREAM, 0 if self.recs.party is Party.A else 1)

    def prepare(self) -> List[SmashedVector]:
        """Smash own records and train the local model; returns the smashed vectors"""
        if not validate_disjointness(self.reference_set, self.recs):
            raise DataError(
                f"Reference set shares attribute values with party {self.recs.party.value}'s records"
            )
        if not self.recs.is_candidate_key():
            raise DataError(f"Party {self.recs.party.value}'s records are not deduplicated")
        self.mapping = self.smashing_service.mapping_for(self.recs.schema)
        self.smashed = self.smashing_service.map_recordset(self.recs, workers=self.config.workers)

        training = sample_records(self.recs, self.config.training_size, self.party_seed)
        by_id = {vector.record_id: vector for vector in self.smashed}
        spec = self.config.corruption_spec(self.party_seed)
        examples = TrainingDataBuilder(self.smashing_service, spec).build(
            [by_id[record_id] for record_id in training.record_ids], training
        )
        self.model = SmoTrainer(self.config.svm_config(), seed=self.party_seed).train(examples)
        return self.smashed

    def match(self, peer_smashed: Sequence[SmashedVector]) -> MatchArray:
        """Split-match with A's vectors as rows; only this call is timed"""
        if self.model is None:
            raise DataError("Party must be prepared before matching")
        if self.recs.party is Party.A:
            DA, DB = self.smashed, peer_smashed
        else:
            DA, DB = peer_smashed, self.smashed
        started = time.perf_counter()
        result = split_match(DA, DB, self.model, workers=self.config.workers)
        self.match_seconds = time.perf_counter() - started
        log.info(
            f"Party {self.recs.party.value} matched {len(result)} pairs in "
            f"{self.match_seconds:.2f} s: {result.match_count()} predicted matches"
        )
        return result
