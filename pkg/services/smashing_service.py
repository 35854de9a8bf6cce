"""
Smashing Service - maps records onto the common reference set
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.errors import ConfigurationError
from models.record import Record, RecordSet
from models.reference_set import AttributeMapping, ReferenceSet
from models.vectors import SmashedVector
from services.distance import EncodedStrings, edit_distances

log = logging.getLogger(__name__)


class SmashingService:
    """
    Produces the smashed distance vectors D for one reference set and mapping.

    Groups follow the mapping pair order; within a group, reference row order.
    Distance rows are memoized per (reference attribute, value) since
    quasi-identifier values repeat heavily.
    """

    def __init__(self, reference_set: ReferenceSet, mapping: Optional[AttributeMapping] = None):
        self.reference_set = reference_set
        self._mapping = mapping
        self._columns: Dict[str, EncodedStrings] = {}
        self._rows: Dict[Tuple[str, str], np.ndarray] = {}

    def mapping_for(self, record_schema: Sequence[str]) -> AttributeMapping:
        """The configured mapping, or the default one for this schema"""
        mapping = self._mapping or AttributeMapping.default(record_schema, self.reference_set.schema)
        mapping.validate(record_schema, self.reference_set.schema)
        return mapping

    def map_record(self, record: Record, mapping: Optional[AttributeMapping] = None) -> SmashedVector:
        mapping = mapping or self.mapping_for(record.names)
        groups = []
        for record_attr, reference_attr in mapping.pairs:
            try:
                value = record.value(record_attr)
            except KeyError:
                raise ConfigurationError(
                    f"Unknown record attribute '{record_attr}' in mapping"
                ) from None
            groups.append(self._distance_row(reference_attr, value))
        if not groups:
            return SmashedVector(record.record_id, np.zeros((0, len(self.reference_set)), dtype=np.int64))
        return SmashedVector(record.record_id, np.stack(groups))

    def map_recordset(self, recs: RecordSet, workers: int = 1) -> List[SmashedVector]:
        """One smashed vector per record, in record order"""
        mapping = self.mapping_for(recs.schema)
        log.info(
            f"Smashing {len(recs)} records of party {recs.party.value} against "
            f"{len(self.reference_set)} reference rows ({len(mapping)} groups)"
        )
        records = list(recs)
        if workers <= 1 or len(records) < 2 * workers:
            return [self.map_record(record, mapping) for record in records]
        chunk = (len(records) + workers - 1) // workers
        chunks = [records[start:start + chunk] for start in range(0, len(records), chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            mapped = pool.map(lambda part: [self.map_record(record, mapping) for record in part], chunks)
            return [vector for part in mapped for vector in part]

    def _distance_row(self, reference_attr: str, value: str) -> np.ndarray:
        key = (reference_attr, value)
        row = self._rows.get(key)
        if row is None:
            column = self._columns.get(reference_attr)
            if column is None:
                column = self._columns.setdefault(
                    reference_attr, EncodedStrings(self.reference_set.column(reference_attr))
                )
            row = self._rows.setdefault(key, edit_distances(value, column))
        return row


def map_record_to_refset(r: Record, rs: ReferenceSet, m: AttributeMapping) -> SmashedVector:
    return SmashingService(rs, m).map_record(r)


def map_recordset_to_refset(
    recs: RecordSet,
    rs: ReferenceSet,
    m: Optional[AttributeMapping] = None,
    workers: int = 1
) -> List[SmashedVector]:
    return SmashingService(rs, m).map_recordset(recs, workers=workers)
