"""
Fixture Service - seeded synthetic name data: voter-like records for the
dataholders and an actor-name-like reference set drawn from other locales
"""

import logging
from typing import List, Optional, Set, Tuple

from faker import Faker

from models.errors import DataError
from models.record import Party, Record, RecordSet, mint_record_id, normalize_value
from models.reference_set import ReferenceSet
from services.datagen_service import derive_seed

log = logging.getLogger(__name__)

RECORD_SCHEMA = ("first_name", "middle_name", "last_name")
REFERENCE_SCHEMA = ("first_name", "last_name")
RECORD_LOCALE = "en_US"
REFERENCE_LOCALES = ("it_IT", "de_DE", "fr_FR", "es_ES", "nl_NL", "pl_PL")
MAX_DRAWS_PER_ROW = 100


class FixtureGenerator:
    """Deterministic for a given seed; every value is upper-case alphabetic"""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._records_faker = Faker(RECORD_LOCALE)
        self._records_faker.seed_instance(derive_seed(seed, 0))
        self._reference_fakers = []
        for index, locale in enumerate(REFERENCE_LOCALES, start=1):
            faker = Faker(locale)
            faker.seed_instance(derive_seed(seed, index))
            self._reference_fakers.append(faker)

    @staticmethod
    def _name(draw) -> Optional[str]:
        value = normalize_value(draw())
        return value if value.isalpha() else None

    def records(self, n_records: int, party: Party = Party.A) -> RecordSet:
        """``n_records`` distinct (first, middle, last) tuples"""
        faker = self._records_faker
        seen: Set[Tuple[str, str, str]] = set()
        records: List[Record] = []
        for _ in range(n_records * MAX_DRAWS_PER_ROW):
            if len(records) == n_records:
                break
            values = (self._name(faker.first_name), self._name(faker.first_name), self._name(faker.last_name))
            if None in values or values in seen:
                continue
            seen.add(values)
            row = len(records) + 1
            records.append(Record(mint_record_id(party, row), zip(RECORD_SCHEMA, values), source_id=str(row)))
        if len(records) < n_records:
            raise DataError(f"Could only generate {len(records)} of {n_records} distinct records")
        log.info(f"Generated {len(records)} synthetic records")
        return RecordSet(party, RECORD_SCHEMA, records)

    def reference_set(self, n_reference: int, exclude: Set[str] = frozenset()) -> ReferenceSet:
        """``n_reference`` distinct (first, last) rows sharing no value with ``exclude``"""
        seen: Set[Tuple[str, str]] = set()
        rows: List[Tuple[str, str]] = []
        for draw in range(n_reference * MAX_DRAWS_PER_ROW):
            if len(rows) == n_reference:
                break
            faker = self._reference_fakers[draw % len(self._reference_fakers)]
            row = (self._name(faker.first_name), self._name(faker.last_name))
            if None in row or row in seen or row[0] in exclude or row[1] in exclude:
                continue
            seen.add(row)
            rows.append(row)
        if len(rows) < n_reference:
            raise DataError(f"Could only generate {len(rows)} of {n_reference} reference rows")
        log.info(f"Generated a reference set of {len(rows)} rows")
        return ReferenceSet(REFERENCE_SCHEMA, rows)


def generate_fixtures(n_records: int, n_reference: int, seed: int = 0) -> Tuple[RecordSet, ReferenceSet]:
    """A voter-like record set and a reference set disjoint from it"""
    generator = FixtureGenerator(seed)
    recs = generator.records(n_records)
    return recs, generator.reference_set(n_reference, recs.attribute_values())
