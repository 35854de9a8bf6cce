"""
Test suite for reference-set smashing

"""

import unittest

from models.errors import ConfigurationError
from models.reference_set import AttributeMapping
from services.distance import edit_distance
from services.smashing_service import SmashingService, map_record_to_refset, map_recordset_to_refset
from tests.support import (
    VOTER_SCHEMA, VOTERS, actor_reference_set, example_record, example_reference_set, make_recordset,
)


class TestSmashingService(unittest.TestCase):
    """Test cases for SmashingService"""

    def setUp(self):
        """Set up test fixtures"""
        self.rs = example_reference_set()
        self.mapping = AttributeMapping.default(VOTER_SCHEMA, self.rs.schema)

    def test_example_record(self):
        """Test the grouped distances of a single record"""
        vector = map_record_to_refset(example_record(), self.rs, self.mapping)
        self.assertEqual(vector.record_id, "A-000001")
        self.assertEqual(vector.to_lists(), [[6, 3], [5, 5], [7, 2], [5, 5]])

    def test_default_mapping_used_without_configuration(self):
        """Test the service falls back to the default mapping"""
        service = SmashingService(self.rs)
        self.assertEqual(service.mapping_for(VOTER_SCHEMA), self.mapping)
        self.assertEqual(service.map_record(example_record()).shape, (4, 2))

    def test_explicit_mapping_controls_groups(self):
        """Test group order follows the mapping pair order"""
        mapping = AttributeMapping.parse("last_name:last_name,middle_name:first_name,first_name:first_name")
        vector = map_record_to_refset(example_record(), self.rs, mapping)
        self.assertEqual(vector.to_lists(), [[5, 5], [7, 2], [6, 3]])

    def test_unknown_attribute_rejected(self):
        """Test a mapping naming an unknown attribute"""
        mapping = AttributeMapping.parse("first_name:nickname,middle_name:first_name,last_name:last_name")
        with self.assertRaises(ConfigurationError):
            SmashingService(self.rs, mapping).map_recordset(make_recordset(VOTERS[:1]))

    def test_recordset_order_and_shape(self):
        """Test one vector per record, in record order"""
        recs = make_recordset(VOTERS)
        rs = actor_reference_set()
        vectors = map_recordset_to_refset(recs, rs)
        self.assertEqual([v.record_id for v in vectors], recs.record_ids)
        for vector, record in zip(vectors, recs):
            self.assertEqual(vector.shape, (4, len(rs)))
            self.assertEqual(
                vector.groups[0].tolist(),
                [edit_distance(record.value("first_name"), row[0]) for row in rs.rows]
            )

    def test_workers_do_not_change_output(self):
        """Test threaded smashing gives the same vectors"""
        recs = make_recordset(VOTERS)
        rs = actor_reference_set()
        self.assertEqual(map_recordset_to_refset(recs, rs, workers=3), map_recordset_to_refset(recs, rs))


if __name__ == "__main__":
    unittest.main()
