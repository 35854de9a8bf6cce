"""
Test suite for domain models

"""

import os
import tempfile
import unittest

import numpy as np

from models.config import (
    ExperimentConfig, GridConfig, Kernel, SvmConfig, CorruptionSpec,
    load_config, parse_gamma,
)
from models.errors import (
    ConfigurationError, StructureMismatchError, ValidationError,
)
from models.match_array import MatchArray, MatchEntry, MatchLabel
from models.metrics import MetricsReport
from models.record import Party, Record, RecordSet, mint_record_id
from models.reference_set import AttributeMapping, ReferenceSet, validate_disjointness
from models.svm_model import SvmModel
from models.vectors import FeatureVector, LabeledExample, SmashedVector, examples_to_arrays, stack_groups
from tests.support import ACTOR_SCHEMA, VOTER_SCHEMA, VOTERS, example_reference_set, make_recordset


class TestRecordModel(unittest.TestCase):
    """Test cases for Record and RecordSet"""

    def setUp(self):
        """Set up test fixtures"""
        self.recs = make_recordset(VOTERS[:3])

    def test_values_are_case_folded(self):
        """Test attribute values are trimmed and upper-cased"""
        record = Record("A-000001", [("first_name", "  ada ")])
        self.assertEqual(record.values, ("ADA",))
        self.assertEqual(record.value("first_name"), "ADA")

    def test_record_validation(self):
        """Test record ID rules"""
        with self.assertRaises(ValidationError):
            Record("", [("first_name", "ADA")])

    def test_recordset_rejects_duplicate_ids(self):
        """Test duplicate record IDs are rejected"""
        record = self.recs[0]
        with self.assertRaises(ValidationError):
            RecordSet(Party.A, VOTER_SCHEMA, [record, record])

    def test_recordset_rejects_schema_mismatch(self):
        """Test records must follow the set's schema"""
        record = Record("A-000001", [("first_name", "ADA")])
        with self.assertRaises(ValidationError):
            RecordSet(Party.A, VOTER_SCHEMA, [record])

    def test_assign_party_remints_ids(self):
        """Test re-minting IDs keeps source IDs and applies the order"""
        bob = self.recs.assign_party(Party.B, [2, 0, 1])
        self.assertEqual(bob.record_ids, ["B-000001", "B-000002", "B-000003"])
        self.assertEqual([r.source_id for r in bob], ["3", "1", "2"])
        self.assertEqual(bob.party, Party.B)

    def test_candidate_key(self):
        """Test candidate-key detection"""
        self.assertTrue(self.recs.is_candidate_key())
        twin = Record("A-000009", zip(VOTER_SCHEMA, VOTERS[0]))
        self.assertFalse(self.recs.with_records(list(self.recs) + [twin]).is_candidate_key())

    def test_mint_record_id(self):
        """Test the record ID format"""
        self.assertEqual(mint_record_id(Party.B, 42), "B-000042")
        self.assertIs(Party.A.peer, Party.B)

    def test_dict_round_trip(self):
        """Test serialization of a record set"""
        self.assertEqual(RecordSet.from_dict(self.recs.to_dict()), self.recs)


class TestReferenceSetModel(unittest.TestCase):
    """Test cases for ReferenceSet and AttributeMapping"""

    def setUp(self):
        """Set up test fixtures"""
        self.rs = example_reference_set()

    def test_column_access(self):
        """Test reading one reference column"""
        self.assertEqual(self.rs.column("first_name"), ["CHARLIE", "JAY"])
        with self.assertRaises(ConfigurationError):
            self.rs.column("middle_name")

    def test_ragged_rows_rejected(self):
        """Test every row must match the schema width"""
        with self.assertRaises(ValidationError):
            ReferenceSet(ACTOR_SCHEMA, [("CHARLIE",)])

    def test_without_values(self):
        """Test filtering rows that share values"""
        filtered = self.rs.without_values({"JAY"})
        self.assertEqual(filtered.rows, (("CHARLIE", "ADLER"),))

    def test_digest_depends_on_order(self):
        """Test the canonical digest is order sensitive"""
        swapped = ReferenceSet(ACTOR_SCHEMA, reversed(self.rs.rows))
        self.assertNotEqual(self.rs.digest(), swapped.digest())
        self.assertEqual(self.rs.digest(), ReferenceSet(ACTOR_SCHEMA, self.rs.rows).digest())

    def test_disjointness(self):
        """Test disjointness validation"""
        recs = make_recordset(VOTERS[:2])
        self.assertTrue(validate_disjointness(self.rs, recs))
        clash = make_recordset([("JAY", "IVY", "KING")])
        self.assertFalse(validate_disjointness(self.rs, clash))

    def test_default_mapping(self):
        """Test the default mapping puts 1:1 pairs first"""
        mapping = AttributeMapping.default(VOTER_SCHEMA, ACTOR_SCHEMA)
        self.assertEqual(mapping.pairs, (
            ("first_name", "first_name"),
            ("last_name", "last_name"),
            ("middle_name", "first_name"),
            ("middle_name", "last_name"),
        ))
        self.assertEqual(mapping.dimensionality(2), 8)

    def test_mapping_parse(self):
        """Test parsing rec:ref text"""
        mapping = AttributeMapping.parse("first_name:first_name, last_name:last_name")
        self.assertEqual(mapping.to_text(), "first_name:first_name,last_name:last_name")
        with self.assertRaises(ConfigurationError):
            AttributeMapping.parse("first_name")
        with self.assertRaises(ConfigurationError):
            AttributeMapping.parse("a:b,a:b")

    def test_mapping_validate(self):
        """Test mapping validation against both schemas"""
        mapping = AttributeMapping.parse("first_name:first_name,last_name:last_name")
        with self.assertRaises(ConfigurationError):
            mapping.validate(VOTER_SCHEMA, ACTOR_SCHEMA)
        with self.assertRaises(ConfigurationError):
            AttributeMapping.parse("first_name:nick").validate(("first_name",), ACTOR_SCHEMA)
        mapping.validate(("first_name", "last_name"), ACTOR_SCHEMA)


class TestVectorModels(unittest.TestCase):
    """Test cases for smashed and feature vectors"""

    def test_smashed_vector_shape(self):
        """Test group shape and read-only storage"""
        vector = SmashedVector("A-000001", [[6, 3], [5, 5]])
        self.assertEqual(vector.shape, (2, 2))
        with self.assertRaises(ValueError):
            vector.groups[0, 0] = 1

    def test_smashed_vector_validation(self):
        """Test negative or ragged distances are rejected"""
        with self.assertRaises(ValidationError):
            SmashedVector("A-000001", [[1, -1]])
        with self.assertRaises(ValidationError):
            SmashedVector("A-000001", [1, 2])

    def test_stack_groups_mismatch(self):
        """Test stacking reports the offending position"""
        vectors = [SmashedVector("A-1", [[1, 2]]), SmashedVector("A-2", [[1, 2, 3]])]
        with self.assertRaises(StructureMismatchError) as ctx:
            stack_groups(vectors)
        self.assertEqual(ctx.exception.pair_index, 1)

    def test_labeled_example(self):
        """Test labels are restricted to 0 and 1"""
        with self.assertRaises(ValidationError):
            LabeledExample(FeatureVector((0.1,)), 2)
        features, labels = examples_to_arrays([
            LabeledExample(FeatureVector((0.0, 0.5)), 1),
            LabeledExample(FeatureVector((1.0, 0.5)), 0),
        ])
        self.assertEqual(features.shape, (2, 2))
        self.assertEqual(labels.tolist(), [1, 0])


class TestMatchArrayModel(unittest.TestCase):
    """Test cases for MatchArray"""

    def setUp(self):
        """Set up test fixtures"""
        self.array = MatchArray(["A-2", "A-1"], ["B-2", "B-1"], [[0.0, -1.0], [-2.0, 3.0]])

    def test_canonical_order(self):
        """Test rows and columns are sorted"""
        self.assertEqual(self.array.ids_a, ("A-1", "A-2"))
        self.assertEqual(self.array.ids_b, ("B-1", "B-2"))
        self.assertEqual(self.array.decision_value("A-1", "B-1"), 3.0)
        self.assertEqual(self.array.decision_value("A-2", "B-2"), 0.0)

    def test_zero_decision_is_match(self):
        """Test a decision value of exactly zero predicts a match"""
        self.assertIs(MatchLabel.from_decision(0.0), MatchLabel.MATCH)
        self.assertEqual(self.array.matched_pairs(), [("A-1", "B-1"), ("A-2", "B-2")])
        self.assertEqual(self.array.match_count(), 2)

    def test_from_entries(self):
        """Test rebuilding from entries"""
        self.assertEqual(MatchArray.from_entries(self.array.entries()), self.array)
        with self.assertRaises(ValidationError):
            MatchArray.from_entries(list(self.array.entries())[:3])
        bad = MatchEntry("A-1", "B-1", -1.0, MatchLabel.MATCH)
        with self.assertRaises(ValidationError):
            MatchArray.from_entries([bad])

    def test_duplicate_ids_rejected(self):
        """Test IDs must be unique per side"""
        with self.assertRaises(ValidationError):
            MatchArray(["A-1", "A-1"], ["B-1"], [[1.0], [1.0]])


class TestConfigModels(unittest.TestCase):
    """Test cases for configuration types"""

    def test_defaults(self):
        """Test experiment defaults"""
        cfg = ExperimentConfig()
        self.assertEqual(cfg.kernel, Kernel.LINEAR)
        self.assertEqual(cfg.C, 100.0)
        self.assertIsNone(cfg.rbf_gamma)
        self.assertEqual(cfg.training_size, 2000)
        self.assertEqual(cfg.svm_config().C, 100.0)

    def test_validation(self):
        """Test invalid values are configuration errors"""
        with self.assertRaises(ConfigurationError):
            ExperimentConfig(C=0)
        with self.assertRaises(ConfigurationError):
            ExperimentConfig(training_size=0)
        with self.assertRaises(ConfigurationError):
            SvmConfig(gamma=-1.0)
        with self.assertRaises(ConfigurationError):
            CorruptionSpec(operations=("swap",))
        with self.assertRaises(ConfigurationError):
            Kernel.parse("poly")

    def test_parse_gamma(self):
        """Test gamma parsing"""
        self.assertIsNone(parse_gamma("auto"))
        self.assertEqual(parse_gamma("0.5"), 0.5)
        with self.assertRaises(ConfigurationError):
            parse_gamma("0")

    def test_grid_cells(self):
        """Test one cell per grid combination"""
        grid = GridConfig(match_sizes=(10,), reference_sizes=(5, 6), training_sizes=(4,),
                          setups=((Kernel.LINEAR, 1.0), (Kernel.RBF, 0.5)))
        cells = list(grid.cells(ExperimentConfig()))
        self.assertEqual(len(cells), 4)
        self.assertEqual({(c.kernel, c.reference_size) for c in cells}, {
            (Kernel.LINEAR, 5), (Kernel.LINEAR, 6), (Kernel.RBF, 5), (Kernel.RBF, 6)
        })

    def test_load_config_file(self):
        """Test reading a key=value config file"""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "run.conf")
            with open(path, "w", encoding="utf-8") as handle:
                handle.write("# comment\nkernel = rbf\nc = 0.01\nseed = 7\nreference_sizes = 20,40\n")
            cfg, grid = load_config(path)
            self.assertEqual(cfg.kernel, Kernel.RBF)
            self.assertEqual(cfg.C, 0.01)
            self.assertEqual(cfg.rng_seed, 7)
            self.assertEqual(grid.reference_sizes, (20, 40))

            with open(path, "w", encoding="utf-8") as handle:
                handle.write("colour = blue\n")
            with self.assertRaises(ConfigurationError):
                load_config(path)


class TestSvmModel(unittest.TestCase):
    """Test cases for SvmModel"""

    def test_linear_weights(self):
        """Test primal weights of a linear model"""
        model = SvmModel([[1.0, 0.0], [0.0, 1.0]], [1.0, -1.0], 0.5, SvmConfig(C=1.0))
        np.testing.assert_array_equal(model.weights, [1.0, -1.0])
        self.assertEqual(SvmModel.from_dict(model.to_dict()), model)

    def test_validation(self):
        """Test model invariants"""
        with self.assertRaises(ValidationError):
            SvmModel([[1.0]], [1.0, 2.0], 0.0, SvmConfig(C=5.0))
        with self.assertRaises(ValidationError):
            SvmModel([[1.0]], [2.0], 0.0, SvmConfig(C=1.0))
        with self.assertRaises(ValidationError):
            SvmModel([[1.0]], [1.0], 0.0, SvmConfig(kernel=Kernel.RBF, C=1.0))
        rbf = SvmModel([[1.0]], [1.0], 0.0, SvmConfig(kernel=Kernel.RBF, C=1.0), gamma=0.5)
        with self.assertRaises(ValidationError):
            rbf.weights


class TestMetricsReport(unittest.TestCase):
    """Test cases for MetricsReport"""

    def test_average_flag(self):
        """Test averaged rows carry repetition -1"""
        report = MetricsReport("A", 1, 0, 0, 1.0, 1.0, 0.1)
        self.assertTrue(report.is_average)
        self.assertEqual(MetricsReport.from_dict(report.to_dict()), report)


if __name__ == "__main__":
    unittest.main()
