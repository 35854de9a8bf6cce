"""
Test suite for the distance primitives

"""

import unittest
from functools import lru_cache

import numpy as np
from hypothesis import given, settings, strategies as st

from models.errors import DimensionMismatchError, StructureMismatchError
from models.vectors import SmashedVector, stack_groups
from services.distance import (
    EncodedStrings, cosine_distance, cross_group_distances, edit_distance,
    edit_distances, group_distance, paired_group_distances,
)

names = st.text(alphabet="ABCDE", max_size=8)


def reference_edit_distance(a: str, b: str) -> int:
    @lru_cache(maxsize=None)
    def distance(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            distance(i - 1, j) + 1,
            distance(i, j - 1) + 1,
            distance(i - 1, j - 1) + (a[i - 1] != b[j - 1])
        )
    return distance(len(a), len(b))


class TestEditDistance(unittest.TestCase):
    """Test cases for Levenshtein distance"""

    def test_known_values(self):
        """Test distances between example names"""
        self.assertEqual(edit_distance("ADA", "CHARLIE"), 6)
        self.assertEqual(edit_distance("KING", "ADLER"), 5)
        self.assertEqual(edit_distance("IVY", "CHARLIE"), 7)
        self.assertEqual(edit_distance("ADA", "JAY"), 3)
        self.assertEqual(edit_distance("IVY", "JAY"), 2)
        self.assertEqual(edit_distance("", "ABC"), 3)
        self.assertEqual(edit_distance("ABC", ""), 3)
        self.assertEqual(edit_distance("", ""), 0)

    def test_batch_matches_scalar(self):
        """Test the vectorized batch agrees with the scalar version"""
        targets = ["CHARLIE", "JAY", "", "ADLER", "ADA"]
        expected = [edit_distance("ADA", t) for t in targets]
        self.assertEqual(edit_distances("ADA", targets).tolist(), expected)
        self.assertEqual(edit_distances("ADA", EncodedStrings(targets)).tolist(), expected)
        self.assertEqual(edit_distances("", targets).tolist(), [len(t) for t in targets])
        self.assertEqual(len(edit_distances("ADA", [])), 0)

    def test_non_ascii(self):
        """Test code points beyond ASCII"""
        self.assertEqual(edit_distance("MÜLLER", "MULLER"), 1)
        self.assertEqual(edit_distances("MÜLLER", ["MULLER", "MÜLLER"]).tolist(), [1, 0])

    @settings(max_examples=10000, deadline=None)
    @given(names, names)
    def test_against_recursive_definition(self, a, b):
        """Test agreement with the recursive definition"""
        expected = reference_edit_distance(a, b)
        self.assertEqual(edit_distance(a, b), expected)
        self.assertEqual(int(edit_distances(a, [b])[0]), expected)

    @settings(max_examples=500, deadline=None)
    @given(names, names, names)
    def test_metric_properties(self, a, b, c):
        """Test symmetry, identity, the triangle inequality and the length bounds"""
        self.assertEqual(edit_distance(a, b), edit_distance(b, a))
        self.assertEqual(edit_distance(a, a), 0)
        self.assertLessEqual(edit_distance(a, c), edit_distance(a, b) + edit_distance(b, c))
        self.assertGreaterEqual(edit_distance(a, b), abs(len(a) - len(b)))
        self.assertLessEqual(edit_distance(a, b), max(len(a), len(b)))


class TestCosineDistance(unittest.TestCase):
    """Test cases for cosine distance"""

    def test_parallel_and_orthogonal(self):
        """Test exact values for parallel and orthogonal vectors"""
        self.assertEqual(cosine_distance([5, 5], [6, 6]), 0.0)
        self.assertEqual(cosine_distance([1, 0], [0, 1]), 1.0)
        self.assertAlmostEqual(cosine_distance([1, 0], [-1, 0]), 2.0)

    def test_zero_vectors(self):
        """Test the zero-vector conventions"""
        self.assertEqual(cosine_distance([0, 0], [0, 0]), 0.0)
        self.assertEqual(cosine_distance([0, 0], [1, 2]), 1.0)
        self.assertEqual(cosine_distance([3, 4], [0, 0]), 1.0)

    def test_dimension_mismatch(self):
        """Test unequal lengths are rejected"""
        with self.assertRaises(DimensionMismatchError):
            cosine_distance([1, 2], [1, 2, 3])
        with self.assertRaises(DimensionMismatchError):
            cosine_distance([], [])

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.integers(0, 20), min_size=1, max_size=6).flatmap(
        lambda u: st.tuples(st.just(u), st.lists(st.integers(0, 20), min_size=len(u), max_size=len(u)))
    ))
    def test_range_and_symmetry(self, vectors):
        """Test non-negative integer vectors stay within [0, 1] and symmetric"""
        u, v = vectors
        distance = cosine_distance(u, v)
        self.assertGreaterEqual(distance, 0.0)
        self.assertLessEqual(distance, 1.0 + 1e-12)
        self.assertAlmostEqual(distance, cosine_distance(v, u), places=12)
        self.assertEqual(cosine_distance(u, u), 0.0)


class TestGroupDistance(unittest.TestCase):
    """Test cases for the grouped distance between smashed vectors"""

    def setUp(self):
        """Set up test fixtures"""
        self.d1 = SmashedVector("A-000001", [[6, 3], [5, 5], [7, 2], [5, 5]])
        self.d2 = SmashedVector("B-000001", [[6, 3], [6, 6], [0, 0], [1, 0]])

    def test_per_group_features(self):
        """Test one cosine distance per group"""
        features = group_distance(self.d1, self.d2)
        self.assertEqual(len(features), 4)
        self.assertEqual(features.values[0], 0.0)
        self.assertEqual(features.values[1], 0.0)
        self.assertEqual(features.values[2], 1.0)
        self.assertAlmostEqual(features.values[3], 1 - 5 / np.sqrt(50), places=12)

    def test_structure_mismatch(self):
        """Test group count and length mismatches"""
        fewer = SmashedVector("B-000002", [[1, 2]])
        with self.assertRaises(StructureMismatchError) as ctx:
            group_distance(self.d1, fewer)
        self.assertEqual(ctx.exception.group_index, 1)
        wider = SmashedVector("B-000003", [[1, 2, 3]] * 4)
        with self.assertRaises(StructureMismatchError) as ctx:
            group_distance(self.d1, wider)
        self.assertEqual(ctx.exception.group_index, 0)

    def test_paired_reports_pair_index(self):
        """Test aligned batches report the offending pair"""
        wider = SmashedVector("B-000003", [[1, 2, 3]] * 4)
        with self.assertRaises(StructureMismatchError) as ctx:
            paired_group_distances([self.d1, self.d1], [self.d2, wider])
        self.assertEqual(ctx.exception.pair_index, 1)

    def test_cross_matches_pairwise(self):
        """Test the all-pairs form agrees with the single-pair form"""
        left = [self.d1, self.d2]
        right = [self.d2, self.d1, SmashedVector("B-000004", [[1, 1]] * 4)]
        cross = cross_group_distances(stack_groups(left), stack_groups(right))
        self.assertEqual(cross.shape, (2, 3, 4))
        for i, a in enumerate(left):
            for j, b in enumerate(right):
                np.testing.assert_allclose(cross[i, j], group_distance(a, b).values, atol=1e-12)


if __name__ == "__main__":
    unittest.main()
