"""
Distance primitives: Levenshtein edit distance, cosine distance and the grouped
distance d() between smashed vectors
"""

from typing import Sequence, Tuple, Union

import numpy as np

from models.errors import DimensionMismatchError, StructureMismatchError
from models.vectors import FeatureVector, SmashedVector, stack_groups


def edit_distance(a: str, b: str) -> int:
    """Unit-cost Levenshtein distance (insert, delete, substitute)"""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, char_a in enumerate(a, start=1):
        current = [i]
        for j, char_b in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (char_a != char_b)
            ))
        previous = current
    return previous[-1]


class EncodedStrings:
    """
    A batch of strings as a padded code-point matrix, reusable across many
    ``edit_distances`` calls (e.g. one reference-set column)
    """

    PAD = -1

    def __init__(self, strings: Sequence[str]):
        self.strings: Tuple[str, ...] = tuple(strings)
        self.lengths = np.array([len(s) for s in self.strings], dtype=np.int64)
        width = int(self.lengths.max()) if len(self.strings) else 0
        self.codes = np.full((len(self.strings), width), self.PAD, dtype=np.int64)
        for row, s in enumerate(self.strings):
            if s:
                self.codes[row, :len(s)] = [ord(char) for char in s]

    def __len__(self) -> int:
        return len(self.strings)


def edit_distances(a: str, targets: Union[Sequence[str], EncodedStrings]) -> np.ndarray:
    """
    Edit distance from ``a`` to every target at once.

    Row-wise DP vectorized over targets; the insertion chain within a row is a
    running minimum: cur[j] = j + min_{k<=j}(base[k] - k).
    """
    batch = targets if isinstance(targets, EncodedStrings) else EncodedStrings(targets)
    n, width = batch.codes.shape
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.arange(width + 1, dtype=np.int64)
    previous = np.broadcast_to(offsets, (n, width + 1)).copy()
    base = np.empty((n, width + 1), dtype=np.int64)
    for i, char in enumerate(a, start=1):
        mismatch = batch.codes != ord(char)
        base[:, 0] = i
        np.minimum(previous[:, 1:] + 1, previous[:, :-1] + mismatch, out=base[:, 1:])
        previous = np.minimum.accumulate(base - offsets, axis=1) + offsets
    return previous[np.arange(n), batch.lengths]


def cosine_distance(u: Sequence[float], v: Sequence[float]) -> float:
    """
    1 - cos(u, v), in [0, 2]. Two all-zero vectors are at distance 0; exactly
    one all-zero vector gives 1.
    """
    u_arr = np.asarray(u, dtype=np.float64)
    v_arr = np.asarray(v, dtype=np.float64)
    if u_arr.shape != v_arr.shape or u_arr.ndim != 1:
        raise DimensionMismatchError(u_arr.size, v_arr.size)
    if u_arr.size == 0:
        raise DimensionMismatchError(1, 0)
    return float(paired_cosine_distances(u_arr[None, :], v_arr[None, :])[0])


def paired_cosine_distances(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Row-aligned cosine distances between two (n, L) matrices"""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return _from_dot_products(
        np.einsum("ij,ij->i", u, v),
        np.einsum("ij,ij->i", u, u),
        np.einsum("ij,ij->i", v, v)
    )


def cross_cosine_distances(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """All-pairs cosine distances between rows of (n, L) and (m, L): an (n, m) matrix"""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return _from_dot_products(
        u @ v.T,
        np.einsum("ij,ij->i", u, u)[:, None],
        np.einsum("ij,ij->i", v, v)[None, :]
    )


def _from_dot_products(dot: np.ndarray, squared_u: np.ndarray, squared_v: np.ndarray) -> np.ndarray:
    # Distances are integers, so dot products and squared norms are exact;
    # dividing by sqrt(|u|^2 |v|^2) keeps parallel vectors at exactly 0.
    zero_u = squared_u == 0
    zero_v = squared_v == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        distance = 1.0 - dot / np.sqrt(squared_u * squared_v)
    distance = np.where(zero_u | zero_v, 1.0, distance)
    distance = np.where(zero_u & zero_v, 0.0, distance)
    return np.clip(distance, 0.0, 2.0)


def _check_structure(d1: SmashedVector, d2: SmashedVector) -> None:
    if d1.group_count != d2.group_count:
        raise StructureMismatchError(
            f"Group count mismatch between {d1.record_id} ({d1.group_count}) "
            f"and {d2.record_id} ({d2.group_count})",
            group_index=min(d1.group_count, d2.group_count)
        )
    if d1.group_len != d2.group_len:
        raise StructureMismatchError(
            f"Group 0 length mismatch between {d1.record_id} ({d1.group_len}) "
            f"and {d2.record_id} ({d2.group_len})",
            group_index=0
        )


def group_distance(d1: SmashedVector, d2: SmashedVector) -> FeatureVector:
    """The d() function: per-group cosine distance between two smashed vectors"""
    _check_structure(d1, d2)
    return FeatureVector(tuple(paired_cosine_distances(d1.groups, d2.groups).tolist()))


def paired_group_distances(left: Sequence[SmashedVector], right: Sequence[SmashedVector]) -> np.ndarray:
    """d(left_i, right_i) for aligned batches: an (n, groups) matrix"""
    if len(left) != len(right):
        raise DimensionMismatchError(len(left), len(right), "batch")
    for pair_index, (d1, d2) in enumerate(zip(left, right)):
        try:
            _check_structure(d1, d2)
        except StructureMismatchError as e:
            e.pair_index = pair_index
            raise
    if not left:
        return np.zeros((0, 0))
    return np.stack([
        paired_cosine_distances(d1.groups, d2.groups) for d1, d2 in zip(left, right)
    ])


def cross_group_distances(stack_a: np.ndarray, stack_b: np.ndarray) -> np.ndarray:
    """d(a_i, b_j) for every pair of two stacked batches: an (n_a, n_b, groups) array"""
    if stack_a.shape[1:] != stack_b.shape[1:]:
        raise StructureMismatchError(
            f"Batch structures differ: {stack_a.shape[1:]} vs {stack_b.shape[1:]}",
            group_index=0 if stack_a.shape[1] == stack_b.shape[1] else min(stack_a.shape[1], stack_b.shape[1])
        )
    groups = stack_a.shape[1]
    features = np.empty((stack_a.shape[0], stack_b.shape[0], groups), dtype=np.float64)
    for g in range(groups):
        features[:, :, g] = cross_cosine_distances(stack_a[:, g, :], stack_b[:, g, :])
    return features


__all__ = [
    "edit_distance", "edit_distances", "EncodedStrings", "cosine_distance",
    "paired_cosine_distances", "cross_cosine_distances", "group_distance",
    "paired_group_distances", "cross_group_distances", "stack_groups",
]
