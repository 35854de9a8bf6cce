"""
Leakage audit - search serialized payloads for plaintext quasi-identifiers
"""

from typing import Iterable, List, Set

from models.record import RecordSet


def find_leaked_substrings(payload: bytes, recs: RecordSet, min_len: int = 3) -> List[str]:
    """
    Every substring of ``min_len`` characters of any attribute value in
    ``recs`` whose UTF-8 bytes occur in ``payload``. Any longer leaked
    substring contains one of these, so an empty result means none leaked.
    """
    if min_len < 1:
        raise ValueError(f"min_len must be positive, got {min_len}")
    windows: Set[str] = set()
    for value in recs.attribute_values():
        windows.update(value[i:i + min_len] for i in range(len(value) - min_len + 1))
    return sorted(window for window in windows if window.encode("utf-8") in payload)


def audit_payloads(payloads: Iterable[bytes], recs: RecordSet, min_len: int = 3) -> List[str]:
    """Leaked substrings across several payloads"""
    leaked: Set[str] = set()
    for payload in payloads:
        leaked.update(find_leaked_substrings(payload, recs, min_len))
    return sorted(leaked)
