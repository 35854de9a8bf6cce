"""
Smashed Data Repository - SLSD frames as files, for offline exchange
"""

from pathlib import Path
from typing import List

from models.vectors import SmashedVector
from protocol.wire import decode_smashed_batch, encode_smashed_batch
from .base_repository import BaseRepository, PathLike


class SmashedDataRepository(BaseRepository[List[SmashedVector]]):

    def save(self, vectors: List[SmashedVector], path: PathLike) -> Path:
        path = self._prepare_for_write(path)
        path.write_bytes(encode_smashed_batch(vectors))
        return path

    def load(self, path: PathLike) -> List[SmashedVector]:
        return decode_smashed_batch(self._open_for_read(path).read_bytes())
