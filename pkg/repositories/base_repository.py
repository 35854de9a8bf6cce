"""
Base Repository - Abstract base class for all file-backed repositories
"""

import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Generic, TypeVar, Union

from models.errors import DataError

T = TypeVar('T')
PathLike = Union[str, Path]

log = logging.getLogger(__name__)


class BaseRepository(ABC, Generic[T]):
    """
    Abstract base repository defining how entities are persisted to and
    restored from files
    """

    @abstractmethod
    def load(self, path: PathLike) -> T:
        """Load an entity from ``path``"""
        pass

    @abstractmethod
    def save(self, entity: T, path: PathLike) -> Path:
        """Persist an entity to ``path`` and return the path written"""
        pass

    def exists(self, path: PathLike) -> bool:
        """Check whether a persisted entity exists at ``path``"""
        return Path(path).is_file()

    def _open_for_read(self, path: PathLike) -> Path:
        path = Path(path)
        if not path.is_file():
            raise DataError(f"{self.__class__.__name__}: file not found: {path}")
        return path

    def _prepare_for_write(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        log.info(f"{self.__class__.__name__}: writing {path}")
        return path
