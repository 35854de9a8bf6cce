"""
splitlink - Repositories Package
File-backed persistence for record sets, models, smashed data and results
"""

from .base_repository import BaseRepository
from .match_array_repository import MatchArrayRepository
from .metrics_repository import MetricsReportRepository
from .model_repository import SvmModelRepository, decode_model, encode_model
from .recordset_repository import RecordSetRepository, ReferenceSetRepository
from .smashed_repository import SmashedDataRepository
from .training_repository import TrainingDataRepository

__all__ = [
    'BaseRepository',
    'MatchArrayRepository',
    'MetricsReportRepository',
    'SvmModelRepository',
    'decode_model',
    'encode_model',
    'RecordSetRepository',
    'ReferenceSetRepository',
    'SmashedDataRepository',
    'TrainingDataRepository'
]
