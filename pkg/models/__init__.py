from .config import CorruptionSpec, ExperimentConfig, GridConfig, IdealMatchConfig, Kernel, SvmConfig
from .errors import (
    ConfigurationError, CorruptionError, DataError, DimensionMismatchError, ModelFormatError,
    SplitLinkError, StructureMismatchError, TrainingError, ValidationError,
)
from .match_array import MatchArray, MatchEntry, MatchLabel
from .metrics import MetricsReport
from .record import Party, Record, RecordSet
from .reference_set import AttributeMapping, ReferenceSet, validate_disjointness
from .svm_model import SvmModel
from .vectors import FeatureVector, LabeledExample, SmashedVector

__all__ = [
    'CorruptionSpec', 'ExperimentConfig', 'GridConfig', 'IdealMatchConfig', 'Kernel', 'SvmConfig',
    'ConfigurationError', 'CorruptionError', 'DataError', 'DimensionMismatchError', 'ModelFormatError',
    'SplitLinkError', 'StructureMismatchError', 'TrainingError', 'ValidationError',
    'MatchArray', 'MatchEntry', 'MatchLabel',
    'MetricsReport',
    'Party', 'Record', 'RecordSet',
    'AttributeMapping', 'ReferenceSet', 'validate_disjointness',
    'SvmModel',
    'FeatureVector', 'LabeledExample', 'SmashedVector'
]
