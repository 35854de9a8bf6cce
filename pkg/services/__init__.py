"""
splitlink - Services Package

"""

from .datagen_service import TrainingDataBuilder, build_training_data, corrupt_recordset, deduplicate
from .evaluation_service import ExperimentRunner, emit_figure_data, run_experiment, run_grid, score
from .fixture_service import FixtureGenerator, generate_fixtures
from .linkage_service import SplitParty, ideal_match, plain_match, split_match
from .smashing_service import SmashingService, map_record_to_refset, map_recordset_to_refset
from .svm_service import SmoTrainer, decision_value, predict, train

__all__ = [
    'TrainingDataBuilder', 'build_training_data', 'corrupt_recordset', 'deduplicate',
    'ExperimentRunner', 'emit_figure_data', 'run_experiment', 'run_grid', 'score',
    'FixtureGenerator', 'generate_fixtures',
    'SplitParty', 'ideal_match', 'plain_match', 'split_match',
    'SmashingService', 'map_record_to_refset', 'map_recordset_to_refset',
    'SmoTrainer', 'decision_value', 'predict', 'train'
]
