"""
Configuration types and the flat key=value config file
"""

import configparser
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from .errors import ConfigurationError
from .reference_set import AttributeMapping

CORRUPTION_OPERATIONS = ("insert", "delete", "substitute", "transpose")
DEFAULT_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


class Kernel(Enum):
    LINEAR = "linear"
    RBF = "rbf"

    @classmethod
    def parse(cls, text: str) -> "Kernel":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ConfigurationError(f"Unknown kernel '{text}' (expected linear or rbf)") from None


def parse_gamma(text: Union[str, float, None]) -> Optional[float]:
    """``auto`` (None) or an explicit positive real"""
    if text is None:
        return None
    if isinstance(text, str):
        if text.strip().lower() == "auto":
            return None
        text = _parse_float("gamma", text)
    if not text > 0:
        raise ConfigurationError(f"gamma must be positive, got {text}")
    return float(text)


@dataclass(frozen=True)
class SvmConfig:
    """Soft-margin SVM hyperparameters; gamma None means auto"""
    kernel: Kernel = Kernel.LINEAR
    C: float = 100.0
    gamma: Optional[float] = None
    tolerance: float = 1e-3
    max_passes: int = 10

    def __post_init__(self):
        if not self.C > 0:
            raise ConfigurationError(f"C must be positive, got {self.C}")
        if self.gamma is not None and not self.gamma > 0:
            raise ConfigurationError(f"gamma must be positive, got {self.gamma}")
        if not self.tolerance > 0:
            raise ConfigurationError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_passes < 1:
            raise ConfigurationError(f"max_passes must be at least 1, got {self.max_passes}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kernel": self.kernel.value,
            "C": self.C,
            "gamma": "auto" if self.gamma is None else self.gamma,
            "tolerance": self.tolerance,
            "max_passes": self.max_passes
        }


@dataclass(frozen=True)
class CorruptionSpec:
    """How many random edit operations to apply per record, and which kinds"""
    errors_per_row: int = 1
    operations: Tuple[str, ...] = CORRUPTION_OPERATIONS
    alphabet: str = DEFAULT_ALPHABET
    rng_seed: int = 0

    def __post_init__(self):
        if self.errors_per_row < 1:
            raise ConfigurationError(f"errors_per_row must be at least 1, got {self.errors_per_row}")
        if not self.operations:
            raise ConfigurationError("At least one corruption operation is required")
        unknown = [op for op in self.operations if op not in CORRUPTION_OPERATIONS]
        if unknown:
            raise ConfigurationError(f"Unknown corruption operations {unknown}")
        if not self.alphabet:
            raise ConfigurationError("Corruption alphabet must not be empty")
        if self.rng_seed < 0:
            raise ConfigurationError(f"rng_seed must be unsigned, got {self.rng_seed}")

    def with_seed(self, rng_seed: int) -> "CorruptionSpec":
        return replace(self, rng_seed=rng_seed)


@dataclass(frozen=True)
class IdealMatchConfig:
    """Per-attribute thresholds on normalized edit similarity"""
    thresholds: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        for threshold in self.thresholds:
            if not 0.0 <= threshold <= 1.0:
                raise ConfigurationError(f"Thresholds must lie in [0, 1], got {threshold}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment cell plus the pipeline knobs shared by every command"""
    kernel: Kernel = Kernel.LINEAR
    C: float = 100.0
    rbf_gamma: Optional[float] = None
    rng_seed: int = 0
    errors_per_row: int = 1
    mapping: Optional[AttributeMapping] = None
    training_size: int = 2000
    reference_size: int = 2000
    match_size: int = 2000
    repetitions: int = 3
    workers: int = 1
    tolerance: float = 1e-3
    max_passes: int = 10
    operations: Tuple[str, ...] = CORRUPTION_OPERATIONS
    alphabet: str = DEFAULT_ALPHABET

    def __post_init__(self):
        if not self.C > 0:
            raise ConfigurationError(f"C must be positive, got {self.C}")
        if self.rbf_gamma is not None and not self.rbf_gamma > 0:
            raise ConfigurationError(f"gamma must be positive, got {self.rbf_gamma}")
        if self.rng_seed < 0:
            raise ConfigurationError(f"seed must be unsigned, got {self.rng_seed}")
        for name in ("errors_per_row", "training_size", "reference_size", "match_size",
                     "repetitions", "workers", "max_passes"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {getattr(self, name)}")

    def svm_config(self) -> SvmConfig:
        return SvmConfig(
            kernel=self.kernel,
            C=self.C,
            gamma=self.rbf_gamma,
            tolerance=self.tolerance,
            max_passes=self.max_passes
        )

    def corruption_spec(self, rng_seed: Optional[int] = None) -> CorruptionSpec:
        return CorruptionSpec(
            errors_per_row=self.errors_per_row,
            operations=self.operations,
            alphabet=self.alphabet,
            rng_seed=self.rng_seed if rng_seed is None else rng_seed
        )

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Apply non-None overrides (CLI flags win over the file)"""
        changes = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kernel": self.kernel.value,
            "c": self.C,
            "gamma": "auto" if self.rbf_gamma is None else self.rbf_gamma,
            "seed": self.rng_seed,
            "errors_per_row": self.errors_per_row,
            "mapping": "" if self.mapping is None else self.mapping.to_text(),
            "training_size": self.training_size,
            "reference_size": self.reference_size,
            "match_size": self.match_size
        }


@dataclass(frozen=True)
class GridConfig:
    """Experiment grid: every combination becomes one cell"""
    match_sizes: Tuple[int, ...] = (2000, 5000, 10000)
    reference_sizes: Tuple[int, ...] = (200, 2000)
    training_sizes: Tuple[int, ...] = (500, 2000)
    setups: Tuple[Tuple[Kernel, float], ...] = field(
        default=((Kernel.LINEAR, 100.0), (Kernel.RBF, 0.01))
    )

    def __post_init__(self):
        for name in ("match_sizes", "reference_sizes", "training_sizes", "setups"):
            if not getattr(self, name):
                raise ConfigurationError(f"{name} must not be empty")

    def cells(self, base: ExperimentConfig):
        """Yield one ExperimentConfig per grid cell"""
        for kernel, c in self.setups:
            for reference_size in self.reference_sizes:
                for training_size in self.training_sizes:
                    for match_size in self.match_sizes:
                        yield replace(
                            base,
                            kernel=kernel,
                            C=c,
                            reference_size=reference_size,
                            training_size=training_size,
                            match_size=match_size
                        )


# Config file parsing

def _parse_int(key: str, text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigurationError(f"{key} must be an integer, got '{text}'") from None


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text.strip())
    except ValueError:
        raise ConfigurationError(f"{key} must be a number, got '{text}'") from None


def _parse_int_list(key: str, text: str) -> Tuple[int, ...]:
    return tuple(_parse_int(key, item) for item in text.split(",") if item.strip())


def _parse_setups(text: str) -> Tuple[Tuple[Kernel, float], ...]:
    setups = []
    for item in text.split(","):
        if not item.strip():
            continue
        kernel, _, c = item.partition(":")
        if not c:
            raise ConfigurationError(f"Setup '{item}' is not of the form kernel:C")
        setups.append((Kernel.parse(kernel), _parse_float("setups", c)))
    return tuple(setups)


_EXPERIMENT_KEYS = {
    "kernel": ("kernel", Kernel.parse),
    "c": ("C", lambda text: _parse_float("c", text)),
    "gamma": ("rbf_gamma", parse_gamma),
    "seed": ("rng_seed", lambda text: _parse_int("seed", text)),
    "errors_per_row": ("errors_per_row", lambda text: _parse_int("errors_per_row", text)),
    "mapping": ("mapping", lambda text: AttributeMapping.parse(text) if text.strip() else None),
    "training_size": ("training_size", lambda text: _parse_int("training_size", text)),
    "reference_size": ("reference_size", lambda text: _parse_int("reference_size", text)),
    "match_size": ("match_size", lambda text: _parse_int("match_size", text)),
    "repetitions": ("repetitions", lambda text: _parse_int("repetitions", text)),
    "workers": ("workers", lambda text: _parse_int("workers", text)),
    "tolerance": ("tolerance", lambda text: _parse_float("tolerance", text)),
    "max_passes": ("max_passes", lambda text: _parse_int("max_passes", text)),
    "operations": ("operations", lambda text: tuple(op.strip() for op in text.split(",") if op.strip())),
    "alphabet": ("alphabet", lambda text: text.strip().upper()),
}

_GRID_KEYS = {
    "match_sizes": ("match_sizes", lambda text: _parse_int_list("match_sizes", text)),
    "reference_sizes": ("reference_sizes", lambda text: _parse_int_list("reference_sizes", text)),
    "training_sizes": ("training_sizes", lambda text: _parse_int_list("training_sizes", text)),
    "setups": ("setups", _parse_setups),
}

_SECTION = "experiment"


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Read a flat key=value file into a dict of raw strings"""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file {path}: {e}") from e
    try:
        parser.read_string(f"[{_SECTION}]\n{text}", source=str(path))
    except configparser.Error as e:
        raise ConfigurationError(f"Malformed config file {path}: {e}") from e
    raw = dict(parser.items(_SECTION))
    unknown = sorted(set(raw) - set(_EXPERIMENT_KEYS) - set(_GRID_KEYS))
    if unknown:
        raise ConfigurationError(f"Unknown config keys: {', '.join(unknown)}")
    return raw


def _build(cls, keys, raw: Dict[str, str], base=None):
    changes = {}
    for key, text in raw.items():
        if key in keys:
            attribute, parse = keys[key]
            changes[attribute] = parse(text)
    return replace(base if base is not None else cls(), **changes)


def experiment_config_from_mapping(raw: Dict[str, str], base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    return _build(ExperimentConfig, _EXPERIMENT_KEYS, raw, base)


def grid_config_from_mapping(raw: Dict[str, str], base: Optional[GridConfig] = None) -> GridConfig:
    return _build(GridConfig, _GRID_KEYS, raw, base)


def load_config(path: Union[str, Path]) -> Tuple[ExperimentConfig, GridConfig]:
    """Load the experiment and grid settings from one key=value file"""
    raw = read_config_file(path)
    return experiment_config_from_mapping(raw), grid_config_from_mapping(raw)


def config_keys() -> Tuple[str, ...]:
    return tuple(sorted(set(_EXPERIMENT_KEYS) | set(_GRID_KEYS)))


__all__ = [
    "Kernel", "SvmConfig", "CorruptionSpec", "IdealMatchConfig", "ExperimentConfig",
    "GridConfig", "load_config", "read_config_file", "experiment_config_from_mapping",
    "grid_config_from_mapping", "parse_gamma", "config_keys", "CORRUPTION_OPERATIONS",
    "DEFAULT_ALPHABET",
]
