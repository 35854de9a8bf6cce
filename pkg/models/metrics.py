from dataclasses import asdict, dataclass, field
from typing import Any, Dict


@dataclass(frozen=True)
class MetricsReport:
    """
    Precision/Recall/timing for one party (A, B) or the plain baseline.

    A zero denominator reports the metric as 1.0 and raises the matching flag,
    so report CSVs stay numeric. ``repetition`` is -1 for averaged rows.
    """
    party: str
    tp: float
    fp: float
    fn: float
    precision: float
    recall: float
    match_seconds: float
    precision_undefined: bool = False
    recall_undefined: bool = False
    repetition: int = -1
    seed: int = 0
    config: Dict[str, Any] = field(default_factory=dict)

    @property
    def is_average(self) -> bool:
        return self.repetition < 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MetricsReport":
        return cls(**data)
