from typing import Any, Dict, Optional

import numpy as np

from .config import Kernel, SvmConfig
from .errors import ValidationError


class SvmModel:
    """
    Trained soft-margin kernel SVM.

    ``dual_coefficients`` hold alpha_i * y_i for each support vector; ``gamma``
    is the resolved RBF width (the config may say auto).
    """

    def __init__(
        self,
        support_vectors: Any,
        dual_coefficients: Any,
        bias: float,
        config: SvmConfig,
        gamma: Optional[float] = None
    ):
        vectors = np.array(support_vectors, dtype=np.float64)
        coefficients = np.array(dual_coefficients, dtype=np.float64).reshape(-1)
        if vectors.ndim != 2:
            raise ValidationError("Support vectors must form a matrix")
        if vectors.shape[0] != coefficients.shape[0]:
            raise ValidationError(
                f"{vectors.shape[0]} support vectors but {coefficients.shape[0]} coefficients"
            )
        if coefficients.size and np.abs(coefficients).max() > config.C * (1 + 1e-9):
            raise ValidationError("Dual coefficient outside the box [-C, C]")
        if config.kernel is Kernel.RBF:
            gamma = config.gamma if gamma is None else gamma
            if gamma is None or not gamma > 0:
                raise ValidationError("RBF model needs a resolved positive gamma")
        else:
            gamma = 0.0 if gamma is None else gamma
        vectors.setflags(write=False)
        coefficients.setflags(write=False)
        self._support_vectors = vectors
        self._dual_coefficients = coefficients
        self._bias = float(bias)
        self._config = config
        self._gamma = float(gamma)
        self._weights: Optional[np.ndarray] = None

    @property
    def support_vectors(self) -> np.ndarray:
        return self._support_vectors

    @property
    def dual_coefficients(self) -> np.ndarray:
        return self._dual_coefficients

    @property
    def bias(self) -> float:
        return self._bias

    @property
    def config(self) -> SvmConfig:
        return self._config

    @property
    def kernel(self) -> Kernel:
        return self._config.kernel

    @property
    def gamma(self) -> float:
        return self._gamma

    @property
    def dimension(self) -> int:
        return int(self._support_vectors.shape[1])

    @property
    def weights(self) -> np.ndarray:
        """Primal weight vector (linear kernel only)"""
        if self._config.kernel is not Kernel.LINEAR:
            raise ValidationError("Primal weights exist only for the linear kernel")
        if self._weights is None:
            self._weights = self._dual_coefficients @ self._support_vectors
        return self._weights

    def to_dict(self) -> Dict[str, Any]:
        return {
            "support_vectors": self._support_vectors.tolist(),
            "dual_coefficients": self._dual_coefficients.tolist(),
            "bias": self._bias,
            "gamma": self._gamma,
            "dimension": self.dimension,
            "config": self._config.to_dict()
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SvmModel":
        config_data = data["config"]
        gamma = config_data.get("gamma", "auto")
        config = SvmConfig(
            kernel=Kernel(config_data["kernel"]),
            C=config_data["C"],
            gamma=None if gamma == "auto" else float(gamma),
            tolerance=config_data.get("tolerance", 1e-3),
            max_passes=config_data.get("max_passes", 10)
        )
        vectors = data["support_vectors"]
        if not vectors:
            vectors = np.zeros((0, data.get("dimension", 0)))
        return cls(vectors, data["dual_coefficients"], data["bias"], config, data.get("gamma"))

    def __str__(self) -> str:
        return f"SvmModel({self.kernel.value}, {len(self._dual_coefficients)} support vectors)"

    def __repr__(self) -> str:
        return (
            f"SvmModel(kernel='{self.kernel.value}', C={self._config.C}, "
            f"support_vectors={len(self._dual_coefficients)}, bias={self._bias})"
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SvmModel)
            and self._config.kernel == other._config.kernel
            and self._config.C == other._config.C
            and self._gamma == other._gamma
            and self._bias == other._bias
            and bool(np.array_equal(self._support_vectors, other._support_vectors))
            and bool(np.array_equal(self._dual_coefficients, other._dual_coefficients))
        )
