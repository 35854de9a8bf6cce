"""
SVM Service - soft-margin kernel SVM trained with sequential minimal
optimization (Platt-style working-pair heuristics), linear and Gaussian RBF
kernels
"""

import logging
from collections import OrderedDict
from typing import Optional, Sequence

import numpy as np

from models.config import Kernel, SvmConfig
from models.errors import ConfigurationError, DimensionMismatchError, TrainingError
from models.match_array import MatchLabel
from models.svm_model import SvmModel
from models.vectors import FeatureVector, LabeledExample, examples_to_arrays

log = logging.getLogger(__name__)

GAMMA_VARIANCE_FLOOR = 1e-12
FULL_GRAM_LIMIT = 5000
ROW_CACHE_SIZE = 2048
ALPHA_EPS = 1e-10
DECISION_CHUNK = 1 << 22


def resolve_gamma(cfg: SvmConfig, features: np.ndarray) -> float:
    """Explicit gamma, or auto = 1 / (dim * variance of all training feature values)"""
    if cfg.gamma is not None:
        return cfg.gamma
    features = np.asarray(features, dtype=np.float64)
    dim = features.shape[1] if features.ndim == 2 and features.shape[1] else 1
    variance = float(features.var()) if features.size else 0.0
    return 1.0 / (dim * max(variance, GAMMA_VARIANCE_FLOOR))


def kernel_matrix(kernel: Kernel, gamma: float, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """K(x_i, y_j) for all rows of X and Y"""
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatchError(X.shape[1], Y.shape[1], "feature")
    products = X @ Y.T
    if kernel is Kernel.LINEAR:
        return products
    squared = (
        np.einsum("ij,ij->i", X, X)[:, None]
        + np.einsum("ij,ij->i", Y, Y)[None, :]
        - 2.0 * products
    )
    return np.exp(-gamma * np.maximum(squared, 0.0))


def kernel_eval(cfg: SvmConfig, u: FeatureVector, v: FeatureVector, gamma: Optional[float] = None) -> float:
    """K(u, v); an auto-gamma RBF config needs the resolved ``gamma``"""
    u_arr = u.as_array() if isinstance(u, FeatureVector) else np.asarray(u, dtype=np.float64)
    v_arr = v.as_array() if isinstance(v, FeatureVector) else np.asarray(v, dtype=np.float64)
    if u_arr.shape != v_arr.shape:
        raise DimensionMismatchError(u_arr.size, v_arr.size, "feature")
    if cfg.kernel is Kernel.LINEAR:
        return float(u_arr @ v_arr)
    gamma = cfg.gamma if gamma is None else gamma
    if gamma is None:
        raise ConfigurationError("RBF kernel with gamma=auto needs a resolved gamma")
    difference = u_arr - v_arr
    return float(np.exp(-gamma * (difference @ difference)))


class KernelCache:
    """Full Gram matrix for small problems, an LRU cache of rows otherwise"""

    def __init__(self, kernel: Kernel, gamma: float, X: np.ndarray):
        self.kernel = kernel
        self.gamma = gamma
        self.X = X
        self._full: Optional[np.ndarray] = None
        self._rows: "OrderedDict[int, np.ndarray]" = OrderedDict()
        if X.shape[0] <= FULL_GRAM_LIMIT:
            self._full = kernel_matrix(kernel, gamma, X, X)
        self.diagonal = (
            np.diag(self._full).copy() if self._full is not None
            else np.array([self.value(i, i) for i in range(X.shape[0])])
        )

    def row(self, i: int) -> np.ndarray:
        if self._full is not None:
            return self._full[i]
        row = self._rows.get(i)
        if row is None:
            row = kernel_matrix(self.kernel, self.gamma, self.X[i:i + 1], self.X)[0]
            self._rows[i] = row
            if len(self._rows) > ROW_CACHE_SIZE:
                self._rows.popitem(last=False)
        else:
            self._rows.move_to_end(i)
        return row

    def value(self, i: int, j: int) -> float:
        if self._full is not None:
            return float(self._full[i, j])
        cached = self._rows.get(i)
        if cached is not None:
            return float(cached[j])
        return float(kernel_matrix(self.kernel, self.gamma, self.X[i:i + 1], self.X[j:j + 1])[0, 0])


class SmoTrainer:
    """
    Sequential minimal optimization over the SVM dual.

    Keeps an error cache E_i = f(x_i) - y_i for every example. The outer loop
    alternates full sweeps with sweeps over non-bound examples; a sweep over the
    full set that changes nothing ends training. At most ``max_passes`` full
    sweeps are made. Second-choice fallbacks start at a position drawn from the
    seeded generator, so training is deterministic for a given seed.
    """

    def __init__(self, cfg: SvmConfig, seed: int = 0):
        self.cfg = cfg
        self.seed = seed

    def train(self, examples: Sequence[LabeledExample]) -> SvmModel:
        X, labels = examples_to_arrays(examples)
        return self.train_arrays(X, labels)

    def train_arrays(self, X: np.ndarray, labels: np.ndarray) -> SvmModel:
        X = np.asarray(X, dtype=np.float64)
        labels = np.asarray(labels)
        if X.ndim != 2 or X.shape[0] == 0:
            raise TrainingError("No training examples")
        if not np.all(np.isfinite(X)):
            raise TrainingError("Training features contain non-finite values")
        classes = set(np.unique(labels).tolist())
        if not classes <= {0, 1}:
            raise TrainingError(f"Labels must be 0 or 1, got {sorted(classes)}")
        if len(classes) < 2:
            raise TrainingError("Training data must contain both classes")

        self._y = np.where(labels == 1, 1.0, -1.0)
        self._n = X.shape[0]
        self._C = self.cfg.C
        self._tol = self.cfg.tolerance
        self._gamma = resolve_gamma(self.cfg, X) if self.cfg.kernel is Kernel.RBF else 0.0
        self._kernel = KernelCache(self.cfg.kernel, self._gamma, X)
        self._alpha = np.zeros(self._n)
        self._b = 0.0
        self._errors = -self._y.copy()
        self._rng = np.random.default_rng(self.seed)

        self._optimize()

        support = np.flatnonzero(self._alpha > 0)
        coefficients = self._alpha[support] * self._y[support]
        model = SvmModel(X[support], coefficients, self._b, self.cfg, self._gamma or None)
        log.info(
            f"Trained {self.cfg.kernel.value} SVM (C={self.cfg.C}) on {self._n} examples: "
            f"{len(support)} support vectors, bias {self._b:.6g}"
        )
        return model

    @property
    def multipliers(self) -> np.ndarray:
        """Lagrange multipliers alpha of the last training run, one per example"""
        return self._alpha.copy()

    def dual_objective(self) -> float:
        """Dual objective of the current multipliers"""
        return dual_objective(self._alpha, self._y, self._kernel_matrix())

    def _kernel_matrix(self) -> np.ndarray:
        return np.array([self._kernel.row(i) for i in range(self._n)])

    def _optimize(self) -> None:
        examine_all = True
        changed = 0
        full_passes = 0
        partial_passes = 0
        while changed > 0 or examine_all:
            if examine_all:
                full_passes += 1
                if full_passes > self.cfg.max_passes:
                    log.warning(
                        f"SMO stopped after {self.cfg.max_passes} full passes without converging"
                    )
                    break
                changed = sum(self._examine(i) for i in range(self._n))
            else:
                partial_passes += 1
                if partial_passes > 1000 * self.cfg.max_passes:
                    log.warning("SMO stopped: too many passes over non-bound examples")
                    break
                changed = sum(self._examine(int(i)) for i in self._non_bound())
            if examine_all:
                examine_all = False
            elif changed == 0:
                examine_all = True

    def _non_bound(self) -> np.ndarray:
        return np.flatnonzero((self._alpha > 0) & (self._alpha < self._C))

    def _examine(self, i2: int) -> int:
        y2 = self._y[i2]
        alpha2 = self._alpha[i2]
        r2 = self._errors[i2] * y2
        if not ((r2 < -self._tol and alpha2 < self._C) or (r2 > self._tol and alpha2 > 0)):
            return 0

        non_bound = self._non_bound()
        if len(non_bound) > 1:
            gaps = np.abs(self._errors[non_bound] - self._errors[i2])
            i1 = int(non_bound[int(np.argmax(gaps))])
            if self._take_step(i1, i2):
                return 1
        if len(non_bound):
            for i1 in np.roll(non_bound, -int(self._rng.integers(len(non_bound)))):
                if self._take_step(int(i1), i2):
                    return 1
        start = int(self._rng.integers(self._n))
        for offset in range(self._n):
            if self._take_step((start + offset) % self._n, i2):
                return 1
        return 0

    def _take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        C = self._C
        alpha1, alpha2 = self._alpha[i1], self._alpha[i2]
        y1, y2 = self._y[i1], self._y[i2]
        E1, E2 = self._errors[i1], self._errors[i2]
        s = y1 * y2

        if y1 != y2:
            low, high = max(0.0, alpha2 - alpha1), min(C, C + alpha2 - alpha1)
        else:
            low, high = max(0.0, alpha2 + alpha1 - C), min(C, alpha2 + alpha1)
        if high - low <= ALPHA_EPS * C:
            return False

        k11 = self._kernel.diagonal[i1]
        k22 = self._kernel.diagonal[i2]
        k12 = self._kernel.value(i1, i2)
        eta = k11 + k22 - 2.0 * k12

        if eta > 0:
            new_alpha2 = min(max(alpha2 + y2 * (E1 - E2) / eta, low), high)
        else:
            # Objective along the constraint line at both ends (minimization form)
            f1 = y1 * (E1 - self._b) - alpha1 * k11 - s * alpha2 * k12
            f2 = y2 * (E2 - self._b) - s * alpha1 * k12 - alpha2 * k22
            low1 = alpha1 + s * (alpha2 - low)
            high1 = alpha1 + s * (alpha2 - high)
            low_obj = low1 * f1 + low * f2 + 0.5 * low1 ** 2 * k11 + 0.5 * low ** 2 * k22 + s * low * low1 * k12
            high_obj = high1 * f1 + high * f2 + 0.5 * high1 ** 2 * k11 + 0.5 * high ** 2 * k22 + s * high * high1 * k12
            if low_obj < high_obj - 1e-12:
                new_alpha2 = low
            elif low_obj > high_obj + 1e-12:
                new_alpha2 = high
            else:
                new_alpha2 = alpha2

        if new_alpha2 < ALPHA_EPS * C:
            new_alpha2 = 0.0
        elif new_alpha2 > C * (1 - ALPHA_EPS):
            new_alpha2 = C
        if abs(new_alpha2 - alpha2) < ALPHA_EPS * (new_alpha2 + alpha2 + ALPHA_EPS):
            return False

        new_alpha1 = alpha1 + s * (alpha2 - new_alpha2)
        if new_alpha1 < ALPHA_EPS * C:
            new_alpha2 += s * new_alpha1
            new_alpha1 = 0.0
        elif new_alpha1 > C * (1 - ALPHA_EPS):
            new_alpha2 += s * (new_alpha1 - C)
            new_alpha1 = C
        new_alpha2 = min(max(new_alpha2, 0.0), C)

        delta1 = y1 * (new_alpha1 - alpha1)
        delta2 = y2 * (new_alpha2 - alpha2)
        b1 = self._b - E1 - delta1 * k11 - delta2 * k12
        b2 = self._b - E2 - delta1 * k12 - delta2 * k22
        if 0 < new_alpha1 < C:
            new_b = b1
        elif 0 < new_alpha2 < C:
            new_b = b2
        else:
            new_b = 0.5 * (b1 + b2)

        self._errors += delta1 * self._kernel.row(i1) + delta2 * self._kernel.row(i2) + (new_b - self._b)
        self._alpha[i1] = new_alpha1
        self._alpha[i2] = new_alpha2
        self._b = new_b
        return True


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij"""
    weighted = alpha * y
    return float(alpha.sum() - 0.5 * weighted @ K @ weighted)


def train(examples: Sequence[LabeledExample], cfg: SvmConfig, seed: int = 0) -> SvmModel:
    return SmoTrainer(cfg, seed).train(examples)


def decision_values(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """Decision values for a (n, dim) batch, chunked to bound memory"""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.dimension:
        raise DimensionMismatchError(model.dimension, X.shape[-1] if X.ndim else 0, "feature")
    if model.kernel is Kernel.LINEAR:
        return X @ model.weights + model.bias
    if len(model.dual_coefficients) == 0:
        return np.full(X.shape[0], model.bias)
    rows = max(1, DECISION_CHUNK // len(model.dual_coefficients))
    values = np.empty(X.shape[0])
    for start in range(0, X.shape[0], rows):
        block = kernel_matrix(Kernel.RBF, model.gamma, X[start:start + rows], model.support_vectors)
        values[start:start + rows] = block @ model.dual_coefficients + model.bias
    return values


def decision_value(model: SvmModel, x: FeatureVector) -> float:
    """sum_i coef_i K(sv_i, x) + bias"""
    x_arr = x.as_array() if isinstance(x, FeatureVector) else np.asarray(x, dtype=np.float64)
    if x_arr.ndim != 1 or x_arr.shape[0] != model.dimension:
        raise DimensionMismatchError(model.dimension, x_arr.size, "feature")
    return float(decision_values(model, x_arr[None, :])[0])


def predict(model: SvmModel, x: FeatureVector) -> MatchLabel:
    """Match iff the decision value is >= 0"""
    return MatchLabel.from_decision(decision_value(model, x))
