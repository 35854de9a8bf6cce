"""
SVM Model Repository - the binary SLPM model file.

Layout (big-endian): magic "SLPM", u16 version, u8 kernel tag, f64 gamma,
f64 C, f64 bias, u32 support-vector count, u32 dimension, the support vectors
row-major as f64, then one f64 dual coefficient per support vector.
"""

import struct
from pathlib import Path

import numpy as np

from models.config import Kernel, SvmConfig
from models.errors import ModelFormatError
from models.svm_model import SvmModel
from .base_repository import BaseRepository, PathLike

MODEL_MAGIC = b"SLPM"
MODEL_VERSION = 1
_HEADER = struct.Struct(">4sHBdddII")
_KERNEL_TAGS = {Kernel.LINEAR: 0, Kernel.RBF: 1}


def encode_model(model: SvmModel) -> bytes:
    rows, dimension = model.support_vectors.shape
    header = _HEADER.pack(
        MODEL_MAGIC, MODEL_VERSION, _KERNEL_TAGS[model.kernel],
        model.gamma, model.config.C, model.bias, rows, dimension
    )
    return (
        header
        + model.support_vectors.astype(">f8").tobytes()
        + model.dual_coefficients.astype(">f8").tobytes()
    )


def decode_model(data: bytes) -> SvmModel:
    if len(data) < _HEADER.size:
        raise ModelFormatError(f"Model file of {len(data)} bytes is shorter than its header")
    magic, version, tag, gamma, c, bias, rows, dimension = _HEADER.unpack_from(data)
    if magic != MODEL_MAGIC:
        raise ModelFormatError(f"Bad model magic {magic!r}, expected {MODEL_MAGIC!r}")
    if version != MODEL_VERSION:
        raise ModelFormatError(f"Unsupported model version {version}, expected {MODEL_VERSION}")
    kernels = {value: kernel for kernel, value in _KERNEL_TAGS.items()}
    if tag not in kernels:
        raise ModelFormatError(f"Unknown kernel tag {tag}")
    expected = _HEADER.size + 8 * (rows * dimension + rows)
    if expected != len(data):
        raise ModelFormatError(
            f"Model declares {rows}x{dimension} support vectors ({expected} bytes), file has {len(data)}"
        )
    vectors = np.frombuffer(data, dtype=">f8", count=rows * dimension, offset=_HEADER.size)
    coefficients = np.frombuffer(data, dtype=">f8", count=rows, offset=_HEADER.size + 8 * rows * dimension)
    kernel = kernels[tag]
    try:
        config = SvmConfig(kernel=kernel, C=c, gamma=gamma if kernel is Kernel.RBF else None)
        return SvmModel(
            vectors.astype(np.float64).reshape(rows, dimension),
            coefficients.astype(np.float64),
            bias, config, gamma
        )
    except ValueError as exc:
        raise ModelFormatError(f"Model file holds an invalid model: {exc}") from exc


class SvmModelRepository(BaseRepository[SvmModel]):

    def save(self, model: SvmModel, path: PathLike) -> Path:
        path = self._prepare_for_write(path)
        path.write_bytes(encode_model(model))
        return path

    def load(self, path: PathLike) -> SvmModel:
        return decode_model(self._open_for_read(path).read_bytes())
