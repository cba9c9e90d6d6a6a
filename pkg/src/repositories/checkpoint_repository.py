"""Binary parameter checkpoints.

A checkpoint directory holds ``shape`` (key=value description of the
network) and one ``<tensor>.bin`` per array: two little-endian uint64 dims
(rows, cols) followed by rows*cols little-endian float64 values in row-major
order. Vectors are stored as a single row. Extra arrays (the sparse-coding
dictionary ``a``) use the same encoding.
"""

from __future__ import annotations

from pathlib import Path
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from ..models.network import TENSOR_NAMES, MlpParams, VaeParams
from ..services.exceptions import DataError, NotFoundError
from .base import FileRepositoryImpl, read_kv, write_kv
from .interfaces import ArtifactRepository

_HEADER = np.dtype("<u8")
_VALUES = np.dtype("<f8")


class Checkpoint(NamedTuple):
    params: MlpParams
    extras: dict[str, NDArray[np.float64]]


def encode_tensor(array: NDArray[np.float64]) -> bytes:
    matrix = np.atleast_2d(np.asarray(array, dtype=np.float64))
    if matrix.ndim != 2:
        raise DataError(f"cannot store a {matrix.ndim}-d tensor")
    dims = np.array(matrix.shape, dtype=_HEADER)
    return dims.tobytes() + np.ascontiguousarray(matrix, dtype=_VALUES).tobytes()


def decode_tensor(blob: bytes, *, name: str = "tensor") -> NDArray[np.float64]:
    header = _HEADER.itemsize * 2
    if len(blob) < header:
        raise DataError(f"{name}: truncated header")
    rows, cols = (int(v) for v in np.frombuffer(blob[:header], dtype=_HEADER))
    body = blob[header:]
    if len(body) != rows * cols * _VALUES.itemsize:
        raise DataError(f"{name}: expected {rows}x{cols} values, got {len(body)} bytes")
    values = np.frombuffer(body, dtype=_VALUES).astype(np.float64)
    return values.reshape(rows, cols)


class CheckpointRepository(FileRepositoryImpl, ArtifactRepository[Checkpoint]):
    kind = "checkpoint"

    def save(self, artifact: Checkpoint, directory: Path) -> Path:
        params = artifact.params
        directory.mkdir(parents=True, exist_ok=True)
        shape: dict[str, object] = {
            "n_items": params.n_items,
            "hidden_dim": params.hidden_dim,
            "latent_dim": params.latent_dim,
            **params.settings(),
            "extras": sorted(artifact.extras),
        }
        write_kv(directory / "shape", shape)
        for name, tensor in params.tensors().items():
            (directory / f"{name}.bin").write_bytes(encode_tensor(tensor))
        for name, tensor in artifact.extras.items():
            (directory / f"{name}.bin").write_bytes(encode_tensor(tensor))
        self._logger.info(
            "checkpoint_written", path=str(directory), model_kind=params.model_kind
        )
        return directory

    def load(self, directory: Path) -> Checkpoint:
        self._require_dir(directory, "checkpoint")
        shape = read_kv(directory / "shape")
        kind = shape.get("model_kind", "awae")
        cls = VaeParams if kind == "vae" else MlpParams
        tensors = {}
        for name in TENSOR_NAMES:
            tensor = self._read_tensor(directory, name)
            tensors[name] = tensor.reshape(-1) if "_b" in name else tensor
        settings: dict[str, object] = {
            "hidden_activation": shape.get("hidden_activation", "tanh"),
            "output_activation": shape.get("output_activation", "softmax"),
            "normalize_input": shape.get("normalize_input", "true") == "true",
            "model_kind": kind,
        }
        if cls is VaeParams:
            settings["kl_anneal_cap"] = float(shape.get("kl_anneal_cap", 0.2))
            settings["anneal_steps"] = int(shape.get("anneal_steps", 20000))
        params = cls(**tensors, **settings)  # type: ignore[arg-type]
        for key in ("n_items", "latent_dim", "hidden_dim"):
            if key in shape and int(shape[key]) != getattr(params, key):
                raise DataError(f"{directory}: shape says {key}={shape[key]}")
        names = [n for n in shape.get("extras", "").split(",") if n and n != "none"]
        extras = {name: self._read_tensor(directory, name) for name in names}
        return Checkpoint(params, extras)

    def exists(self, directory: Path) -> bool:
        return (directory / "shape").is_file()

    @staticmethod
    def _read_tensor(directory: Path, name: str) -> NDArray[np.float64]:
        path = directory / f"{name}.bin"
        if not path.is_file():
            raise NotFoundError(f"tensor {name}", str(path))
        return decode_tensor(path.read_bytes(), name=name)
