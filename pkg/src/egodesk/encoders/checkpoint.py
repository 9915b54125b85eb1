"""Versioned binary checkpoint container.

Layout (little endian): magic ``EGCK``, version u32, tensor count u32,
then per tensor: name length u16, utf8 name, dtype code u8 (0 float32,
1 int64), ndim u8, dims u32 each, raw data.  The config and training-state
metadata live in a JSON sidecar at ``<path>.json``.  Save/load round-trips
bit-exactly.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict

import numpy as np
import torch

from .config import EncoderConfig

CKPT_MAGIC = b"EGCK"
CKPT_VERSION = 1

_DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.int64): 1}
_CODE_DTYPES = {0: np.float32, 1: np.int64}


@dataclass
class Checkpoint:
    tensors: Dict[str, np.ndarray]
    config: dict
    meta: dict = field(default_factory=dict)


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    path = Path(path)
    with open(path, "wb") as f:
        f.write(CKPT_MAGIC)
        f.write(struct.pack("<II", CKPT_VERSION, len(ckpt.tensors)))
        for name in sorted(ckpt.tensors):
            # np.ascontiguousarray would promote 0-d tensors to 1-d;
            # tobytes() already serializes any layout in C order.
            arr = np.asarray(ckpt.tensors[name])
            if arr.dtype not in _DTYPE_CODES:
                raise ValueError(f"unsupported tensor dtype {arr.dtype} for {name!r}")
            encoded = name.encode("utf8")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<BB", _DTYPE_CODES[arr.dtype], arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(arr.tobytes())
    sidecar = {"config": ckpt.config, "meta": ckpt.meta}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, sort_keys=True))


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    tensors: Dict[str, np.ndarray] = {}
    with open(path, "rb") as f:
        if f.read(4) != CKPT_MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        version, count = struct.unpack("<II", f.read(8))
        if version != CKPT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        for _ in range(count):
            (name_len,) = struct.unpack("<H", f.read(2))
            name = f.read(name_len).decode("utf8")
            code, ndim = struct.unpack("<BB", f.read(2))
            shape = struct.unpack(f"<{ndim}I", f.read(4 * ndim)) if ndim else ()
            dtype = np.dtype(_CODE_DTYPES[code])
            size = int(np.prod(shape, dtype=np.int64)) if shape else 1
            data = f.read(size * dtype.itemsize)
            tensors[name] = np.frombuffer(data, dtype=dtype).reshape(shape).copy()
    sidecar = json.loads(Path(str(path) + ".json").read_text())
    return Checkpoint(tensors=tensors, config=sidecar["config"], meta=sidecar["meta"])


def encoder_config_from_dict(data: dict) -> EncoderConfig:
    data = dict(data)
    data["text_vocab"] = tuple(data.get("text_vocab", ()))
    return EncoderConfig(**data)


def checkpoint_from_model(model: torch.nn.Module, config, meta: dict) -> Checkpoint:
    tensors = {}
    for name, param in model.state_dict().items():
        arr = param.detach().cpu().numpy()
        if arr.dtype != np.int64:
            arr = arr.astype(np.float32)
        tensors[name] = arr.copy()
    if dataclasses.is_dataclass(config):
        config = dataclasses.asdict(config)
    return Checkpoint(tensors=tensors, config=config, meta=dict(meta))


def load_model_state(model: torch.nn.Module, ckpt: Checkpoint, prefix: str = "") -> None:
    state = {}
    for name, tensor in model.state_dict().items():
        key = prefix + name
        if key not in ckpt.tensors:
            raise KeyError(f"checkpoint is missing tensor {key!r}")
        arr = ckpt.tensors[key]
        if tuple(arr.shape) != tuple(tensor.shape):
            raise ValueError(
                f"tensor {key!r} shape {arr.shape} does not match model {tuple(tensor.shape)}"
            )
        state[name] = torch.from_numpy(arr.copy())
    model.load_state_dict(state)
