"""
Versioned checkpoint container.

Layout::

    b"EVSQCKPT" | uint32 version | uint64 header length | JSON header | f32 blob

The header holds the schema, configs, seed, step count, training history
and an index of named arrays (``group/parameter``) with shapes and offsets.
"""

import json
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import torch
from torch import nn

from ..models.schemas import DecoderConfig, EncoderConfig, FeatureSchema, TrainConfig
from ..networks.assembly import build_model
from .errors import CheckpointError, SchemaMismatchError
from .logger import get_logger


logger = get_logger(__name__)

MAGIC = b"EVSQCKPT"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sIQ")


@dataclass
class ModelCheckpoint:
    """Named parameter groups plus everything needed to rebuild the model."""

    method: str
    schema: FeatureSchema
    encoder_config: EncoderConfig
    decoder_config: DecoderConfig
    train_config: TrainConfig
    seed: int
    state: Dict[str, Dict[str, torch.Tensor]]
    step: int = 0
    history: Dict[str, List[float]] = field(default_factory=dict)
    extra: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_modules(
        cls,
        method: str,
        modules: nn.ModuleDict,
        schema: FeatureSchema,
        encoder_config: EncoderConfig,
        decoder_config: DecoderConfig,
        train_config: TrainConfig,
        seed: int,
        step: int = 0,
        history: Optional[Dict[str, List[float]]] = None,
        extra: Optional[Dict[str, Any]] = None,
    ) -> "ModelCheckpoint":
        state = {
            group: {k: v.detach().cpu().clone() for k, v in module.state_dict().items()}
            for group, module in modules.items()
        }
        return cls(method, schema, encoder_config, decoder_config, train_config, seed, state,
                   step, dict(history or {}), dict(extra or {}))

    @property
    def head_dim(self) -> Optional[int]:
        head = self.state.get("head")
        return None if head is None else int(head["linear.weight"].shape[0])

    def build(self, dtype: torch.dtype = torch.float32) -> nn.ModuleDict:
        """Instantiate the model and load every stored group."""
        modules = build_model(self.method, self.schema, self.encoder_config, self.decoder_config, self.head_dim)
        modules.to(dtype)
        for group, module in modules.items():
            if group not in self.state:
                raise CheckpointError(f"checkpoint has no parameter group '{group}'")
            try:
                module.load_state_dict({k: v.to(dtype) for k, v in self.state[group].items()})
            except RuntimeError as e:
                raise CheckpointError(f"group '{group}' does not match the model: {e}") from e
        return modules

    def check_schema(self, schema: FeatureSchema):
        if schema.fingerprint() != self.schema.fingerprint():
            raise SchemaMismatchError(
                f"checkpoint schema {self.schema.fingerprint()} does not match dataset schema {schema.fingerprint()}"
            )

    def _header(self) -> Dict[str, Any]:
        return {
            "version": FORMAT_VERSION,
            "method": self.method,
            "schema": self.schema.model_dump(mode="json"),
            "encoder_config": self.encoder_config.model_dump(mode="json"),
            "decoder_config": self.decoder_config.model_dump(mode="json"),
            "train_config": self.train_config.model_dump(mode="json"),
            "seed": self.seed,
            "step": self.step,
            "history": self.history,
            "extra": self.extra,
        }

    def save(self, path: Union[str, Path]) -> Path:
        """Write atomically (temporary file, then rename)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        index, blobs, offset = [], [], 0
        for group, tensors in self.state.items():
            for name, tensor in tensors.items():
                data = tensor.detach().cpu().to(torch.float32).numpy().astype("<f4").tobytes()
                index.append({"name": f"{group}/{name}", "shape": list(tensor.shape), "offset": offset, "nbytes": len(data)})
                blobs.append(data)
                offset += len(data)
        header = self._header()
        header["arrays"] = index
        header_bytes = json.dumps(header).encode("utf-8")

        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)))
                f.write(header_bytes)
                for data in blobs:
                    f.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        logger.info(f"Saved {self.method} checkpoint ({offset} bytes of parameters) to {path}")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ModelCheckpoint":
        """Read and validate a checkpoint file."""
        path = Path(path)
        raw = path.read_bytes()
        if len(raw) < _PREFIX.size:
            raise CheckpointError(f"{path} is too short to be a checkpoint")
        magic, version, header_len = _PREFIX.unpack_from(raw)
        if magic != MAGIC:
            raise CheckpointError(f"{path} is not a checkpoint file")
        if version != FORMAT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        try:
            header = json.loads(raw[_PREFIX.size:_PREFIX.size + header_len].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise CheckpointError(f"corrupt checkpoint header in {path}: {e}") from e

        blob = memoryview(raw)[_PREFIX.size + header_len:]
        state: Dict[str, Dict[str, torch.Tensor]] = {}
        for entry in header["arrays"]:
            count = int(np.prod(entry["shape"])) if entry["shape"] else 1
            if entry["nbytes"] != 4 * count or entry["offset"] + entry["nbytes"] > len(blob):
                raise CheckpointError(f"array '{entry['name']}' does not match its declared shape {entry['shape']}")
            array = np.frombuffer(blob, dtype="<f4", count=count, offset=entry["offset"]).reshape(entry["shape"])
            group, name = entry["name"].split("/", 1)
            state.setdefault(group, {})[name] = torch.from_numpy(array.copy())

        return cls(
            method=header["method"],
            schema=FeatureSchema.model_validate(header["schema"]),
            encoder_config=EncoderConfig.model_validate(header["encoder_config"]),
            decoder_config=DecoderConfig.model_validate(header["decoder_config"]),
            train_config=TrainConfig.model_validate(header["train_config"]),
            seed=header["seed"],
            state=state,
            step=header["step"],
            history=header.get("history", {}),
            extra=header.get("extra", {}),
        )
