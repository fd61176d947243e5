"""检查点格式：b'NQE1' + <I 头长度 + JSON 头 + 按头部顺序排列的小端 float64 张量"""

import base64
import json
import os
import struct
from typing import List, Optional, Tuple

import numpy as np
import torch

from ..logic import LogicKind
from ..utils.exceptions import CheckpointError
from .config import AblationFlags, EncoderConfig
from .nqe import DTYPE, NQEModel

MAGIC = b"NQE1"
FORMAT_VERSION = 1


def save_checkpoint(
    model: NQEModel,
    path: str,
    logic: LogicKind = LogicKind.PRODUCT,
    entity_labels: Optional[List[str]] = None,
    relation_labels: Optional[List[str]] = None,
    rng_state: Optional[torch.Tensor] = None,
) -> None:
    state = model.state_dict()
    rng = rng_state if rng_state is not None else torch.get_rng_state()
    header = {
        "version": FORMAT_VERSION,
        "config": model.config.model_dump(),
        "ablation": model.ablation.model_dump(),
        "logic": LogicKind(logic).value,
        "num_entities": model.num_entities,
        "num_relations": model.num_relations,
        "tensors": [{"name": name, "shape": list(tensor.shape)} for name, tensor in state.items()],
        "rng_state": base64.b64encode(rng.numpy().tobytes()).decode('ascii'),
        "entity_labels": entity_labels,
        "relation_labels": relation_labels,
    }
    encoded = json.dumps(header, sort_keys=True, separators=(',', ':')).encode('utf-8')
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(MAGIC)
        f.write(struct.pack('<I', len(encoded)))
        f.write(encoded)
        for tensor in state.values():
            f.write(tensor.detach().cpu().to(DTYPE).numpy().astype('<f8').tobytes())


class LoadedCheckpoint:
    def __init__(self, model: NQEModel, logic: LogicKind, header: dict):
        self.model = model
        self.logic = logic
        self.header = header

    @property
    def entity_labels(self) -> Optional[List[str]]:
        return self.header.get("entity_labels")

    @property
    def relation_labels(self) -> Optional[List[str]]:
        return self.header.get("relation_labels")

    @property
    def rng_state(self) -> torch.Tensor:
        raw = base64.b64decode(self.header["rng_state"])
        return torch.from_numpy(np.frombuffer(raw, dtype=np.uint8).copy())


def _read_header(f) -> Tuple[dict, int]:
    if f.read(4) != MAGIC:
        raise CheckpointError("不是有效的检查点文件（magic 不匹配）")
    raw = f.read(4)
    if len(raw) != 4:
        raise CheckpointError("检查点头部被截断")
    (length,) = struct.unpack('<I', raw)
    try:
        header = json.loads(f.read(length).decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"检查点头部解析失败: {e}")
    if header.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"不支持的检查点版本: {header.get('version')}")
    return header, length


def load_checkpoint(path: str) -> LoadedCheckpoint:
    if not os.path.exists(path):
        raise CheckpointError(f"检查点不存在: {path}")
    with open(path, 'rb') as f:
        header, _ = _read_header(f)
        try:
            config = EncoderConfig.model_validate(header["config"])
            ablation = AblationFlags.model_validate(header["ablation"])
            model = NQEModel(header["num_entities"], header["num_relations"], config, ablation)
        except (KeyError, ValueError) as e:
            raise CheckpointError(f"检查点头部无效: {e}")

        state = {}
        for entry in header["tensors"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = f.read(8 * count)
            if len(raw) != 8 * count:
                raise CheckpointError(f"张量 {entry['name']} 数据被截断")
            state[entry["name"]] = torch.from_numpy(np.frombuffer(raw, dtype='<f8').reshape(shape).copy())
        if f.read(1):
            raise CheckpointError("检查点末尾存在多余数据")

    try:
        model.load_state_dict(state, strict=True)
    except RuntimeError as e:
        raise CheckpointError(f"检查点张量与模型不匹配: {e}")
    return LoadedCheckpoint(model, LogicKind(header["logic"]), header)
