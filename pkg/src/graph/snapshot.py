"""HyperGraph 二进制快照（魔数 NQG1）

布局：魔数 | uint32 版本 | uint64 头部长度 | JSON头部 | 每个划分依次为
int64 元数数组与 int64 扁平交替序列（小端）。
"""

import json
import struct

import numpy as np

from ..utils.exceptions import CheckpointError
from .facts import fact_from_sequence, sequence_of
from .store import ALL_SPLITS, HyperGraph

MAGIC = b"NQG1"
VERSION = 1


def save_graph(graph: HyperGraph, path: str):
    """写出图快照"""
    arrays = []
    splits = {}
    for split in ALL_SPLITS:
        facts = graph.facts(split)
        arities = np.array([fact.arity for fact in facts], dtype='<i8')
        flat = np.array(
            [item for fact in facts for item in sequence_of(fact)], dtype='<i8'
        )
        splits[split.value] = {"facts": int(arities.size), "values": int(flat.size)}
        arrays.extend((arities, flat))

    header = json.dumps({
        "version": VERSION,
        "entities": graph.entities.labels,
        "relations": graph.relations.labels,
        "splits": splits,
        "duplicates": graph.duplicates,
    }, ensure_ascii=False).encode('utf-8')

    with open(path, 'wb') as f:
        f.write(MAGIC)
        f.write(struct.pack('<IQ', VERSION, len(header)))
        f.write(header)
        for array in arrays:
            f.write(array.tobytes())


def load_graph(path: str) -> HyperGraph:
    """读取图快照"""
    try:
        with open(path, 'rb') as f:
            data = f.read()
    except OSError as e:
        raise CheckpointError(f"无法读取图快照 {path}: {e}")
    if data[:4] != MAGIC:
        raise CheckpointError(f"{path} 不是 NQG1 图快照")
    version, header_len = struct.unpack_from('<IQ', data, 4)
    if version != VERSION:
        raise CheckpointError(f"不支持的快照版本: {version}")
    offset = 4 + struct.calcsize('<IQ')
    header = json.loads(data[offset:offset + header_len].decode('utf-8'))
    offset += header_len

    graph = HyperGraph()
    for label in header["entities"]:
        graph.entities.intern(label)
    for label in header["relations"]:
        graph.relations.intern(label)

    for split in ALL_SPLITS:
        meta = header["splits"][split.value]
        arities = np.frombuffer(data, dtype='<i8', count=meta["facts"], offset=offset)
        offset += arities.nbytes
        flat = np.frombuffer(data, dtype='<i8', count=meta["values"], offset=offset)
        offset += flat.nbytes
        cursor = 0
        for arity in arities.tolist():
            length = 2 * arity - 1
            graph.add_fact(fact_from_sequence(flat[cursor:cursor + length].tolist()), split)
            cursor += length
    graph.duplicates = header.get("duplicates", 0)
    return graph
