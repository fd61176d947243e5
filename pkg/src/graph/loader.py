import json
import logging
import os
from typing import List, Optional, Tuple, Union

from pydantic import BaseModel

from ..utils.exceptions import ArityError, FactFormatError
from .facts import NAryFact
from .store import HyperGraph, Split

logger = logging.getLogger(__name__)

LabelFact = Tuple[str, str, str, List[Tuple[str, str]]]


class LoadStats(BaseModel):
    """一次加载的增量统计"""
    split: Split
    lines: int = 0
    new_entities: int = 0
    new_relations: int = 0
    new_facts: int = 0
    duplicates: int = 0
    reflexive_qualifiers: int = 0


def _parse_json_line(line: str, line_number: int) -> LabelFact:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise FactFormatError(f"JSON解析失败: {e.msg}", line_number)
    if not isinstance(record, dict):
        raise FactFormatError("每行必须是JSON对象", line_number)
    missing = [key for key in ("s", "r") if key not in record]
    if missing:
        raise FactFormatError(f"缺少字段: {', '.join(missing)}", line_number)
    if "o" not in record:
        raise ArityError("缺少宾语，事实元数小于2", line_number)
    subject, relation, obj = record["s"], record["r"], record["o"]
    if not all(isinstance(item, str) for item in (subject, relation, obj)):
        raise FactFormatError("s/r/o 必须为字符串", line_number)
    quals = record.get("quals", [])
    if not isinstance(quals, list):
        raise FactFormatError("quals 必须为列表", line_number)
    qualifiers = []
    for pair in quals:
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(item, str) for item in pair)):
            raise FactFormatError(f"限定符格式错误: {pair!r}", line_number)
        qualifiers.append((pair[0], pair[1]))
    return subject, relation, obj, qualifiers


def _parse_tsv_line(line: str, line_number: int) -> LabelFact:
    fields = [field.strip() for field in line.split('\t')]
    if any(not field for field in fields):
        raise FactFormatError("存在空字段", line_number)
    if len(fields) < 3:
        raise ArityError(f"字段数 {len(fields)} 不足3，事实元数小于2", line_number)
    if len(fields) % 2 == 0:
        raise FactFormatError("限定符 attribute/value 未成对", line_number)
    qualifiers = [(fields[i], fields[i + 1]) for i in range(3, len(fields), 2)]
    return fields[0], fields[1], fields[2], qualifiers


def detect_format(path: str) -> str:
    """根据扩展名判断格式：.tsv/.txt 为制表符分隔，其余按JSON Lines"""
    extension = os.path.splitext(path)[1].lower()
    return "tsv" if extension in (".tsv", ".txt") else "jsonl"


def load_facts(
    graph: HyperGraph,
    path: str,
    split: Union[str, Split],
    fmt: Optional[str] = None,
) -> LoadStats:
    """把事实文件追加到图的某个划分，返回增量统计

    整个文件先解析再写入，格式错误时图保持不变。
    """
    split = Split(split)
    fmt = fmt or detect_format(path)
    parse = _parse_tsv_line if fmt == "tsv" else _parse_json_line

    parsed: List[LabelFact] = []
    lines = 0
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            lines += 1
            if not line.strip():
                continue
            parsed.append(parse(line.rstrip('\n'), line_number))

    stats = LoadStats(split=split, lines=lines)
    for subject, relation, obj, qualifiers in parsed:
        ids = []
        for label in (subject, obj) + tuple(value for _, value in qualifiers):
            entity_id, created = graph.entities.intern(label)
            stats.new_entities += created
            ids.append(entity_id)
        rel_ids = []
        for label in (relation,) + tuple(attribute for attribute, _ in qualifiers):
            relation_id, created = graph.relations.intern(label)
            stats.new_relations += created
            rel_ids.append(relation_id)
        fact = NAryFact(
            subject=ids[0],
            relation=rel_ids[0],
            object=ids[1],
            qualifiers=tuple(zip(rel_ids[1:], ids[2:])),
        )
        before = graph.reflexive_qualifiers
        if graph.add_fact(fact, split):
            stats.new_facts += 1
            stats.reflexive_qualifiers += graph.reflexive_qualifiers - before
        else:
            stats.duplicates += 1

    logger.info(
        "加载 %s -> %s: %d 条新事实, %d 条重复, %d 个新实体, %d 个新关系",
        path, split.value, stats.new_facts, stats.duplicates,
        stats.new_entities, stats.new_relations,
    )
    return stats
