import json
import re
from typing import Optional

from ..graph.store import HyperGraph
from .ast import And, Not, Or, Projection, Target, Var, anchors_of, ast_from_dict, ast_to_dict, relations_of
from .shapes import QueryType

_PLAIN_LABEL = re.compile(r'^[^\s()"]+$')


def _quote(label: str) -> str:
    if label == "?" or not _PLAIN_LABEL.match(label):
        return json.dumps(label, ensure_ascii=False)
    return label


def to_text(node, graph: Optional[HyperGraph] = None) -> str:
    """AST -> 查询文本（parse 的逆）"""
    def entity(entity_id: int) -> str:
        return _quote(graph.entities.label(entity_id)) if graph else str(entity_id)

    def relation(relation_id: int) -> str:
        return _quote(graph.relations.label(relation_id)) if graph else str(relation_id)

    def slot(item) -> str:
        if isinstance(item, Target):
            return "?"
        if isinstance(item, Var):
            return f"(var {render(item.child)})"
        return entity(item.entity)

    def render(current) -> str:
        if isinstance(current, Projection):
            parts = [slot(current.entities[0])]
            for rel, item in zip(current.relations, current.entities[1:]):
                parts.extend((relation(rel), slot(item)))
            return f"(P {current.target_position} (f {' '.join(parts)}))"
        if isinstance(current, (And, Or)):
            return f"({current.kind} {' '.join(render(child) for child in current.children)})"
        if isinstance(current, Not):
            return f"(not {render(current.child)})"
        raise TypeError(type(current).__name__)

    return render(node)


def query_record(query_type, node) -> dict:
    """查询的JSON记录：类型、嵌套AST、锚点与关系列表"""
    return {
        "type": QueryType(query_type).value,
        "ast": ast_to_dict(node),
        "anchors": anchors_of(node),
        "relations": relations_of(node),
    }


def record_ast(record: dict):
    """从JSON记录恢复AST（含结构校验）"""
    return ast_from_dict(record["ast"])


