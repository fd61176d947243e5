"""16种规范查询形状及其实例化"""

from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..utils.exceptions import ShapeError
from .ast import And, Anchor, Not, Or, Target, Var, projection, validate_ast


class QueryType(str, Enum):
    """查询类型标签"""
    P1 = "1p"
    P2 = "2p"
    P3 = "3p"
    I2 = "2i"
    I3 = "3i"
    PI = "pi"
    IP = "ip"
    U2 = "2u"
    UP = "up"
    CP2 = "2cp"
    CP3 = "3cp"
    IN2 = "2in"
    IN3 = "3in"
    INP = "inp"
    PIN = "pin"
    PNI = "pni"


EPFO_TYPES: Tuple[QueryType, ...] = (
    QueryType.P1, QueryType.P2, QueryType.P3, QueryType.I2, QueryType.I3, QueryType.PI,
    QueryType.IP, QueryType.U2, QueryType.UP, QueryType.CP2, QueryType.CP3,
)
NEGATION_TYPES: Tuple[QueryType, ...] = (
    QueryType.IN2, QueryType.IN3, QueryType.INP, QueryType.PIN, QueryType.PNI,
)
ALL_TYPES: Tuple[QueryType, ...] = EPFO_TYPES + NEGATION_TYPES
CP_TYPES: Tuple[QueryType, ...] = (QueryType.CP2, QueryType.CP3)


# 形状模板：("p", (变量输入子模板...)) / ("and"|"or", (子模板...)) / ("not", 子模板)
P = ("p", ())
SHAPES: Dict[QueryType, tuple] = {
    QueryType.P1: P,
    QueryType.P2: ("p", (P,)),
    QueryType.P3: ("p", (("p", (P,)),)),
    QueryType.I2: ("and", (P, P)),
    QueryType.I3: ("and", (P, P, P)),
    QueryType.PI: ("and", (("p", (P,)), P)),
    QueryType.IP: ("p", (("and", (P, P)),)),
    QueryType.U2: ("or", (P, P)),
    QueryType.UP: ("p", (("or", (P, P)),)),
    QueryType.CP2: ("p", (P, P)),
    QueryType.CP3: ("p", (P, P, P)),
    QueryType.IN2: ("and", (P, ("not", P))),
    QueryType.IN3: ("and", (P, P, ("not", P))),
    QueryType.INP: ("p", (("and", (P, ("not", P))),)),
    QueryType.PIN: ("and", (("p", (P,)), ("not", P))),
    QueryType.PNI: ("and", (("not", ("p", (P,))), P)),
}


class HopLayout(BaseModel):
    """单个投影的布局：事实元数、目标位置、各变量输入位置（均为1起始实体位置）

    变量输入位置按升序依次对应模板中的子查询。
    """
    model_config = ConfigDict(frozen=True)

    arity: int = Field(2, ge=2)
    target_position: int = 2
    var_positions: Tuple[int, ...] = ()

    @model_validator(mode="after")
    def _check_positions(self):
        positions = (self.target_position,) + self.var_positions
        if any(p < 1 or p > self.arity for p in positions):
            raise ValueError(f"位置超出元数 {self.arity}: {list(positions)}")
        if len(set(positions)) != len(positions):
            raise ValueError(f"变量位置与目标位置重复: {list(positions)}")
        if list(self.var_positions) != sorted(self.var_positions):
            raise ValueError("变量位置须升序排列")
        return self

    @property
    def num_anchors(self) -> int:
        return self.arity - 1 - len(self.var_positions)


def hop_templates(template) -> List[int]:
    """按后序列出每个投影的变量输入个数"""
    kind, payload = template
    hops: List[int] = []
    if kind == "p":
        for child in payload:
            hops.extend(hop_templates(child))
        hops.append(len(payload))
    elif kind in ("and", "or"):
        for child in payload:
            hops.extend(hop_templates(child))
    else:
        hops.extend(hop_templates(payload))
    return hops


def default_layouts(query_type: QueryType) -> List[HopLayout]:
    """默认布局：单变量投影为 (V, r, ?)，无变量为 (s, r, ?)；
    X 个变量输入的投影为 (?, r1, V1, a1, V2, ...)，变量占满主宾语之外的限定符值位置"""
    layouts = []
    for num_vars in hop_templates(SHAPES[QueryType(query_type)]):
        if num_vars >= 2:
            arity = num_vars + 1
            layouts.append(HopLayout(arity=arity, target_position=1, var_positions=tuple(range(2, arity + 1))))
        else:
            layouts.append(HopLayout(arity=2, target_position=2, var_positions=(1,) * num_vars))
    return layouts


def canonical_ast(
    query_type,
    anchors: Sequence[int],
    relations: Sequence[int],
    layouts: Optional[Sequence[HopLayout]] = None,
):
    """用给定锚点与关系实例化规范形状

    锚点与关系按投影后序消费；投影内部锚点按实体位置、关系按序列顺序。
    """
    query_type = QueryType(query_type)
    template = SHAPES[query_type]
    hops = hop_templates(template)
    layouts = list(layouts) if layouts is not None else default_layouts(query_type)
    if len(layouts) != len(hops):
        raise ShapeError(f"{query_type.value} 需要 {len(hops)} 个投影布局，实际为 {len(layouts)}")
    for num_vars, layout in zip(hops, layouts):
        if num_vars != len(layout.var_positions):
            raise ShapeError(f"{query_type.value} 的投影布局与变量输入不匹配")

    need_anchors = sum(layout.num_anchors for layout in layouts)
    need_relations = sum(layout.arity - 1 for layout in layouts)
    if len(anchors) != need_anchors or len(relations) != need_relations:
        raise ShapeError(
            f"{query_type.value} 需要 {need_anchors} 个锚点和 {need_relations} 个关系，"
            f"实际为 {len(anchors)} 和 {len(relations)}"
        )

    anchor_iter = iter(anchors)
    relation_iter = iter(relations)
    layout_iter = iter(layouts)
    node = _instantiate(template, anchor_iter, relation_iter, layout_iter)
    validate_ast(node)
    return node


def _instantiate(template, anchors: Iterator[int], relations: Iterator[int], layouts: Iterator[HopLayout]):
    kind, payload = template
    if kind == "p":
        children = [_instantiate(c, anchors, relations, layouts) for c in payload]
        layout = next(layouts)
        inputs = dict(zip(layout.var_positions, children))
        slots = []
        for position in range(1, layout.arity + 1):
            if position == layout.target_position:
                slots.append(Target())
            elif position in inputs:
                slots.append(Var(child=inputs[position]))
            else:
                slots.append(Anchor(entity=next(anchors)))
        hop_relations = [next(relations) for _ in range(layout.arity - 1)]
        return projection(hop_relations, slots)
    if kind == "and":
        return And(children=tuple(_instantiate(c, anchors, relations, layouts) for c in payload))
    if kind == "or":
        return Or(children=tuple(_instantiate(c, anchors, relations, layouts) for c in payload))
    return Not(child=_instantiate(payload, anchors, relations, layouts))
