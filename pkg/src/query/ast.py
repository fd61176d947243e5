"""N元一阶逻辑查询的抽象语法树"""

from typing import Annotated, Iterator, List, Literal, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

from ..utils.exceptions import CircularQueryError, MultipleTargetsError, QueryValidationError


class _Node(BaseModel):
    model_config = ConfigDict(frozen=True)


class Anchor(_Node):
    """锚点实体"""
    kind: Literal["anchor"] = "anchor"
    entity: int = Field(..., ge=0)


class Target(_Node):
    """投影要预测的位置"""
    kind: Literal["target"] = "target"


class Var(_Node):
    """约束变量：子查询的结果作为投影的一个实体槽"""
    kind: Literal["var"] = "var"
    child: "QueryNode"


Slot = Annotated[Union[Anchor, Var, Target], Field(discriminator="kind")]


class Projection(_Node):
    """N元投影：实体槽与关系交替组成事实骨架"""
    kind: Literal["projection"] = "projection"
    relations: Tuple[int, ...]
    entities: Tuple[Slot, ...]
    target_position: int

    @property
    def skeleton(self) -> Tuple[Union[Anchor, Var, Target, int], ...]:
        items: List = [self.entities[0]]
        for relation, slot in zip(self.relations, self.entities[1:]):
            items.extend((relation, slot))
        return tuple(items)

    @property
    def arity(self) -> int:
        return len(self.entities)


class And(_Node):
    """合取"""
    kind: Literal["and"] = "and"
    children: Tuple["QueryNode", ...]


class Or(_Node):
    """析取"""
    kind: Literal["or"] = "or"
    children: Tuple["QueryNode", ...]


class Not(_Node):
    """否定"""
    kind: Literal["not"] = "not"
    child: "QueryNode"


QueryNode = Annotated[Union[Projection, And, Or, Not], Field(discriminator="kind")]

for _model in (Var, Projection, And, Or, Not):
    _model.model_rebuild()

QUERY_ADAPTER = TypeAdapter(QueryNode)


def projection(relations: Sequence[int], entities: Sequence[Union[Anchor, Var, Target]]) -> Projection:
    """由关系与实体槽构造投影，目标位置自动计算"""
    targets = [i for i, slot in enumerate(entities, start=1) if isinstance(slot, Target)]
    if len(targets) != 1:
        raise MultipleTargetsError(f"投影必须恰有一个目标，实际为 {len(targets)} 个")
    return Projection(relations=tuple(relations), entities=tuple(entities), target_position=targets[0])


def validate_ast(node) -> None:
    """结构校验：目标唯一、元数一致、逻辑节点子节点数、无循环引用"""
    _validate(node, ancestors=set())


def _validate(node, ancestors: set):
    if id(node) in ancestors:
        raise CircularQueryError("查询节点引用了自身的祖先")
    ancestors = ancestors | {id(node)}
    if isinstance(node, Projection):
        if len(node.entities) != len(node.relations) + 1 or len(node.entities) < 2:
            raise QueryValidationError(
                f"投影有 {len(node.entities)} 个实体槽与 {len(node.relations)} 个关系，元数不一致"
            )
        targets = [i for i, slot in enumerate(node.entities, start=1) if isinstance(slot, Target)]
        if len(targets) != 1:
            raise MultipleTargetsError(f"投影必须恰有一个目标，实际为 {len(targets)} 个")
        if targets[0] != node.target_position:
            raise QueryValidationError(
                f"声明的目标位置 {node.target_position} 与实际位置 {targets[0]} 不符"
            )
        for slot in node.entities:
            if isinstance(slot, Var):
                _validate(slot.child, ancestors)
    elif isinstance(node, (And, Or)):
        if len(node.children) < 2:
            raise QueryValidationError(f"{node.kind} 至少需要2个子查询")
        for child in node.children:
            _validate(child, ancestors)
    elif isinstance(node, Not):
        _validate(node.child, ancestors)
    else:
        raise QueryValidationError(f"未知节点类型: {type(node).__name__}")


def children_of(node) -> Tuple:
    """节点的直接子查询（投影的子查询即其变量槽）"""
    if isinstance(node, Projection):
        return tuple(slot.child for slot in node.entities if isinstance(slot, Var))
    if isinstance(node, (And, Or)):
        return node.children
    if isinstance(node, Not):
        return (node.child,)
    return ()


def iter_postorder(node) -> Iterator:
    """后序遍历；被多处引用的同一节点对象只出现一次"""
    seen = set()

    def visit(current):
        if id(current) in seen:
            return
        seen.add(id(current))
        for child in children_of(current):
            yield from visit(child)
        yield current

    yield from visit(node)


def count_operators(node) -> int:
    """算子节点数（投影 + 逻辑节点）"""
    return sum(1 for _ in iter_postorder(node))


def count_bound_variables(node) -> int:
    """约束变量（Var 槽）数量"""
    return sum(
        1 for current in iter_postorder(node) if isinstance(current, Projection)
        for slot in current.entities if isinstance(slot, Var)
    )


def anchors_of(node) -> List[int]:
    """按后序、槽位顺序列出锚点实体"""
    return [
        slot.entity for current in iter_postorder(node) if isinstance(current, Projection)
        for slot in current.entities if isinstance(slot, Anchor)
    ]


def relations_of(node) -> List[int]:
    """按后序列出关系"""
    return [
        relation for current in iter_postorder(node) if isinstance(current, Projection)
        for relation in current.relations
    ]


def has_negation(node) -> bool:
    return any(isinstance(current, Not) for current in iter_postorder(node))


def drop_negation(node):
    """删除合取中的否定分支；只剩一个子查询时合取退化为该子查询"""
    if isinstance(node, Projection):
        entities = tuple(
            Var(child=drop_negation(slot.child)) if isinstance(slot, Var) else slot
            for slot in node.entities
        )
        return node.model_copy(update={"entities": entities})
    if isinstance(node, And):
        kept = tuple(drop_negation(child) for child in node.children if not isinstance(child, Not))
        if not kept:
            return node
        return kept[0] if len(kept) == 1 else And(children=kept)
    if isinstance(node, Or):
        return Or(children=tuple(drop_negation(child) for child in node.children))
    if isinstance(node, Not):
        return Not(child=drop_negation(node.child))
    return node


def ast_to_dict(node) -> dict:
    return node.model_dump(mode="json")


def ast_from_dict(data: dict):
    node = QUERY_ADAPTER.validate_python(data)
    validate_ast(node)
    return node
