"""把查询AST编译为线性步骤程序

每一步至多包含一个投影 {P, ∅} 和一个逻辑算子 {AND, OR, NOT, ∅}，
步骤按拓扑序排列，寄存器先写后读。
"""

from collections import Counter
from enum import Enum
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .ast import And, Not, Projection, Target, Var, children_of, iter_postorder, validate_ast
from ..utils.exceptions import ModelInputError


class LogicOpKind(str, Enum):
    AND = "AND"
    OR = "OR"
    NOT = "NOT"


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


class AnchorSlot(_Frozen):
    kind: Literal["anchor"] = "anchor"
    entity: int


class RegisterSlot(_Frozen):
    kind: Literal["register"] = "register"
    register_id: int


class MaskSlot(_Frozen):
    kind: Literal["mask"] = "mask"


SpecSlot = Annotated[Union[AnchorSlot, RegisterSlot, MaskSlot], Field(discriminator="kind")]


class ProjectionSpec(_Frozen):
    """投影步骤的输入：关系、实体槽（锚点/寄存器/掩码）、掩码位置

    形状不合法时直接抛出 ModelInputError，不包装为 ValidationError。
    """
    relations: Tuple[int, ...]
    slots: Tuple[SpecSlot, ...]
    mask_position: int

    @model_validator(mode="after")
    def _check(self):
        if len(self.slots) != len(self.relations) + 1:
            raise ModelInputError("实体槽数量必须等于关系数量加一")
        masks = [i for i, slot in enumerate(self.slots, start=1) if isinstance(slot, MaskSlot)]
        if masks != [self.mask_position]:
            raise ModelInputError(f"必须恰有一个掩码且位于 {self.mask_position}")
        return self

    @property
    def arity(self) -> int:
        return len(self.slots)

    @property
    def registers(self) -> Tuple[int, ...]:
        return tuple(slot.register_id for slot in self.slots if isinstance(slot, RegisterSlot))


class LogicOp(_Frozen):
    kind: LogicOpKind
    inputs: Tuple[int, ...] = ()


class Step(_Frozen):
    """一步：投影与逻辑算子至少其一；二者并存时为“投影后取否定”的融合步"""
    proj: Optional[ProjectionSpec] = None
    logic: Optional[LogicOp] = None
    out: int

    @model_validator(mode="after")
    def _check(self):
        if self.proj is None and self.logic is None:
            raise ValueError("步骤至少包含投影或逻辑算子之一")
        if self.proj is not None and self.logic is not None:
            if self.logic.kind != LogicOpKind.NOT or self.logic.inputs:
                raise ValueError("只有“投影 + 一元否定”可以融合为一步")
        elif self.logic is not None:
            arity = len(self.logic.inputs)
            if self.logic.kind == LogicOpKind.NOT and arity != 1:
                raise ValueError("NOT 需要恰好一个输入")
            if self.logic.kind != LogicOpKind.NOT and arity < 2:
                raise ValueError(f"{self.logic.kind.value} 至少需要两个输入")
        return self

    @property
    def reads(self) -> Tuple[int, ...]:
        registers = self.proj.registers if self.proj is not None else ()
        if self.logic is not None:
            registers += self.logic.inputs
        return registers


class StepProgram(_Frozen):
    """线性步骤程序：批量执行的基本单位"""
    num_registers: int
    steps: Tuple[Step, ...]
    target: int

    @model_validator(mode="after")
    def _check(self):
        check_liveness(self)
        return self


def check_liveness(program: StepProgram):
    """寄存器先写后读、末步写入目标寄存器"""
    if not program.steps:
        raise ValueError("步骤程序为空")
    written = set()
    for index, step in enumerate(program.steps):
        for register in step.reads:
            if register not in written:
                raise ValueError(f"第 {index} 步读取了尚未写入的寄存器 r{register}")
        if not 0 <= step.out < program.num_registers:
            raise ValueError(f"第 {index} 步写入越界寄存器 r{step.out}")
        written.add(step.out)
    if program.steps[-1].out != program.target:
        raise ValueError("最后一步必须写入目标寄存器")


def _reference_counts(root) -> Counter:
    counts: Counter = Counter()
    for node in iter_postorder(root):
        for child in children_of(node):
            counts[id(child)] += 1
    return counts


def compile_query(ast, fuse_negation: bool = False) -> StepProgram:
    """编译AST；fuse_negation 为真时把“投影→否定”合并为一步"""
    return _compile(ast, fuse_negation)[0]


def register_nodes(ast, fuse_negation: bool = False) -> List:
    """按寄存器编号列出写入该寄存器的子查询节点"""
    return _compile(ast, fuse_negation)[1]


def _compile(ast, fuse_negation: bool):
    validate_ast(ast)
    references = _reference_counts(ast)
    registers: Dict[int, int] = {}
    steps: List[Step] = []
    nodes: List = []

    def projection_spec(node: Projection) -> ProjectionSpec:
        slots = []
        for slot in node.entities:
            if isinstance(slot, Target):
                slots.append(MaskSlot())
            elif isinstance(slot, Var):
                slots.append(RegisterSlot(register_id=emit(slot.child)))
            else:
                slots.append(AnchorSlot(entity=slot.entity))
        return ProjectionSpec(relations=node.relations, slots=tuple(slots), mask_position=node.target_position)

    def push(step_kwargs: dict, node) -> int:
        out = len(steps)
        steps.append(Step(out=out, **step_kwargs))
        nodes.append(node)
        registers[id(node)] = out
        return out

    def emit(node) -> int:
        if id(node) in registers:
            return registers[id(node)]
        if isinstance(node, Projection):
            return push({"proj": projection_spec(node)}, node)
        if isinstance(node, Not):
            child = node.child
            if (fuse_negation and isinstance(child, Projection)
                    and references[id(child)] == 1 and id(child) not in registers):
                return push({"proj": projection_spec(child), "logic": LogicOp(kind=LogicOpKind.NOT)}, node)
            return push({"logic": LogicOp(kind=LogicOpKind.NOT, inputs=(emit(child),))}, node)
        kind = LogicOpKind.AND if isinstance(node, And) else LogicOpKind.OR
        inputs = tuple(emit(child) for child in node.children)
        return push({"logic": LogicOp(kind=kind, inputs=inputs)}, node)

    target = emit(ast)
    return StepProgram(num_registers=len(steps), steps=tuple(steps), target=target), nodes


