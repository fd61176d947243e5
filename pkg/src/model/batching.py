"""步骤程序的批量执行：同一步在整批上同时执行，投影按元数分组"""

from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple, Union

import torch

from ..logic import FuzzyLogic, LogicFactory, LogicKind
from ..query.compiler import LogicOpKind, Step, StepProgram
from .config import AblationFlags
from .nqe import NQEModel

Registers = List[List[Optional[torch.Tensor]]]
LogicLike = Union[str, LogicKind, FuzzyLogic]


class BatchResult:
    """整批的目标向量 (B, d) 与各查询的全部寄存器值"""

    def __init__(self, targets: torch.Tensor, registers: Registers):
        self.targets = targets
        self.registers = registers


def resolve_logic(logic: LogicLike, ablation: Optional[AblationFlags] = None) -> FuzzyLogic:
    if isinstance(logic, FuzzyLogic):
        return logic
    return LogicFactory.get_logic(logic, logic_blind=bool(ablation and ablation.logic_blind))


def _apply_logic(logic: FuzzyLogic, kind: LogicOpKind, inputs: List[torch.Tensor]) -> torch.Tensor:
    if kind == LogicOpKind.AND:
        return logic.conj(inputs)
    if kind == LogicOpKind.OR:
        return logic.disj(inputs)
    return logic.neg(inputs[0])


def _run_projections(model: NQEModel, logic: FuzzyLogic, active: List[Tuple[int, Step]], registers: Registers):
    groups: Dict[int, List[Tuple[int, Step]]] = defaultdict(list)
    for b, step in active:
        if step.proj is not None:
            groups[step.proj.arity].append((b, step))
    for arity in sorted(groups):
        members = groups[arity]
        tokens = torch.stack([model.build_input(step.proj, registers[b]).tokens for b, step in members])
        outputs = model.encode(tokens, [step.proj.mask_position for _, step in members])
        for row, (b, step) in enumerate(members):
            value = outputs[row]
            if step.logic is not None:
                # 融合步：投影结果直接取否定
                value = logic.neg(value)
            registers[b][step.out] = value


def _run_logic(logic: FuzzyLogic, active: List[Tuple[int, Step]], registers: Registers):
    groups: Dict[Tuple[LogicOpKind, int], List[Tuple[int, Step]]] = defaultdict(list)
    for b, step in active:
        if step.proj is None:
            groups[(step.logic.kind, len(step.logic.inputs))].append((b, step))
    for (kind, width), members in sorted(groups.items(), key=lambda item: (item[0][0].value, item[0][1])):
        columns = [
            torch.stack([registers[b][step.logic.inputs[k]] for b, step in members])
            for k in range(width)
        ]
        outputs = _apply_logic(logic, kind, columns)
        for row, (b, step) in enumerate(members):
            registers[b][step.out] = outputs[row]


def run_step_program(
    model: NQEModel,
    programs: Sequence[StepProgram],
    logic: LogicLike = LogicKind.PRODUCT,
    ablation: Optional[AblationFlags] = None,
) -> BatchResult:
    """第 t 步在整批上同时执行；较短的程序在末尾以空步补齐"""
    ablation = ablation if ablation is not None else model.ablation
    fuzzy = resolve_logic(logic, ablation)
    registers: Registers = [[None] * program.num_registers for program in programs]
    depth = max((len(program.steps) for program in programs), default=0)
    for t in range(depth):
        active = [(b, program.steps[t]) for b, program in enumerate(programs) if t < len(program.steps)]
        _run_projections(model, fuzzy, active, registers)
        _run_logic(fuzzy, active, registers)
    targets = torch.stack([registers[b][program.target] for b, program in enumerate(programs)]) \
        if programs else torch.empty(0, model.config.dim, dtype=model.entity_logits.dtype)
    return BatchResult(targets, registers)


def execute_program_sequential(
    model: NQEModel,
    program: StepProgram,
    logic: LogicLike = LogicKind.PRODUCT,
    ablation: Optional[AblationFlags] = None,
) -> List[torch.Tensor]:
    """逐步单独执行一条程序，返回全部寄存器值"""
    ablation = ablation if ablation is not None else model.ablation
    fuzzy = resolve_logic(logic, ablation)
    registers: List[Optional[torch.Tensor]] = [None] * program.num_registers
    for step in program.steps:
        if step.proj is not None:
            value = model.project(model.build_input(step.proj, registers))
            if step.logic is not None:
                value = fuzzy.neg(value)
        else:
            value = _apply_logic(fuzzy, step.logic.kind, [registers[i] for i in step.logic.inputs])
        registers[step.out] = value
    return registers


def batch_loss(
    model: NQEModel,
    programs: Sequence[StepProgram],
    targets: Sequence[int],
    eps: float,
    logic: LogicLike = LogicKind.PRODUCT,
    ablation: Optional[AblationFlags] = None,
) -> torch.Tensor:
    """整批平均损失；unparalleled 时逐条查询顺序执行"""
    ablation = ablation if ablation is not None else model.ablation
    if ablation.unparalleled:
        queries = torch.stack([
            execute_program_sequential(model, program, logic, ablation)[program.target] for program in programs
        ])
    else:
        queries = run_step_program(model, programs, logic, ablation).targets
    target = torch.as_tensor(list(targets), dtype=torch.long)
    return model.loss_from_query(queries, target, eps).mean()


def gradients(
    model: NQEModel,
    programs: Sequence[StepProgram],
    targets: Sequence[int],
    eps: float,
    logic: LogicLike = LogicKind.PRODUCT,
    ablation: Optional[AblationFlags] = None,
) -> Dict[str, torch.Tensor]:
    """平均损失对每个参数的梯度；冻结参数与未参与计算的参数返回零"""
    named = [(name, parameter) for name, parameter in model.named_parameters()]
    trainable = [(name, parameter) for name, parameter in named if parameter.requires_grad]
    loss = batch_loss(model, programs, targets, eps, logic, ablation)
    grads = torch.autograd.grad(loss, [parameter for _, parameter in trainable], allow_unused=True)
    result = {name: torch.zeros_like(parameter) for name, parameter in named}
    for (name, parameter), grad in zip(trainable, grads):
        if grad is not None:
            result[name] = grad
    return result
