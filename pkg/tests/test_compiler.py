import pytest

from src.query import (
    ALL_TYPES, And, Anchor, LogicOpKind, QueryType, Target, canonical_ast, compile_query,
    count_operators, default_layouts, projection, register_nodes,
)
from src.query.compiler import MaskSlot, RegisterSlot, StepProgram


def _canonical(query_type):
    layouts = default_layouts(query_type)
    anchors = list(range(sum(layout.num_anchors for layout in layouts)))
    relations = list(range(sum(layout.arity - 1 for layout in layouts)))
    return canonical_ast(query_type, anchors, relations, layouts)


def test_one_hop_single_step():
    """1p -> 一步，只有投影"""
    program = compile_query(_canonical(QueryType.P1))
    assert len(program.steps) == 1
    step = program.steps[0]
    assert step.proj is not None and step.logic is None
    assert step.proj.slots[step.proj.mask_position - 1] == MaskSlot()
    assert program.target == 0


def test_intersection_three_steps():
    """2i -> 两个投影步与一个 AND(r0, r1)"""
    program = compile_query(_canonical(QueryType.I2))
    assert len(program.steps) == 3
    assert program.steps[0].proj is not None and program.steps[1].proj is not None
    last = program.steps[2]
    assert last.proj is None
    assert last.logic.kind == LogicOpKind.AND
    assert last.logic.inputs == (0, 1)


def test_pni_not_feeds_and():
    """pni 中的 NOT 步输出作为 AND 步输入"""
    program = compile_query(_canonical(QueryType.PNI))
    nots = [step for step in program.steps if step.logic is not None and step.logic.kind == LogicOpKind.NOT]
    ands = [step for step in program.steps if step.logic is not None and step.logic.kind == LogicOpKind.AND]
    assert len(nots) == 1 and len(ands) == 1
    assert nots[0].out in ands[0].logic.inputs


@pytest.mark.parametrize("query_type", ALL_TYPES)
def test_step_count_equals_operator_count(query_type):
    """未融合时步数等于算子数，且寄存器先写后读"""
    ast = _canonical(query_type)
    program = compile_query(ast)
    assert len(program.steps) == count_operators(ast)
    written = set()
    for step in program.steps:
        assert set(step.reads) <= written
        written.add(step.out)
    assert program.steps[-1].out == program.target


def test_chain_reads_previous_register():
    """2p 的第二步从第一步的寄存器读取"""
    program = compile_query(_canonical(QueryType.P2))
    second = program.steps[1].proj
    assert RegisterSlot(register_id=0) in second.slots


def test_fused_negation():
    """fuse_negation 把投影与随后的否定合并为一步"""
    ast = _canonical(QueryType.IN2)
    plain = compile_query(ast)
    fused = compile_query(ast, fuse_negation=True)
    assert len(fused.steps) == len(plain.steps) - 1
    merged = [step for step in fused.steps if step.proj is not None and step.logic is not None]
    assert len(merged) == 1
    assert merged[0].logic.kind == LogicOpKind.NOT
    assert merged[0].logic.inputs == ()


def test_shared_subquery_compiled_once():
    """同一子查询对象被引用两次时只编译一次"""
    shared = projection([0], [Anchor(entity=0), Target()])
    program = compile_query(And(children=(shared, shared)))
    assert len(program.steps) == 2
    assert program.steps[1].logic.inputs == (0, 0)


def test_program_rejects_read_before_write():
    """读取未写入寄存器的程序无法构造"""
    with pytest.raises(ValueError):
        StepProgram.model_validate({
            "num_registers": 2,
            "target": 1,
            "steps": [
                {"out": 0, "logic": {"kind": "NOT", "inputs": [1]}},
                {"out": 1, "logic": {"kind": "NOT", "inputs": [0]}},
            ],
        })


def test_merge_projection_reads_two_registers():
    """2cp：两个叶子投影各写一个寄存器，汇合投影同时读取二者"""
    program = compile_query(_canonical(QueryType.CP2))
    assert len(program.steps) == 3
    merge = program.steps[-1].proj
    assert merge.registers == (0, 1)
    assert merge.slots[0] == MaskSlot()
    assert [type(slot) for slot in merge.slots[1:]] == [RegisterSlot, RegisterSlot]


def test_register_nodes_follow_step_order():
    """register_nodes 按寄存器编号给出写入它的子查询"""
    ast = _canonical(QueryType.CP2)
    nodes = register_nodes(ast)
    assert nodes[-1] is ast
    assert nodes[0] is ast.entities[1].child
    assert nodes[1] is ast.entities[2].child
