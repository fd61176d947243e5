import pytest
import torch

from src.logic import LogicKind
from src.model import (
    AblationFlags, EncoderConfig, NQEModel, batch_loss, execute_program_sequential, gradients, run_step_program,
)
from src.query import QueryType, canonical_ast, compile_query, default_layouts

CONFIG = EncoderConfig(dim=8, num_layers=2, num_heads=2, ffn_dim=16)


def _program(query_type, offset=0, fuse=False):
    layouts = default_layouts(query_type)
    anchors = [(offset + i) % 10 for i in range(sum(layout.num_anchors for layout in layouts))]
    relations = [(offset + i) % 5 for i in range(sum(layout.arity - 1 for layout in layouts))]
    return compile_query(canonical_ast(query_type, anchors, relations, layouts), fuse_negation=fuse)


def _model(ablation=AblationFlags()):
    torch.manual_seed(1)
    return NQEModel(10, 5, CONFIG, ablation)


def test_single_one_hop_equals_project():
    """单条 1p 程序的批量执行等于直接投影"""
    model = _model()
    program = _program(QueryType.P1)
    batched = run_step_program(model, [program]).targets[0]
    direct = model.project(model.build_input(program.steps[0].proj))
    assert torch.allclose(batched, direct, atol=1e-12)


@pytest.mark.parametrize("logic", [kind.value for kind in LogicKind])
def test_mixed_batch_matches_sequential(logic):
    """{1p, 2i, pni, 2cp} 混合批与逐条执行一致"""
    model = _model()
    programs = [
        _program(QueryType.P1, 0), _program(QueryType.I2, 1), _program(QueryType.PNI, 2),
        _program(QueryType.CP2, 3), _program(QueryType.IP, 4), _program(QueryType.UP, 5),
    ]
    result = run_step_program(model, programs, logic)
    for b, program in enumerate(programs):
        registers = execute_program_sequential(model, program, logic)
        assert torch.allclose(result.targets[b], registers[program.target], atol=1e-6)
        for register in range(program.num_registers):
            assert torch.allclose(result.registers[b][register], registers[register], atol=1e-6)


def test_fused_negation_matches_unfused():
    """融合否定的程序与未融合程序结果一致"""
    model = _model()
    plain = _program(QueryType.IN3, 2)
    fused = _program(QueryType.IN3, 2, fuse=True)
    assert len(fused.steps) < len(plain.steps)
    targets = run_step_program(model, [plain, fused]).targets
    assert torch.allclose(targets[0], targets[1], atol=1e-12)


def test_logic_blind_uses_mean():
    """逻辑无关消融：2i 的目标为两个投影的平均，与乘积逻辑不同"""
    model = _model()
    program = _program(QueryType.I2)
    product = run_step_program(model, [program], LogicKind.PRODUCT)
    blind = run_step_program(model, [program], LogicKind.PRODUCT, AblationFlags(logic_blind=True))
    first, second = blind.registers[0][0], blind.registers[0][1]
    assert torch.allclose(blind.targets[0], (first + second) / 2)
    assert torch.allclose(product.targets[0], first * second)
    assert not torch.allclose(blind.targets[0], product.targets[0])


def test_empty_batch():
    """空批返回 (0, d)"""
    assert run_step_program(_model(), []).targets.shape == (0, CONFIG.dim)


def test_unparalleled_gradients_match_batched():
    """单类型批上逐条执行与批量执行的梯度一致"""
    model = _model()
    programs = [_program(QueryType.PI, offset) for offset in range(4)]
    targets = [1, 3, 5, 7]
    batched = gradients(model, programs, targets, 0.1)
    sequential = gradients(model, programs, targets, 0.1, ablation=AblationFlags(unparalleled=True))
    for name in batched:
        assert torch.allclose(batched[name], sequential[name], atol=1e-9), name


def test_batch_loss_is_mean_of_losses():
    """批损失是逐样本损失的平均"""
    model = _model()
    programs = [_program(QueryType.P2, 0), _program(QueryType.I3, 1)]
    total = batch_loss(model, programs, [2, 4], 0.1)
    separate = [batch_loss(model, [program], [target], 0.1) for program, target in zip(programs, [2, 4])]
    assert total.item() == pytest.approx(sum(value.item() for value in separate) / 2)


def test_frozen_parameters_have_zero_gradient():
    """NodeH-only 下边偏置梯度为零"""
    model = _model(AblationFlags(node_h_only=True))
    grads = gradients(model, [_program(QueryType.P2)], [3], 0.1)
    assert all(torch.count_nonzero(grad) == 0 for name, grad in grads.items() if "edge_biases" in name)
    assert torch.count_nonzero(grads["entity_logits"]) > 0
