import math

import numpy as np
import pytest
import torch

from src.model import AblationFlags, EdgeType, EncoderConfig, EncoderInput, NQEModel, edge_type, edge_type_matrix
from src.query.compiler import AnchorSlot, MaskSlot, ProjectionSpec, RegisterSlot
from src.utils.exceptions import ModelInputError, TargetOutOfRangeError

TINY = EncoderConfig(dim=8, num_layers=2, num_heads=2, ffn_dim=16)


def _model(num_entities=6, num_relations=4, config=TINY, ablation=AblationFlags(), seed=0):
    torch.manual_seed(seed)
    return NQEModel(num_entities, num_relations, config, ablation)


def test_edge_types_of_four_ary_fact():
    """边类型由角色与是否属于同一限定符决定，共14种"""
    assert len(EdgeType) == 14
    assert edge_type(0, 0) == EdgeType.SELF
    assert edge_type(0, 1) == EdgeType.S_R
    assert edge_type(2, 0) == EdgeType.S_O
    assert edge_type(3, 4) == EdgeType.A_V_SAME
    assert edge_type(3, 6) == EdgeType.A_V_DIFF
    assert edge_type(3, 5) == EdgeType.A_A
    assert edge_type(4, 6) == EdgeType.V_V
    assert edge_type(1, 6) == EdgeType.R_V
    matrix = edge_type_matrix(4)
    assert matrix.shape == (7, 7)
    assert torch.equal(matrix, matrix.T)
    assert set(matrix.flatten().tolist()) == set(range(14))


def test_output_range_and_row_stochastic_attention():
    """输出分量在 (0,1) 内，注意力每行和为1"""
    model = _model()
    tokens = torch.rand(5, 7, TINY.dim, dtype=torch.float64)
    out = model.encode(tokens, [1, 2, 3, 4, 2])
    assert out.shape == (5, TINY.dim)
    assert torch.all(out > 0) and torch.all(out < 1)
    for weights in model.encoder.attention_maps():
        assert torch.allclose(weights.sum(-1), torch.ones_like(weights.sum(-1)), atol=1e-6)


@pytest.mark.parametrize("mask_position", [1, 2, 3])
def test_qualifier_permutation_invariance(mask_position):
    """交换两个完整的限定符对，输出不变"""
    model = _model()
    model.eval()
    tokens = torch.rand(7, TINY.dim, dtype=torch.float64)
    swapped = tokens[[0, 1, 2, 5, 6, 3, 4]]
    swapped_mask = {1: 1, 2: 2, 3: 4}[mask_position]
    first = model.project(EncoderInput(tokens=tokens, mask_position=mask_position))
    second = model.project(EncoderInput(tokens=swapped, mask_position=swapped_mask))
    assert torch.allclose(first, second, atol=1e-6)


def _layer_norm(x, weight, bias, eps=1e-5):
    mean = x.mean(-1, keepdims=True)
    var = ((x - mean) ** 2).mean(-1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps) * weight + bias


def _gelu(x):
    return 0.5 * x * (1.0 + np.vectorize(math.erf)(x / math.sqrt(2.0)))


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def test_hand_computed_forward_pass():
    """d=2、单层单头模型在三元组输入上的前向与逐步手算一致"""
    config = EncoderConfig(dim=2, num_layers=1, num_heads=1, ffn_dim=2)
    model = _model(num_entities=3, num_relations=1, config=config)
    rng = np.random.default_rng(7)
    with torch.no_grad():
        for parameter in model.parameters():
            parameter.copy_(torch.from_numpy(rng.normal(scale=0.5, size=tuple(parameter.shape))))
    p = {name: tensor.detach().numpy() for name, tensor in model.named_parameters()}

    entities = _sigmoid(p["entity_logits"])
    relations = _sigmoid(p["relation_logits"])
    x = np.stack([entities[0], relations[0], p["mask_token"]])
    roles = [0, 1, 0]
    edges = [[0, 1, 2], [1, 0, 3], [2, 3, 0]]

    prefix = "encoder.layers.0."
    q = np.stack([x[i] @ p[prefix + "attention.w_query"][roles[i]] for i in range(3)])
    k = np.stack([x[i] @ p[prefix + "attention.w_key"][roles[i]] for i in range(3)])
    v = np.stack([x[i] @ p[prefix + "attention.w_value"][roles[i]] for i in range(3)])
    bq, bk, bv = (p[f"encoder.edge_biases.0.{name}"] for name in ("query", "key", "value"))

    attended = np.zeros_like(x)
    for i in range(3):
        logits = np.array([
            np.dot(q[i] + bq[edges[i][j]], k[j] + bk[edges[i][j]]) / math.sqrt(2) for j in range(3)
        ])
        alpha = np.exp(logits - logits.max())
        alpha /= alpha.sum()
        attended[i] = sum(alpha[j] * (v[j] + bv[edges[i][j]]) for j in range(3))

    y = _layer_norm(x + attended, p[prefix + "addnorm1.ln.weight"], p[prefix + "addnorm1.ln.bias"])
    hidden = _gelu(y @ p[prefix + "ffn.dense1.weight"].T + p[prefix + "ffn.dense1.bias"])
    ffn = hidden @ p[prefix + "ffn.dense2.weight"].T + p[prefix + "ffn.dense2.bias"]
    z = _layer_norm(y + ffn, p[prefix + "addnorm2.ln.weight"], p[prefix + "addnorm2.ln.bias"])

    head = _gelu(z[2] @ p["encoder.head.0.weight"].T + p["encoder.head.0.bias"])
    head = head @ p["encoder.head.2.weight"].T + p["encoder.head.2.bias"]
    expected = _sigmoid(_layer_norm(head, p["encoder.head_norm.weight"], p["encoder.head_norm.bias"]))

    spec = ProjectionSpec(relations=(0,), slots=(AnchorSlot(entity=0), MaskSlot()), mask_position=2)
    actual = model.project(model.build_input(spec)).detach().numpy()
    np.testing.assert_allclose(actual, expected, rtol=1e-10, atol=1e-12)


def test_similarity_hand_case():
    """d=2、|E|=3 的相似度 softmax 与手算一致"""
    model = _model(num_entities=3, num_relations=1, config=EncoderConfig(dim=2, num_layers=1, num_heads=1))
    with torch.no_grad():
        model.entity_logits.copy_(torch.tensor(
            [[0.0, 0.0], [math.log(3.0), 0.0], [0.0, -math.log(3.0)]], dtype=torch.float64
        ))
    # 嵌入为 (0.5,0.5) (0.75,0.5) (0.5,0.25)
    q = torch.tensor([1.0, 2.0], dtype=torch.float64)
    logits = [1.5, 1.75, 1.0]
    total = sum(math.exp(value) for value in logits)
    expected = torch.tensor([math.exp(value) / total for value in logits], dtype=torch.float64)
    assert torch.allclose(model.similarity(q), expected, atol=1e-12)


def test_similarity_single_entity():
    """|E|=1 时唯一实体概率为1"""
    model = _model(num_entities=1, num_relations=1)
    q = torch.rand(TINY.dim, dtype=torch.float64)
    assert model.similarity(q).tolist() == [1.0]


def test_identical_embeddings_get_equal_probability():
    """嵌入相同的实体概率相同"""
    model = _model()
    with torch.no_grad():
        model.entity_logits[3].copy_(model.entity_logits[1])
    probabilities = model.similarity(torch.rand(TINY.dim, dtype=torch.float64))
    assert probabilities[1].item() == pytest.approx(probabilities[3].item(), abs=1e-15)


def test_loss_uniform_scores():
    """|E|=4 均匀分数、ε=0.1 -> log 4"""
    model = _model(num_entities=4)
    scores = torch.full((4,), 0.25, dtype=torch.float64)
    assert model.loss(scores, 2, 0.1).item() == pytest.approx(math.log(4))


def test_loss_hand_case():
    """ε=0.3、|E|=3 的手算损失"""
    model = _model(num_entities=3)
    scores = torch.tensor([0.5, 0.3, 0.2], dtype=torch.float64)
    expected = -(0.7 * math.log(0.5) + 0.15 * math.log(0.3) + 0.15 * math.log(0.2))
    assert model.loss(scores, 0, 0.3).item() == pytest.approx(expected)


def test_loss_near_one_hot():
    """接近独热的分数与极小 ε 下损失趋于0"""
    model = _model(num_entities=3)
    scores = torch.tensor([1e-9, 1.0 - 2e-9, 1e-9], dtype=torch.float64)
    assert model.loss(scores, 1, 1e-9).item() < 1e-6


def test_loss_from_query_matches_loss_of_similarity():
    """log_softmax 路径与 loss(similarity) 一致"""
    model = _model()
    q = torch.rand(2, TINY.dim, dtype=torch.float64)
    target = torch.tensor([0, 5])
    assert torch.allclose(model.loss_from_query(q, target, 0.1), model.loss(model.similarity(q), target, 0.1))


def test_target_out_of_range():
    """目标实体越界"""
    model = _model(num_entities=3)
    with pytest.raises(TargetOutOfRangeError):
        model.loss(torch.full((3,), 1 / 3, dtype=torch.float64), 3, 0.1)


def test_invalid_inputs():
    """偶数长度序列、未写入的寄存器与形状错误均抛出 ModelInputError"""
    model = _model()
    with pytest.raises(ModelInputError):
        EncoderInput(tokens=torch.zeros(4, TINY.dim, dtype=torch.float64), mask_position=1)
    with pytest.raises(ModelInputError):
        EncoderInput(tokens=torch.zeros(3, TINY.dim, dtype=torch.float64), mask_position=3)
    with pytest.raises(ModelInputError):
        EncoderInput(tokens=torch.zeros(3, dtype=torch.float64), mask_position=1)
    spec = ProjectionSpec(relations=(0,), slots=(RegisterSlot(register_id=0), MaskSlot()), mask_position=2)
    with pytest.raises(ModelInputError):
        model.build_input(spec, registers=[])
    with pytest.raises(ModelInputError):
        model.encode(torch.zeros(1, 3, TINY.dim + 1, dtype=torch.float64), [2])


def test_projection_spec_shape_errors():
    """槽数与关系数不符、掩码缺失或错位时抛出 ModelInputError"""
    with pytest.raises(ModelInputError):
        ProjectionSpec(relations=(0, 1), slots=(AnchorSlot(entity=0), MaskSlot()), mask_position=2)
    with pytest.raises(ModelInputError):
        ProjectionSpec(relations=(0,), slots=(AnchorSlot(entity=0), AnchorSlot(entity=1)), mask_position=2)
    with pytest.raises(ModelInputError):
        ProjectionSpec(relations=(0,), slots=(MaskSlot(), AnchorSlot(entity=0)), mask_position=2)


def test_node_h_only_freezes_edge_biases():
    """NodeH-only：边偏置恒为0且不参与训练"""
    model = _model(ablation=AblationFlags(node_h_only=True))
    for bias in model.encoder.edge_biases:
        for parameter in (bias.query, bias.key, bias.value):
            assert not parameter.requires_grad
            assert torch.count_nonzero(parameter) == 0


def test_edge_h_only_ignores_relation_role_weights():
    """EdgeH-only：关系角色投影不影响输出"""
    model = _model(ablation=AblationFlags(edge_h_only=True))
    tokens = torch.rand(2, 5, TINY.dim, dtype=torch.float64)
    before = model.encode(tokens, [1, 3])
    with torch.no_grad():
        for layer in model.encoder.layers:
            layer.attention.w_query[1].add_(1.0)
            layer.attention.w_value[1].mul_(3.0)
    assert torch.equal(model.encode(tokens, [1, 3]), before)


def test_full_model_uses_relation_role_weights():
    """完整模型中关系角色投影会改变输出"""
    model = _model()
    tokens = torch.rand(1, 5, TINY.dim, dtype=torch.float64)
    before = model.encode(tokens, [1])
    with torch.no_grad():
        model.encoder.layers[0].attention.w_value[1].mul_(3.0)
    assert not torch.allclose(model.encode(tokens, [1]), before)


def test_ablations_change_output():
    """同一组权重与输入下，NodeH-only 与 EdgeH-only 的输出都不同于完整模型"""
    full = _model()
    tokens = torch.rand(2, 5, TINY.dim, dtype=torch.float64)
    expected = full.encode(tokens, [1, 3])

    edge_only = _model(ablation=AblationFlags(edge_h_only=True))
    edge_only.load_state_dict(full.state_dict())
    node_only = _model(ablation=AblationFlags(node_h_only=True))
    node_only.load_state_dict(full.state_dict())
    with torch.no_grad():
        for bias in node_only.encoder.edge_biases:
            for parameter in (bias.query, bias.key, bias.value):
                parameter.zero_()

    assert not torch.allclose(edge_only.encode(tokens, [1, 3]), expected)
    assert not torch.allclose(node_only.encode(tokens, [1, 3]), expected)
    assert not torch.allclose(node_only.encode(tokens, [1, 3]), edge_only.encode(tokens, [1, 3]))


def test_shared_edge_bias():
    """共享边偏置时只有一组偏置参数"""
    model = _model(config=EncoderConfig(dim=8, num_layers=3, num_heads=1, share_edge_bias=True))
    assert len(model.encoder.edge_biases) == 1
    assert model.encoder.bias_for(2) is model.encoder.edge_biases[0]


def test_heads_must_divide_dim():
    """dim 不能被头数整除时报错"""
    with pytest.raises(ValueError):
        EncoderConfig(dim=6, num_heads=4)
