import pytest

from src.query import (
    ALL_TYPES, EPFO_TYPES, NEGATION_TYPES, And, Anchor, HopLayout, Not, Or, Projection,
    QueryType, Target, Var, canonical_ast, count_operators, default_layouts, has_negation,
)
from src.utils.exceptions import ShapeError


def _fill(query_type, layouts=None):
    layouts = layouts or default_layouts(query_type)
    anchors = list(range(sum(layout.num_anchors for layout in layouts)))
    relations = list(range(sum(layout.arity - 1 for layout in layouts)))
    return canonical_ast(query_type, anchors, relations, layouts)


def test_type_groups():
    """11种EPFO类型与5种否定类型"""
    assert len(EPFO_TYPES) == 11
    assert len(NEGATION_TYPES) == 5
    assert len(set(ALL_TYPES)) == 16


def test_union_shape():
    """2u -> 两个1p投影的析取"""
    node = canonical_ast("2u", anchors=[0, 1], relations=[5, 6])
    assert isinstance(node, Or)
    assert [child.entities[0] for child in node.children] == [Anchor(entity=0), Anchor(entity=1)]
    assert [child.relations for child in node.children] == [(5,), (6,)]


def test_three_in_shape():
    """3in -> 两个正投影与一个否定投影的合取"""
    node = _fill(QueryType.IN3)
    assert isinstance(node, And)
    assert [type(child) for child in node.children] == [Projection, Projection, Not]


def test_three_cp_shape():
    """3cp -> 三个子投影分别填入同一个4元投影的三个变量槽"""
    node = _fill(QueryType.CP3)
    assert isinstance(node, Projection)
    assert node.arity == 4
    variables = [slot for slot in node.entities if isinstance(slot, Var)]
    assert len(variables) == 3
    assert all(isinstance(var.child, Projection) and var.child.arity == 2 for var in variables)
    assert max(i for i, slot in enumerate(node.entities, start=1) if isinstance(slot, Var)) >= 3


def test_two_cp_shape():
    """2cp -> (?, r1, V1, a1, V2)"""
    node = _fill(QueryType.CP2)
    assert node.target_position == 1
    assert [type(slot) for slot in node.entities] == [Target, Var, Var]


@pytest.mark.parametrize("query_type", ALL_TYPES)
def test_negation_only_in_negation_types(query_type):
    """只有否定类型含 Not 节点"""
    assert has_negation(_fill(query_type)) == (query_type in NEGATION_TYPES)


def test_operator_counts():
    """各类型的算子数"""
    expected = {
        "1p": 1, "2p": 2, "3p": 3, "2i": 3, "3i": 4, "pi": 4, "ip": 4, "2u": 3, "up": 4,
        "2cp": 3, "3cp": 4, "2in": 4, "3in": 5, "inp": 5, "pin": 5, "pni": 5,
    }
    assert {t.value: count_operators(_fill(t)) for t in ALL_TYPES} == expected


def test_wrong_anchor_count():
    """锚点数量不符"""
    with pytest.raises(ShapeError):
        canonical_ast("2i", anchors=[0], relations=[0, 1])


def test_cp_merge_needs_qualified_fact():
    """两个变量输入加目标至少占3个实体位置，二元事实放不下"""
    with pytest.raises(ValueError):
        HopLayout(arity=2, target_position=1, var_positions=(2, 3))


def test_cp_layout_var_count_mismatch():
    """cp 汇合投影只给一个变量槽时布局不匹配"""
    layouts = [HopLayout(), HopLayout(), HopLayout(arity=3, target_position=3, var_positions=(1,))]
    with pytest.raises(ShapeError):
        _fill(QueryType.CP2, layouts)


def test_layout_rejects_shared_positions():
    """变量位置不能与目标重合"""
    with pytest.raises(ValueError):
        HopLayout(arity=3, target_position=2, var_positions=(2, 3))


def test_custom_cp_layout_targets_qualifier():
    """自定义 2cp 布局：目标在限定符值位置，变量在主宾语位置"""
    layouts = [HopLayout(), HopLayout(), HopLayout(arity=3, target_position=3, var_positions=(1, 2))]
    node = _fill(QueryType.CP2, layouts)
    assert [type(slot) for slot in node.entities] == [Var, Var, Target]


def test_custom_layout_moves_target():
    """自定义布局：目标位于限定符值位置的4元投影"""
    layouts = [HopLayout(arity=4, target_position=4)]
    node = _fill(QueryType.P1, layouts)
    assert node.arity == 4
    assert node.target_position == 4


@pytest.mark.parametrize("query_type,arity", [(QueryType.CP2, 3), (QueryType.CP3, 4)])
def test_cp_default_layouts(query_type, arity):
    """cp 默认布局：叶子为二元投影，汇合投影的元数为变量数加一"""
    layouts = default_layouts(query_type)
    assert [layout.arity for layout in layouts[:-1]] == [2] * (arity - 1)
    assert layouts[-1].arity == arity
    assert layouts[-1].var_positions == tuple(range(2, arity + 1))
