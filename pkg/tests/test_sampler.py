import json
import random

import pytest

from src.executor import execute
from src.graph import Split, eval_scope
from src.graph.synthetic import SyntheticSpec, generate_graph
from src.query import ALL_TYPES, NEGATION_TYPES, Var, drop_negation, parse
from src.sampler import GroundedQuery, QuerySampler, derive_seed, ground_answers, sample_query
from src.utils.exceptions import ArityUnavailableError, SamplingExhaustedError

from conftest import random_graph


@pytest.fixture(scope="module")
def synthetic_graph():
    return generate_graph(SyntheticSpec(num_entities=120, num_relations=8, num_facts=1500, seed=4))


def test_easy_and_hard_answers(split_graph):
    """(A,r,B) 在训练集、(A,r,C) 在测试集 -> easy={B}, hard={C}"""
    ast = parse("(P 2 (f A r ?))", split_graph)
    easy, hard = ground_answers(ast, split_graph, "test")
    assert easy == {split_graph.resolve_entity("B")}
    assert hard == {split_graph.resolve_entity("C")}


def test_train_queries_have_no_hard_answers(split_graph):
    """训练划分上的查询 hard 为空"""
    ast = parse("(P 2 (f A r ?))", split_graph)
    easy, hard = ground_answers(ast, split_graph, "train")
    assert easy == {split_graph.resolve_entity("B")}
    assert hard == frozenset()


@pytest.mark.parametrize("query_type,arity", [("2cp", 3), ("3cp", 4)])
def test_cp_requires_qualified_facts(toy_graph, query_type, arity):
    """全二元图上请求 cp 类型 -> 元数错误；3cp 需要能放下三个变量的4元事实"""
    with pytest.raises(ArityUnavailableError, match=f"no facts of arity >= {arity}"):
        sample_query(query_type, toy_graph, "train", seed=1)


def test_sampling_is_deterministic(synthetic_graph):
    """相同 (类型, 图, 种子) 得到逐字节相同的记录"""
    for query_type in ("pi", "2cp", "inp"):
        first = QuerySampler(synthetic_graph).sample(query_type, "test", seed=99)
        second = QuerySampler(synthetic_graph).sample(query_type, "test", seed=99)
        assert json.dumps(first.to_record(), sort_keys=True) == json.dumps(second.to_record(), sort_keys=True)


def test_derive_seed():
    """派生种子只取决于坐标"""
    assert derive_seed(0, "train", "1p", 0, 0) == derive_seed(0, "train", "1p", 0, 0)
    assert derive_seed(0, "train", "1p", 0, 0) != derive_seed(0, "train", "1p", 1, 0)
    assert 0 <= derive_seed(7, "valid", "2in", 3, 1) < 2 ** 64


def test_record_restores_query(synthetic_graph):
    """JSON记录可恢复为同一查询"""
    query = QuerySampler(synthetic_graph).sample("3in", "valid", seed=5)
    restored = GroundedQuery.from_record(json.loads(json.dumps(query.to_record())))
    assert restored == query


@pytest.mark.parametrize("split", ["train", "valid", "test"])
def test_sampled_queries_are_sound(synthetic_graph, split):
    """采样查询的答案与符号执行一致，且满足非空、上限与否定非平凡约束"""
    sampler = QuerySampler(synthetic_graph)
    scope = eval_scope(split)
    for query_type in ALL_TYPES:
        try:
            query = sampler.sample(query_type, split, seed=derive_seed(1, split, query_type.value))
        except SamplingExhaustedError:
            continue
        easy = execute(query.ast, synthetic_graph, "train")
        full = execute(query.ast, synthetic_graph, scope)
        assert set(query.easy_answers) == easy
        assert query.answers == full
        assert not set(query.easy_answers) & set(query.hard_answers)
        assert len(query.answers) <= sampler.answer_cap
        if split == "train":
            assert query.easy_answers and not query.hard_answers
        else:
            assert query.hard_answers
        if query_type in NEGATION_TYPES:
            assert full < execute(drop_negation(query.ast), synthetic_graph, scope)


def test_most_types_sample_on_random_graph():
    """随机小图上每种类型都能采样到训练查询"""
    graph = random_graph(random.Random(2), num_entities=40, num_relations=5, num_facts=400, max_arity=4)
    sampler = QuerySampler(graph)
    for query_type in ALL_TYPES:
        successes = 0
        for seed in range(20):
            try:
                sampler.sample(query_type, Split.TRAIN, seed)
                successes += 1
            except SamplingExhaustedError:
                pass
        assert successes > 0, query_type.value


def test_answer_cap_rejects_broad_queries(toy_graph):
    """答案数超过上限的查询被拒绝"""
    sampler = QuerySampler(toy_graph, retry_budget=4, answer_cap=0)
    with pytest.raises(SamplingExhaustedError):
        sampler.sample("1p", "train", seed=0)


@pytest.mark.parametrize("graph_seed", range(5))
def test_negation_types_sample_on_random_graphs(graph_seed):
    """否定分支从正分支的答案反向实例化：随机图上每种否定类型都能采样，且答案被否定排除"""
    graph = random_graph(random.Random(graph_seed), num_entities=50, num_relations=5, num_facts=300, max_arity=5)
    sampler = QuerySampler(graph)
    scope = eval_scope(Split.TRAIN)
    for query_type in NEGATION_TYPES:
        sampled = 0
        for seed in range(5):
            try:
                query = sampler.sample(query_type, Split.TRAIN, seed)
            except SamplingExhaustedError:
                continue
            sampled += 1
            assert execute(query.ast, graph, scope) < execute(drop_negation(query.ast), graph, scope)
        assert sampled > 0, query_type.value


def test_merge_types_sample_with_distinct_variables(synthetic_graph):
    """2cp / 3cp 采样结果是一个带 2 / 3 个变量槽的多元投影"""
    for query_type, num_vars in (("2cp", 2), ("3cp", 3)):
        query = QuerySampler(synthetic_graph).sample(query_type, "test", seed=7)
        slots = query.ast.entities
        variables = [i for i, slot in enumerate(slots, start=1) if isinstance(slot, Var)]
        assert len(variables) == num_vars
        assert max(variables + [query.ast.target_position]) >= 3
