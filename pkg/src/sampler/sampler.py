"""从图中反向游走实例化规范形状，生成带 easy/hard 答案的查询"""

import hashlib
import logging
import random
from collections import defaultdict
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict

from ..executor.symbolic import AnswerSet, execute
from ..graph.facts import NAryFact
from ..graph.store import ALL_SPLITS, HyperGraph, Split, eval_scope
from ..query.ast import (
    And, Anchor, Not, Or, QueryNode, Target, Var, ast_from_dict, drop_negation, has_negation,
    iter_postorder, projection,
)
from ..query.serialize import query_record
from ..query.shapes import CP_TYPES, SHAPES, QueryType
from ..utils.exceptions import ArityUnavailableError, SamplingExhaustedError

logger = logging.getLogger(__name__)

RETRY_BUDGET = 128
ANSWER_CAP = 1000
TRAIN_SCOPE = frozenset((Split.TRAIN,))


class GroundedQuery(BaseModel):
    """实例化的查询及其 easy/hard 答案"""
    model_config = ConfigDict(frozen=True)

    type: QueryType
    split: Split
    ast: QueryNode
    easy_answers: Tuple[int, ...]
    hard_answers: Tuple[int, ...]
    seed: int

    @property
    def answers(self) -> FrozenSet[int]:
        return frozenset(self.easy_answers) | frozenset(self.hard_answers)

    def to_record(self) -> dict:
        record = query_record(self.type, self.ast)
        record.update({
            "split": self.split.value,
            "easy": list(self.easy_answers),
            "hard": list(self.hard_answers),
            "seed": self.seed,
        })
        return record

    @classmethod
    def from_record(cls, record: dict) -> "GroundedQuery":
        return cls(
            type=QueryType(record["type"]),
            split=Split(record.get("split", Split.TEST.value)),
            ast=ast_from_dict(record["ast"]),
            easy_answers=tuple(record["easy"]),
            hard_answers=tuple(record["hard"]),
            seed=record["seed"],
        )


class _Reject(Exception):
    """本次游走失败，换一次重试"""


def derive_seed(*parts) -> int:
    """由全局种子与条目坐标派生64位种子，与生成顺序无关"""
    digest = hashlib.sha256(":".join(str(part) for part in parts).encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'little')


def ground_answers(ast, graph: HyperGraph, split: Union[str, Split]) -> Tuple[AnswerSet, AnswerSet]:
    """easy = 训练范围上的答案；hard = 评估范围答案减去 easy（训练查询的 hard 为空）"""
    split = Split(split)
    easy = execute(ast, graph, TRAIN_SCOPE)
    if split == Split.TRAIN:
        return easy, frozenset()
    full = execute(ast, graph, eval_scope(split))
    return easy, full - easy


class _Walker:
    """某一范围内的事实与实体出现位置索引"""

    def __init__(self, graph: HyperGraph, scope: FrozenSet[Split]):
        self.facts: List[NAryFact] = graph.facts(scope)
        self.occurrences: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
        for index, fact in enumerate(self.facts):
            for position, entity in enumerate(fact.entities, start=1):
                self.occurrences[entity].append((index, position))


class QuerySampler:
    """在一张图上重复采样查询；缓存游走索引"""

    def __init__(self, graph: HyperGraph, retry_budget: int = RETRY_BUDGET, answer_cap: int = ANSWER_CAP):
        self.graph = graph
        self.retry_budget = retry_budget
        self.answer_cap = answer_cap
        self._walkers: Dict[FrozenSet[Split], _Walker] = {}

    def walker(self, scope: FrozenSet[Split]) -> _Walker:
        if scope not in self._walkers:
            self._walkers[scope] = _Walker(self.graph, scope)
        return self._walkers[scope]

    def warm_up(self, splits=ALL_SPLITS):
        """预先构建索引，供多线程采样共享"""
        for split in splits:
            scope = eval_scope(split)
            self.walker(scope)
            self.graph.pattern_index(scope)
        self.graph.pattern_index(TRAIN_SCOPE)

    def require_arity(self, query_type, split: Union[str, Split]) -> None:
        """cp 类型要求评估范围内存在能容纳全部变量输入的多元事实（2cp ≥ 3 元，3cp ≥ 4 元）"""
        query_type = QueryType(query_type)
        if query_type not in CP_TYPES:
            return
        needed = merge_arity(query_type)
        if not any(fact.arity >= needed for fact in self.graph.facts(eval_scope(split))):
            raise ArityUnavailableError(f"{query_type.value}: no facts of arity >= {needed}")

    def sample(self, query_type, split: Union[str, Split], seed: int) -> GroundedQuery:
        """采样一条查询；重试预算耗尽时抛出 SamplingExhaustedError"""
        query_type = QueryType(query_type)
        split = Split(split)
        scope = eval_scope(split)
        self.require_arity(query_type, split)

        starts = self.graph.facts(split)
        if query_type in CP_TYPES:
            starts = [fact for fact in starts if fact.arity >= merge_arity(query_type)]
        if not starts:
            raise SamplingExhaustedError(f"{split.value} 划分中没有可用的起始事实")

        rng = random.Random(seed)
        walker = self.walker(scope)
        for _ in range(self.retry_budget):
            try:
                ast, _ = self._ground(SHAPES[query_type], None, rng.choice(starts), rng, walker)
                easy, hard = self._check(ast, split)
            except _Reject:
                continue
            return GroundedQuery(
                type=query_type,
                split=split,
                ast=ast,
                easy_answers=tuple(sorted(easy)),
                hard_answers=tuple(sorted(hard)),
                seed=seed,
            )
        raise SamplingExhaustedError(
            f"{query_type.value}/{split.value} 在 {self.retry_budget} 次重试后仍未采样成功 (seed={seed})"
        )

    def _check(self, ast, split: Split) -> Tuple[AnswerSet, AnswerSet]:
        for node in iter_postorder(ast):
            if isinstance(node, (And, Or)) and len(set(node.children)) != len(node.children):
                raise _Reject()
        easy, hard = ground_answers(ast, self.graph, split)
        answers = easy | hard
        if split == Split.TRAIN and not easy:
            raise _Reject()
        if split != Split.TRAIN and not hard:
            raise _Reject()
        if len(answers) > self.answer_cap:
            raise _Reject()
        if has_negation(ast):
            scope = eval_scope(split)
            full = execute(ast, self.graph, scope)
            relaxed = execute(drop_negation(ast), self.graph, scope)
            # 去掉否定分支后答案必须严格变多，否则否定是平凡满足的
            if not full < relaxed:
                raise _Reject()
        return easy, hard

    def _ground(self, template, answer: Optional[int], start: Optional[NAryFact],
                rng: random.Random, walker: _Walker):
        """按模板自顶向下实例化；返回 (节点, 该节点的答案实体)"""
        kind, payload = template
        if kind == "p":
            return self._ground_projection(payload, answer, start, rng, walker)
        if kind in ("and", "or"):
            children: List = [None] * len(payload)
            order = sorted(range(len(payload)), key=lambda i: payload[i][0] == "not")
            for i in order:
                children[i], result = self._ground(payload[i], answer, start, rng, walker)
                if answer is None:
                    answer = result
                start = None
            node_type = And if kind == "and" else Or
            return node_type(children=tuple(children)), answer
        # 否定分支同样从正分支的答案反向实例化，该答案因此被否定排除
        if answer is None:
            raise _Reject()
        child, _ = self._ground(payload, answer, None, rng, walker)
        return Not(child=child), answer

    def _ground_projection(self, child_templates: tuple, answer: Optional[int], start: Optional[NAryFact],
                           rng: random.Random, walker: _Walker):
        num_vars = len(child_templates)
        min_arity = max(2, num_vars + 1)

        if start is not None and answer is None:
            if start.arity < min_arity:
                raise _Reject()
            fact = start
            target = rng.randint(1, fact.arity)
        else:
            choices = [
                (index, position) for index, position in walker.occurrences.get(answer, [])
                if walker.facts[index].arity >= min_arity
            ]
            if not choices:
                raise _Reject()
            index, target = rng.choice(choices)
            fact = walker.facts[index]

        var_positions = choose_var_positions(fact.arity, target, num_vars, rng)
        slots = []
        for position, entity in enumerate(fact.entities, start=1):
            if position == target:
                slots.append(Target())
            elif position in var_positions:
                slots.append(None)
            else:
                slots.append(Anchor(entity=entity))
        for child_template, position in zip(child_templates, var_positions):
            child, _ = self._ground(child_template, fact.entity_at(position), None, rng, walker)
            slots[position - 1] = Var(child=child)
        return projection(fact.relations, slots), fact.entity_at(target)


def merge_arity(query_type) -> int:
    """汇合投影所需的最小事实元数：变量输入个数 + 1"""
    _, children = SHAPES[QueryType(query_type)]
    return max(2, len(children) + 1)


def choose_var_positions(arity: int, target: int, num_vars: int, rng: random.Random) -> List[int]:
    """在目标之外挑选变量输入位置（升序）；多变量时至少一个变量或目标落在限定符值位置"""
    others = [p for p in range(1, arity + 1) if p != target]
    if num_vars == 0:
        return []
    if num_vars == 1:
        return [rng.choice(others)]
    if target >= 3:
        return sorted(rng.sample(others, num_vars))
    first = rng.choice([p for p in others if p >= 3])
    rest = rng.sample([p for p in others if p != first], num_vars - 1)
    return sorted([first] + rest)


def sample_query(query_type, graph: HyperGraph, split: Union[str, Split], seed: int) -> GroundedQuery:
    """采样单条查询（模块级入口）"""
    return QuerySampler(graph).sample(query_type, split, seed)
