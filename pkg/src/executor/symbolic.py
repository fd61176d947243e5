import itertools
from typing import Dict, FrozenSet

from ..graph.facts import HOLE, sequence_index
from ..graph.store import HyperGraph, ScopeLike, normalize_scope
from ..query.ast import And, Anchor, Not, Or, Projection, Target, Var

AnswerSet = FrozenSet[int]


def execute(ast, graph: HyperGraph, scope: ScopeLike) -> AnswerSet:
    """集合语义执行：投影为模式匹配的并，合取为交，析取为并，否定为对全体实体取补"""
    scope = normalize_scope(scope)
    universe = frozenset(range(graph.num_entities))
    cache: Dict[int, AnswerSet] = {}

    def run(node) -> AnswerSet:
        cached = cache.get(id(node))
        if cached is not None:
            return cached
        if isinstance(node, Projection):
            result = _project(node)
        elif isinstance(node, And):
            result = frozenset.intersection(*(run(child) for child in node.children))
        elif isinstance(node, Or):
            result = frozenset.union(*(run(child) for child in node.children))
        elif isinstance(node, Not):
            result = universe - run(node.child)
        else:
            raise TypeError(type(node).__name__)
        cache[id(node)] = result
        return result

    def _project(node: Projection) -> AnswerSet:
        pattern = [HOLE] * (2 * node.arity - 1)
        for i, relation in enumerate(node.relations):
            pattern[2 * i + 1] = relation
        var_slots = []
        for position, slot in enumerate(node.entities, start=1):
            if isinstance(slot, Anchor):
                pattern[sequence_index(position)] = slot.entity
            elif isinstance(slot, Var):
                var_slots.append((sequence_index(position), run(slot.child)))
            elif isinstance(slot, Target):
                pattern[sequence_index(position)] = HOLE
        if any(not values for _, values in var_slots):
            return frozenset()

        answers = set()
        # 多个变量槽取输入集合的笛卡尔积
        for combination in itertools.product(*(sorted(values) for _, values in var_slots)):
            for (index, _), entity in zip(var_slots, combination):
                pattern[index] = entity
            answers |= graph.match_pattern(scope, pattern)
        return frozenset(answers)

    return run(ast)
