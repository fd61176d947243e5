"""独立的暴力求解器：逐个枚举变量赋值并直接检验公式，用作执行器的测试预言机"""

import itertools
from typing import Dict, Sequence, Tuple

from ..graph.store import HyperGraph, ScopeLike, normalize_scope
from ..query.ast import And, Anchor, Not, Or, Projection, Target, Var, count_bound_variables
from ..utils.exceptions import OracleGuardError
from .symbolic import AnswerSet

MAX_BOUND_VARIABLES = 3
MAX_ENTITIES = 200


def _fact_key(relations: Sequence[int], entities: Sequence[int]):
    qualifiers = tuple(sorted(zip(relations[1:], entities[2:])))
    return entities[0], relations[0], entities[1], qualifiers


def brute_force_execute(
    ast,
    graph: HyperGraph,
    scope: ScopeLike,
    max_bound: int = MAX_BOUND_VARIABLES,
    max_entities: int = MAX_ENTITIES,
) -> AnswerSet:
    """对 V? 的每个候选与约束变量的每种赋值检验公式；否定分支检验补全事实不成立"""
    bound = count_bound_variables(ast)
    if bound > max_bound:
        raise OracleGuardError(f"约束变量 {bound} 个，超过上限 {max_bound}")
    if graph.num_entities > max_entities:
        raise OracleGuardError(f"实体 {graph.num_entities} 个，超过上限 {max_entities}")

    facts = graph.fact_keys(normalize_scope(scope))
    entities = range(graph.num_entities)
    memo: Dict[Tuple[int, int], bool] = {}

    def holds(node, x: int) -> bool:
        key = (id(node), x)
        if key in memo:
            return memo[key]
        if isinstance(node, Projection):
            result = holds_projection(node, x)
        elif isinstance(node, And):
            result = all(holds(child, x) for child in node.children)
        elif isinstance(node, Or):
            result = any(holds(child, x) for child in node.children)
        elif isinstance(node, Not):
            result = not holds(node.child, x)
        else:
            raise TypeError(type(node).__name__)
        memo[key] = result
        return result

    def holds_projection(node: Projection, x: int) -> bool:
        var_slots = [i for i, slot in enumerate(node.entities) if isinstance(slot, Var)]
        for assignment in itertools.product(entities, repeat=len(var_slots)):
            values = dict(zip(var_slots, assignment))
            if not all(holds(node.entities[i].child, y) for i, y in values.items()):
                continue
            filled = []
            for i, slot in enumerate(node.entities):
                if isinstance(slot, Anchor):
                    filled.append(slot.entity)
                elif isinstance(slot, Target):
                    filled.append(x)
                else:
                    filled.append(values[i])
            if _fact_key(node.relations, filled) in facts:
                return True
        return False

    return frozenset(x for x in entities if holds(ast, x))
