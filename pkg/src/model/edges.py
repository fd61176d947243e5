"""异构序列中元素之间的14种边类型"""

from enum import IntEnum
from functools import lru_cache

import torch

ENTITY_ROLE = 0
RELATION_ROLE = 1


class EdgeType(IntEnum):
    SELF = 0
    S_R = 1
    S_O = 2
    R_O = 3
    S_A = 4
    S_V = 5
    R_A = 6
    R_V = 7
    O_A = 8
    O_V = 9
    A_A = 10
    V_V = 11
    A_V_SAME = 12
    A_V_DIFF = 13


NUM_EDGE_TYPES = len(EdgeType)

_PAIR_TYPES = {
    frozenset("sr"): EdgeType.S_R,
    frozenset("so"): EdgeType.S_O,
    frozenset("ro"): EdgeType.R_O,
    frozenset("sa"): EdgeType.S_A,
    frozenset("sv"): EdgeType.S_V,
    frozenset("ra"): EdgeType.R_A,
    frozenset("rv"): EdgeType.R_V,
    frozenset("oa"): EdgeType.O_A,
    frozenset("ov"): EdgeType.O_V,
}


def element_role(index: int) -> str:
    """序列下标的元素角色：s r o 之后为交替的 a v"""
    if index < 3:
        return "sro"[index]
    return "a" if index % 2 == 1 else "v"


def qualifier_of(index: int) -> int:
    return (index - 3) // 2


def edge_type(i: int, j: int) -> EdgeType:
    if i == j:
        return EdgeType.SELF
    role_i, role_j = element_role(i), element_role(j)
    if role_i == role_j == "a":
        return EdgeType.A_A
    if role_i == role_j == "v":
        return EdgeType.V_V
    if {role_i, role_j} == {"a", "v"}:
        return EdgeType.A_V_SAME if qualifier_of(i) == qualifier_of(j) else EdgeType.A_V_DIFF
    return _PAIR_TYPES[frozenset((role_i, role_j))]


@lru_cache(maxsize=None)
def edge_type_matrix(arity: int) -> torch.Tensor:
    """(2n-1, 2n-1) 的边类型矩阵，对称"""
    length = 2 * arity - 1
    return torch.tensor(
        [[int(edge_type(i, j)) for j in range(length)] for i in range(length)], dtype=torch.long
    )


@lru_cache(maxsize=None)
def role_vector(arity: int) -> torch.Tensor:
    """节点角色：偶数下标为实体，奇数下标为关系"""
    return torch.tensor([ENTITY_ROLE if i % 2 == 0 else RELATION_ROLE for i in range(2 * arity - 1)],
                        dtype=torch.long)
