from typing import Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from ..utils.exceptions import PatternError

# 模式中的空位哨兵
HOLE = -1

Qualifier = Tuple[int, int]
FactKey = Tuple[int, int, int, Tuple[Qualifier, ...]]
PatternKey = Tuple[Tuple[int, int, int], int, Tuple[Qualifier, ...]]


class NAryFact(BaseModel):
    """N元事实：主三元组加限定符 (attribute, value) 对"""
    model_config = ConfigDict(frozen=True)

    subject: int = Field(..., ge=0)
    relation: int = Field(..., ge=0)
    object: int = Field(..., ge=0)
    qualifiers: Tuple[Qualifier, ...] = ()

    @property
    def arity(self) -> int:
        return 2 + len(self.qualifiers)

    @property
    def entities(self) -> Tuple[int, ...]:
        return (self.subject, self.object) + tuple(v for _, v in self.qualifiers)

    @property
    def relations(self) -> Tuple[int, ...]:
        return (self.relation,) + tuple(a for a, _ in self.qualifiers)

    def key(self) -> FactKey:
        """去重键：限定符按 (attribute, value) 排序"""
        return (self.subject, self.relation, self.object, tuple(sorted(self.qualifiers)))

    def entity_at(self, position: int) -> int:
        """按1起始的实体位置取实体"""
        return self.entities[position - 1]


def sequence_of(fact: NAryFact) -> Tuple[int, ...]:
    """事实的交替序列 [e1, r1, e2, r2, e3, ...]，长度 2n-1"""
    sequence = [fact.subject, fact.relation, fact.object]
    for attribute, value in fact.qualifiers:
        sequence.extend((attribute, value))
    return tuple(sequence)


def fact_from_sequence(sequence: Sequence[int]) -> NAryFact:
    """sequence_of 的逆"""
    if len(sequence) < 3 or len(sequence) % 2 == 0:
        raise PatternError(f"序列长度必须为奇数且不小于3: {len(sequence)}")
    qualifiers = tuple(
        (sequence[i], sequence[i + 1]) for i in range(3, len(sequence), 2)
    )
    return NAryFact(
        subject=sequence[0],
        relation=sequence[1],
        object=sequence[2],
        qualifiers=qualifiers,
    )


def entity_positions(length: int) -> range:
    """序列中实体所在的下标（0起始）"""
    return range(0, length, 2)


def sequence_index(position: int) -> int:
    """1起始的实体位置 -> 0起始的序列下标"""
    return 2 * (position - 1)


def hole_position(pattern: Sequence[int]) -> int:
    """校验模式恰有一个位于实体位置的空位，返回其1起始实体位置"""
    if len(pattern) < 3 or len(pattern) % 2 == 0:
        raise PatternError(f"模式长度必须为奇数且不小于3: {len(pattern)}")
    holes = [i for i, item in enumerate(pattern) if item == HOLE]
    if len(holes) != 1:
        raise PatternError(f"模式必须恰有一个空位，实际为 {len(holes)} 个")
    index = holes[0]
    if index % 2 == 1:
        raise PatternError(f"空位位于关系位置 {index + 1}")
    return index // 2 + 1


def pattern_key(pattern: Sequence[int]) -> PatternKey:
    """带空位序列的规范化键

    主三元组保持原位；空位若落在限定符值上，记录其属性；其余完整限定符排序。
    """
    main = (pattern[0], pattern[1], pattern[2])
    hole_attribute = HOLE
    qualifiers = []
    for i in range(3, len(pattern), 2):
        attribute, value = pattern[i], pattern[i + 1]
        if value == HOLE:
            hole_attribute = attribute
        else:
            qualifiers.append((attribute, value))
    return main, hole_attribute, tuple(sorted(qualifiers))


def with_hole(fact: NAryFact, position: int) -> Tuple[int, ...]:
    """把1起始实体位置替换为空位"""
    sequence = list(sequence_of(fact))
    sequence[sequence_index(position)] = HOLE
    return tuple(sequence)


def fill_hole(pattern: Sequence[int], entity: int, position: Optional[int] = None) -> NAryFact:
    """用实体填补空位，得到完整事实"""
    if position is None:
        position = hole_position(pattern)
    sequence = list(pattern)
    sequence[sequence_index(position)] = entity
    return fact_from_sequence(sequence)
