import hashlib
import json
from collections import Counter, defaultdict
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple, Union

from ..utils.exceptions import UnknownLabelError
from .facts import FactKey, NAryFact, PatternKey, hole_position, pattern_key, sequence_of, with_hole


class Split(str, Enum):
    """数据划分"""
    TRAIN = "train"
    VALID = "valid"
    TEST = "test"


ALL_SPLITS: Tuple[Split, ...] = (Split.TRAIN, Split.VALID, Split.TEST)

ScopeLike = Union[str, Split, Iterable[Union[str, Split]]]


def normalize_scope(scope: ScopeLike) -> FrozenSet[Split]:
    """把 'train' / ['train','valid'] / 'train,valid' 统一为 Split 集合"""
    if isinstance(scope, Split):
        return frozenset((scope,))
    if isinstance(scope, str):
        scope = [part.strip() for part in scope.split(',') if part.strip()]
    return frozenset(Split(part) for part in scope)


def eval_scope(split: Union[str, Split]) -> FrozenSet[Split]:
    """某划分上查询的评估范围：train -> {train}; valid -> {train,valid}; test -> 全部"""
    split = Split(split)
    return frozenset(ALL_SPLITS[:ALL_SPLITS.index(split) + 1])


class SymbolTable:
    """标签与连续整数id之间的双向映射"""

    def __init__(self, labels: Sequence[str] = ()):
        self._labels: List[str] = []
        self._ids: Dict[str, int] = {}
        for label in labels:
            self.intern(label)

    def intern(self, label: str) -> Tuple[int, bool]:
        """返回 (id, 是否新建)"""
        existing = self._ids.get(label)
        if existing is not None:
            return existing, False
        new_id = len(self._labels)
        self._labels.append(label)
        self._ids[label] = new_id
        return new_id, True

    def lookup(self, label: str) -> int:
        """查询已有标签，未知标签报错"""
        try:
            return self._ids[label]
        except KeyError:
            raise UnknownLabelError(f"未知标签: {label}")

    def label(self, symbol_id: int) -> str:
        return self._labels[symbol_id]

    @property
    def labels(self) -> List[str]:
        return list(self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, label: str) -> bool:
        return label in self._ids


class HyperGraph:
    """超关系知识图谱：符号表、按划分存储的事实与模式索引"""

    def __init__(self):
        self.entities = SymbolTable()
        self.relations = SymbolTable()
        self._facts: Dict[Split, List[NAryFact]] = {split: [] for split in ALL_SPLITS}
        self._keys: Dict[FactKey, Split] = {}
        self._index_cache: Dict[FrozenSet[Split], Dict[PatternKey, FrozenSet[int]]] = {}
        self._key_cache: Dict[FrozenSet[Split], FrozenSet[FactKey]] = {}
        self.duplicates = 0
        self.reflexive_qualifiers = 0

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    def add_fact(self, fact: NAryFact, split: Union[str, Split]) -> bool:
        """追加事实；重复事实跳过并计数，返回是否新增"""
        split = Split(split)
        key = fact.key()
        if key in self._keys:
            self.duplicates += 1
            return False
        self._keys[key] = split
        self._facts[split].append(fact)
        self.reflexive_qualifiers += sum(1 for _, value in fact.qualifiers if value == fact.subject)
        self._index_cache.clear()
        self._key_cache.clear()
        return True

    def facts(self, scope: ScopeLike) -> List[NAryFact]:
        """范围内的事实（按 train/valid/test 顺序）"""
        scope = normalize_scope(scope)
        result: List[NAryFact] = []
        for split in ALL_SPLITS:
            if split in scope:
                result.extend(self._facts[split])
        return result

    def split_of(self, fact: NAryFact) -> Split:
        return self._keys[fact.key()]

    def fact_keys(self, scope: ScopeLike) -> FrozenSet[FactKey]:
        """范围内所有事实的去重键集合"""
        scope = normalize_scope(scope)
        if scope not in self._key_cache:
            self._key_cache[scope] = frozenset(fact.key() for fact in self.facts(scope))
        return self._key_cache[scope]

    def pattern_index(self, scope: ScopeLike) -> Dict[PatternKey, FrozenSet[int]]:
        """构建（并缓存）范围内的模式索引：带空位序列 -> 实体集合"""
        scope = normalize_scope(scope)
        cached = self._index_cache.get(scope)
        if cached is not None:
            return cached
        index: Dict[PatternKey, set] = defaultdict(set)
        for fact in self.facts(scope):
            for position, entity in enumerate(fact.entities, start=1):
                index[pattern_key(with_hole(fact, position))].add(entity)
        frozen = {key: frozenset(values) for key, values in index.items()}
        self._index_cache[scope] = frozen
        return frozen

    def match_pattern(self, scope: ScopeLike, pattern: Sequence[int]) -> FrozenSet[int]:
        """填入空位后落在范围内的实体集合"""
        hole_position(pattern)
        return self.pattern_index(scope).get(pattern_key(pattern), frozenset())

    def resolve_entity(self, label: str) -> int:
        return self.entities.lookup(label)

    def resolve_relation(self, label: str) -> int:
        return self.relations.lookup(label)

    def stats(self) -> Dict:
        """划分统计、元数分布、重复与自反限定符计数"""
        arity = Counter(fact.arity for split in ALL_SPLITS for fact in self._facts[split])
        return {
            "entities": self.num_entities,
            "relations": self.num_relations,
            "facts": {split.value: len(self._facts[split]) for split in ALL_SPLITS},
            "arity": {str(n): count for n, count in sorted(arity.items())},
            "duplicates": self.duplicates,
            "reflexive_qualifiers": self.reflexive_qualifiers,
        }

    def digest(self) -> str:
        """图内容的SHA-256摘要（用于数据集清单）"""
        payload = {
            "entities": self.entities.labels,
            "relations": self.relations.labels,
            "facts": {
                split.value: [list(sequence_of(fact)) for fact in self._facts[split]]
                for split in ALL_SPLITS
            },
        }
        encoded = json.dumps(payload, separators=(',', ':'), ensure_ascii=False).encode('utf-8')
        return hashlib.sha256(encoded).hexdigest()


def match_pattern(graph: HyperGraph, scope: ScopeLike, pattern: Sequence[int]) -> FrozenSet[int]:
    """模块级入口，等价于 graph.match_pattern"""
    return graph.match_pattern(scope, pattern)
