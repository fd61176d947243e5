import random
from typing import Dict, Iterable, Sequence, Tuple

import pytest

from src.graph import HyperGraph, NAryFact, Split


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="运行耗时较长的桌面规模测试")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 耗时较长，需 --runslow 才运行")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="需要 --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


LabelRow = Tuple  # (s, r, o) 或 (s, r, o, [(a, v), ...])


def build_graph(rows: Dict[str, Iterable[LabelRow]], entities: Sequence[str] = ()) -> HyperGraph:
    """按标签构造图；entities 可预先登记孤立实体"""
    graph = HyperGraph()
    for label in entities:
        graph.entities.intern(label)
    for split, facts in rows.items():
        for row in facts:
            subject, relation, obj = row[:3]
            qualifiers = row[3] if len(row) > 3 else []
            fact = NAryFact(
                subject=graph.entities.intern(subject)[0],
                relation=graph.relations.intern(relation)[0],
                object=graph.entities.intern(obj)[0],
                qualifiers=tuple(
                    (graph.relations.intern(a)[0], graph.entities.intern(v)[0]) for a, v in qualifiers
                ),
            )
            graph.add_fact(fact, Split(split))
    return graph


def random_graph(rng: random.Random, num_entities: int, num_relations: int, num_facts: int,
                 max_arity: int = 5) -> HyperGraph:
    """随机超关系图，事实随机分到三个划分"""
    graph = HyperGraph()
    for i in range(num_entities):
        graph.entities.intern(f"e{i}")
    for j in range(num_relations):
        graph.relations.intern(f"r{j}")
    splits = [Split.TRAIN] * 8 + [Split.VALID, Split.TEST]
    for _ in range(num_facts):
        arity = rng.randint(2, max_arity)
        fact = NAryFact(
            subject=rng.randrange(num_entities),
            relation=rng.randrange(num_relations),
            object=rng.randrange(num_entities),
            qualifiers=tuple(
                (rng.randrange(num_relations), rng.randrange(num_entities)) for _ in range(arity - 2)
            ),
        )
        graph.add_fact(fact, rng.choice(splits))
    return graph


@pytest.fixture
def toy_graph() -> HyperGraph:
    """{(A,r,B),(A,r,C),(D,r2,B)} 全在训练集"""
    return build_graph({"train": [("A", "r", "B"), ("A", "r", "C"), ("D", "r2", "B")]})


@pytest.fixture
def split_graph() -> HyperGraph:
    """(A,r,B) 在训练集，(A,r,C) 在测试集"""
    return build_graph({"train": [("A", "r", "B")], "test": [("A", "r", "C")]})


@pytest.fixture
def qualified_graph() -> HyperGraph:
    """带限定符的小图，覆盖三个划分"""
    return build_graph({
        "train": [
            ("Einstein", "educated_at", "ETH", [("degree", "BSc"), ("major", "Physics")]),
            ("Einstein", "educated_at", "UZH", [("degree", "PhD")]),
            ("Grossmann", "educated_at", "ETH", [("degree", "BSc"), ("major", "Math")]),
            ("Weyl", "educated_at", "Gottingen", [("degree", "PhD")]),
            ("ETH", "located_in", "Zurich"),
            ("UZH", "located_in", "Zurich"),
            ("Gottingen", "located_in", "Germany"),
            ("Zurich", "country", "Switzerland", [("since", "1848")]),
            ("Bern", "country", "Switzerland"),
            ("Einstein", "award", "Nobel", [("field", "Physics")]),
        ],
        "valid": [
            ("Grossmann", "educated_at", "UZH", [("degree", "PhD")]),
            ("Weyl", "award", "Lobachevsky", [("field", "Math")]),
        ],
        "test": [
            ("Weyl", "educated_at", "ETH", [("degree", "BSc"), ("major", "Math")]),
            ("Einstein", "award", "Copley", [("field", "Physics")]),
            ("Bern", "country", "Helvetic", [("since", "1848")]),
        ],
    })
