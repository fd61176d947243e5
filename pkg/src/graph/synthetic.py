import json
import os
from typing import Dict

import numpy as np
from pydantic import BaseModel, Field

from .facts import NAryFact
from .store import ALL_SPLITS, HyperGraph, Split


class SyntheticSpec(BaseModel):
    """合成超关系图的生成参数"""
    num_entities: int = Field(200, ge=2)
    num_relations: int = Field(20, ge=1)
    num_facts: int = Field(2000, ge=1)
    num_clusters: int = Field(40, ge=1)
    qualifier_fraction: float = Field(0.35, ge=0.0, le=1.0)
    max_qualifiers: int = Field(3, ge=1)
    valid_fraction: float = Field(0.1, ge=0.0, lt=1.0)
    test_fraction: float = Field(0.1, ge=0.0, lt=1.0)
    seed: int = 0


def generate_graph(spec: SyntheticSpec) -> HyperGraph:
    """按潜在簇规则生成图：关系 r 把簇 c 的主语映射到簇 pi_r(c) 的宾语，
    限定符属性 a 同样映射到簇 pi_a(c)，因此留出的事实可以由训练事实推断。
    """
    rng = np.random.default_rng(spec.seed)
    clusters = min(spec.num_clusters, spec.num_entities)
    cluster_of = np.arange(spec.num_entities) % clusters
    members = [np.flatnonzero(cluster_of == c) for c in range(clusters)]
    mapping = np.stack([rng.permutation(clusters) for _ in range(spec.num_relations)])

    def pick(relation: int, subject: int) -> int:
        return int(rng.choice(members[mapping[relation, cluster_of[subject]]]))

    facts: Dict[tuple, NAryFact] = {}
    attempts = 0
    while len(facts) < spec.num_facts and attempts < spec.num_facts * 20:
        attempts += 1
        subject = int(rng.integers(spec.num_entities))
        relation = int(rng.integers(spec.num_relations))
        qualifiers = []
        if rng.random() < spec.qualifier_fraction:
            count = int(rng.integers(1, spec.max_qualifiers + 1))
            attributes = rng.choice(spec.num_relations, size=min(count, spec.num_relations), replace=False)
            qualifiers = [(int(a), pick(int(a), subject)) for a in attributes]
        fact = NAryFact(
            subject=subject,
            relation=relation,
            object=pick(relation, subject),
            qualifiers=tuple(qualifiers),
        )
        facts.setdefault(fact.key(), fact)

    ordered = list(facts.values())
    order = rng.permutation(len(ordered))
    n_valid = int(round(len(ordered) * spec.valid_fraction))
    n_test = int(round(len(ordered) * spec.test_fraction))
    n_train = len(ordered) - n_valid - n_test

    graph = HyperGraph()
    for i in range(spec.num_entities):
        graph.entities.intern(f"E{i}")
    for j in range(spec.num_relations):
        graph.relations.intern(f"R{j}")
    for rank, index in enumerate(order.tolist()):
        if rank < n_train:
            split = Split.TRAIN
        elif rank < n_train + n_valid:
            split = Split.VALID
        else:
            split = Split.TEST
        graph.add_fact(ordered[index], split)
    return graph


def write_jsonl(graph: HyperGraph, out_dir: str) -> Dict[str, str]:
    """按划分写出 JSON Lines 事实文件"""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    for split in ALL_SPLITS:
        path = os.path.join(out_dir, f"{split.value}.jsonl")
        with open(path, 'w', encoding='utf-8') as f:
            for fact in graph.facts(split):
                record = {
                    "s": graph.entities.label(fact.subject),
                    "r": graph.relations.label(fact.relation),
                    "o": graph.entities.label(fact.object),
                    "quals": [
                        [graph.relations.label(a), graph.entities.label(v)]
                        for a, v in fact.qualifiers
                    ],
                }
                f.write(json.dumps(record, ensure_ascii=False) + "\n")
        paths[split.value] = path
    return paths
