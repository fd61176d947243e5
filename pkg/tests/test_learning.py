import numpy as np
import pytest

from src.graph.synthetic import SyntheticSpec, generate_graph
from src.sampler import generate_dataset, load_queries
from src.training import build_train_config, evaluate, train


def random_mrr(queries, num_entities):
    """均匀随机打分下过滤排名的期望 MRR：候选数 N 时为 H_N / N"""
    values = []
    for query in queries:
        candidates = num_entities - len(query.answers) + 1
        values.append(np.sum(1.0 / np.arange(1, candidates + 1)) / candidates)
    return float(np.mean(values))


@pytest.mark.slow
def test_one_hop_training_transfers_to_logic(tmp_path):
    """只用 1p 训练：训练集 Hits@1 ≥ 0.9，留出的 2i / 2u 的 MRR 至少为随机排名的10倍"""
    graph = generate_graph(SyntheticSpec(num_entities=300, num_relations=12, num_facts=4000, seed=5))
    counts = {"train": {"1p": 3000}, "test": {"2i": 100, "2u": 100}}
    generate_dataset(graph, counts, seed=2, out_dir=str(tmp_path))
    train_queries = load_queries(str(tmp_path), "train")
    test_queries = load_queries(str(tmp_path), "test")

    config = build_train_config(
        "NQE-1p", dim=64, num_layers=1, ffn_dim=128, batch_size=64, learning_rate=0.005, epochs=80, seed=0,
    )
    result = train(graph, train_queries, config)
    assert result.loss_curve[-1] < result.loss_curve[0]

    fitted = evaluate(result.model, train_queries, ranked="all")
    assert fitted.per_type["1p"].hits["1"] >= 0.9

    held_out = evaluate(result.model, test_queries)
    for query_type in ("2i", "2u"):
        queries = [query for query in test_queries if query.type.value == query_type]
        baseline = random_mrr(queries, graph.num_entities)
        assert held_out.per_type[query_type].mrr >= 10 * baseline, query_type
