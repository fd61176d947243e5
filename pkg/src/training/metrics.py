from typing import Dict, Iterable, List, Sequence

import numpy as np

from ..utils.exceptions import DataError

HITS_AT = (1, 3, 10)


def _filter_mask(num_entities: int, known_answers: Iterable[int], candidate: int) -> np.ndarray:
    mask = np.ones(num_entities, dtype=bool)
    mask[list(known_answers)] = False
    mask[candidate] = False
    return mask


def rank_filtered(scores: Sequence[float], candidate: int, known_answers: Iterable[int]) -> float:
    """过滤其他正确答案后候选的名次（1起始），并列取平均名次"""
    known = set(known_answers)
    if candidate not in known:
        raise DataError(f"候选 {candidate} 不在已知答案集合中")
    scores = np.asarray(scores, dtype=np.float64)
    mask = _filter_mask(len(scores), known, candidate)
    value = scores[candidate]
    higher = int(np.count_nonzero((scores > value) & mask))
    ties = int(np.count_nonzero((scores == value) & mask))
    return 1.0 + higher + ties / 2.0


def rank_unfiltered(scores: Sequence[float], candidate: int) -> float:
    scores = np.asarray(scores, dtype=np.float64)
    value = scores[candidate]
    higher = int(np.count_nonzero(scores > value))
    ties = int(np.count_nonzero(scores == value)) - 1
    return 1.0 + higher + ties / 2.0


def query_metrics(ranks: Sequence[float]) -> Dict[str, float]:
    """单条查询的 MRR 与 Hits@K（对其各答案取平均）"""
    ranks = np.asarray(ranks, dtype=np.float64)
    if ranks.size == 0:
        raise DataError("没有可排序的答案")
    metrics = {"mrr": float(np.mean(1.0 / ranks))}
    for k in HITS_AT:
        metrics[f"hits@{k}"] = float(np.mean(ranks <= k))
    return metrics


def average_metrics(rows: List[Dict[str, float]]) -> Dict[str, float]:
    keys = rows[0].keys()
    return {key: float(np.mean([row[key] for row in rows])) for key in keys}
