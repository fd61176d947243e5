"""过滤排名评估与逐变量检视"""

import logging
from typing import Callable, Collection, Dict, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import torch
from pydantic import BaseModel, Field
from tqdm import tqdm

from ..graph.store import HyperGraph, Split
from ..logic import LogicKind
from ..model.batching import LogicLike, run_step_program
from ..model.nqe import NQEModel
from ..query.compiler import StepProgram, compile_query, register_nodes
from ..query.shapes import ALL_TYPES, EPFO_TYPES, NEGATION_TYPES, QueryType
from ..sampler.sampler import GroundedQuery, ground_answers
from ..utils.exceptions import EmptyDatasetError
from .metrics import HITS_AT, average_metrics, query_metrics, rank_filtered

logger = logging.getLogger(__name__)

ScoreFn = Callable[[Sequence[GroundedQuery]], np.ndarray]
RegisterAnswers = Tuple[Collection[int], Collection[int]]


class TypeMetrics(BaseModel):
    mrr: float
    hits: Dict[str, float]
    queries: int


class EvalReport(BaseModel):
    """按类型的 MRR / Hits@K 与 EPFO、否定两组的宏平均"""
    per_type: Dict[str, TypeMetrics] = Field(default_factory=dict)
    avg_p: Optional[float] = None
    avg_n: Optional[float] = None
    num_queries: int = 0
    missing_types: List[str] = Field(default_factory=list)
    ranked: Literal["hard", "all"] = "hard"

    def mrr_table(self) -> Dict[str, float]:
        return {query_type: metrics.mrr for query_type, metrics in self.per_type.items()}


def _group_average(per_type: Dict[str, TypeMetrics], group: Sequence[QueryType], missing: List[str]) -> Optional[float]:
    values = []
    for query_type in group:
        if query_type.value in per_type:
            values.append(per_type[query_type.value].mrr)
        else:
            missing.append(query_type.value)
    return float(np.mean(values)) if values else None


def evaluate_scores(
    queries: Sequence[GroundedQuery],
    score_fn: ScoreFn,
    ranked: Literal["hard", "all"] = "hard",
    batch_size: int = 256,
    progress: bool = False,
) -> EvalReport:
    """score_fn 对一批查询返回 (B, |E|) 分数；每个被排序的答案都在 easy ∪ hard 上过滤"""
    rows: Dict[str, List[Dict[str, float]]] = {}
    counted = 0
    chunks = range(0, len(queries), batch_size)
    for start in tqdm(chunks, desc="eval", disable=not progress):
        batch = list(queries[start:start + batch_size])
        scores = np.asarray(score_fn(batch), dtype=np.float64)
        for query, row in zip(batch, scores):
            targets = query.hard_answers if ranked == "hard" else sorted(query.answers)
            if not targets:
                continue
            known = query.answers
            ranks = [rank_filtered(row, answer, known) for answer in targets]
            rows.setdefault(query.type.value, []).append(query_metrics(ranks))
            counted += 1
    if counted == 0:
        raise EmptyDatasetError("没有可评估的查询（全部查询的待排序答案为空）")

    per_type = {}
    for query_type in ALL_TYPES:
        if query_type.value not in rows:
            continue
        averaged = average_metrics(rows[query_type.value])
        per_type[query_type.value] = TypeMetrics(
            mrr=averaged["mrr"],
            hits={str(k): averaged[f"hits@{k}"] for k in HITS_AT},
            queries=len(rows[query_type.value]),
        )
    missing: List[str] = []
    avg_p = _group_average(per_type, EPFO_TYPES, missing)
    avg_n = _group_average(per_type, NEGATION_TYPES, missing)
    if missing:
        logger.warning("数据集中缺少类型 %s，已从平均值中略去", ", ".join(missing))
    return EvalReport(
        per_type=per_type, avg_p=avg_p, avg_n=avg_n, num_queries=counted, missing_types=missing, ranked=ranked
    )


def model_score_fn(model: NQEModel, logic: LogicLike = LogicKind.PRODUCT) -> ScoreFn:
    programs: Dict[int, StepProgram] = {}

    def score(batch: Sequence[GroundedQuery]) -> np.ndarray:
        compiled = [programs.setdefault(id(query), compile_query(query.ast)) for query in batch]
        with torch.no_grad():
            targets = run_step_program(model, compiled, logic).targets
            return model.similarity(targets).numpy()

    return score


def oracle_score_fn(num_entities: int) -> ScoreFn:
    """符号答案作为“模型”：答案得1分，其余0分"""
    def score(batch: Sequence[GroundedQuery]) -> np.ndarray:
        scores = np.zeros((len(batch), num_entities))
        for row, query in enumerate(batch):
            scores[row, list(query.answers)] = 1.0
        return scores

    return score


def evaluate(
    model: NQEModel,
    queries: Sequence[GroundedQuery],
    logic: LogicLike = LogicKind.PRODUCT,
    ranked: Literal["hard", "all"] = "hard",
    batch_size: int = 256,
    progress: bool = False,
) -> EvalReport:
    model.eval()
    return evaluate_scores(queries, model_score_fn(model, logic), ranked, batch_size, progress)


class InspectionRow(BaseModel):
    rank: int
    entity: int
    label: str
    probability: float
    tag: Optional[Literal["easy", "hard", "wrong"]] = None


class InspectionBlock(BaseModel):
    """一个变量寄存器的 Top-N 列表与阈值答案集"""
    name: str
    register_id: int
    rows: List[InspectionRow]
    thresholded: List[str]
    probability_sum: float


def variable_registers(program: StepProgram) -> List[int]:
    """作为投影输入的寄存器（约束变量），按步骤顺序"""
    seen: List[int] = []
    for step in program.steps:
        if step.proj is None:
            continue
        for register in step.proj.registers:
            if register not in seen:
                seen.append(register)
    return sorted(seen)


def register_answers(ast, graph: HyperGraph, split: Union[str, Split]) -> Dict[int, RegisterAnswers]:
    """约束变量与目标寄存器各自子查询的 (easy, hard) 答案，供检视时标注"""
    program = compile_query(ast)
    nodes = register_nodes(ast)
    wanted = variable_registers(program) + [program.target]
    return {register: ground_answers(nodes[register], graph, split) for register in wanted}


def inspect_program(
    model: NQEModel,
    program: StepProgram,
    logic: LogicLike = LogicKind.PRODUCT,
    top: int = 10,
    threshold: float = 0.5,
    labels: Optional[Sequence[str]] = None,
    answers: Optional[Mapping[int, RegisterAnswers]] = None,
) -> List[InspectionBlock]:
    """V1..Vk 与 V_tar 各一块；阈值答案为概率严格大于 threshold 的实体

    answers 按寄存器给出 (easy, hard)；给出的块逐行标注 easy / hard / wrong。
    """
    answers = answers or {}
    model.eval()
    with torch.no_grad():
        registers = run_step_program(model, [program], logic).registers[0]
        names = [(f"V{i}", register) for i, register in enumerate(variable_registers(program), start=1)]
        names.append(("V_tar", program.target))

        blocks = []
        for name, register in names:
            probabilities = model.similarity(registers[register]).numpy()
            # 稳定排序：概率相同时实体id小者在前
            order = np.argsort(-probabilities, kind='stable')[:top]
            easy_set, hard_set = (set(group) for group in answers.get(register, ((), ())))
            rows = []
            for rank, entity in enumerate(order, start=1):
                entity = int(entity)
                tag = None
                if easy_set or hard_set:
                    tag = "easy" if entity in easy_set else "hard" if entity in hard_set else "wrong"
                rows.append(InspectionRow(
                    rank=rank,
                    entity=entity,
                    label=labels[entity] if labels else str(entity),
                    probability=float(probabilities[entity]),
                    tag=tag,
                ))
            chosen = np.nonzero(probabilities > threshold)[0]
            blocks.append(InspectionBlock(
                name=name,
                register_id=register,
                rows=rows,
                thresholded=[labels[i] if labels else str(i) for i in chosen.tolist()],
                probability_sum=float(probabilities.sum()),
            ))
    return blocks
