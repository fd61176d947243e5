"""训练循环：每个 (查询, 答案) 对为一个样本，混合类型批量执行"""

import logging
import math
from collections import defaultdict
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import torch
from pydantic import BaseModel, ConfigDict
from tqdm import tqdm

from ..graph.store import HyperGraph
from ..model.batching import batch_loss
from ..model.checkpoint import save_checkpoint
from ..model.nqe import NQEModel
from ..query.compiler import StepProgram, compile_query
from ..query.shapes import QueryType
from ..sampler.sampler import GroundedQuery
from ..utils.config import ensure_directories
from ..utils.exceptions import EmptyDatasetError, NumericalDivergenceError
from .config import TrainConfig

logger = logging.getLogger(__name__)


class TrainingExample(BaseModel):
    model_config = ConfigDict(frozen=True)

    query_type: QueryType
    program: StepProgram
    answer: int


class TrainResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: NQEModel
    loss_curve: List[float]
    epochs_run: int
    num_examples: int


def build_examples(queries: Sequence[GroundedQuery], train_types: Sequence[QueryType]) -> List[TrainingExample]:
    """按类型过滤；多答案查询展开为多个样本"""
    wanted = set(train_types)
    examples = []
    for query in queries:
        if query.type not in wanted:
            continue
        program = compile_query(query.ast)
        for answer in sorted(query.answers):
            examples.append(TrainingExample(query_type=query.type, program=program, answer=answer))
    return examples


def make_batches(examples: List[TrainingExample], batch_size: int, rng: np.random.Generator,
                 single_type: bool) -> List[List[TrainingExample]]:
    """混合类型批；single_type 时每批只含一种类型"""
    order = rng.permutation(len(examples))
    if not single_type:
        shuffled = [examples[i] for i in order]
        return [shuffled[i:i + batch_size] for i in range(0, len(shuffled), batch_size)]

    by_type: Dict[QueryType, List[TrainingExample]] = defaultdict(list)
    for i in order:
        by_type[examples[i].query_type].append(examples[i])
    batches = []
    for query_type in sorted(by_type, key=lambda t: t.value):
        bucket = by_type[query_type]
        batches.extend(bucket[i:i + batch_size] for i in range(0, len(bucket), batch_size))
    return [batches[i] for i in rng.permutation(len(batches))]


def _optimizer(model: NQEModel, config: TrainConfig) -> torch.optim.Optimizer:
    parameters = [parameter for parameter in model.parameters() if parameter.requires_grad]
    if config.optimizer == 'sgd':
        return torch.optim.SGD(parameters, lr=config.learning_rate)
    return torch.optim.Adam(parameters, lr=config.learning_rate, betas=config.adam_betas, eps=config.adam_eps)


def write_loss_curve(loss_curve: Sequence[float], path: str):
    ensure_directories(path)
    frame = pd.DataFrame({"epoch": range(1, len(loss_curve) + 1), "loss": list(loss_curve)})
    frame.to_csv(path, index=False, float_format='%.10g')


def train(
    graph: HyperGraph,
    queries: Sequence[GroundedQuery],
    config: TrainConfig,
    checkpoint_path: Optional[str] = None,
    loss_curve_path: Optional[str] = None,
    progress: bool = False,
) -> TrainResult:
    """训练 NQE 模型；单线程下给定种子结果逐位一致"""
    examples = build_examples(queries, config.train_types)
    if not examples:
        types = ", ".join(t.value for t in config.train_types)
        raise EmptyDatasetError(f"训练类型 [{types}] 下没有训练样本")

    torch.set_num_threads(config.threads)
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    model = NQEModel(graph.num_entities, graph.num_relations, config.encoder_config(), config.ablation)
    model.train()
    optimizer = _optimizer(model, config)
    logger.info("开始训练: %d 个样本, %d 轮, 批大小 %d", len(examples), config.epochs, config.batch_size)

    loss_curve: List[float] = []
    best = math.inf
    stale = 0
    for epoch in tqdm(range(1, config.epochs + 1), desc="train", disable=not progress):
        total = 0.0
        batches = make_batches(examples, config.batch_size, rng, single_type=config.ablation.unparalleled)
        for index, batch in enumerate(batches):
            optimizer.zero_grad()
            loss = batch_loss(
                model,
                [example.program for example in batch],
                [example.answer for example in batch],
                config.label_smoothing,
                config.logic,
                config.ablation,
            )
            if not torch.isfinite(loss):
                raise NumericalDivergenceError(
                    f"第 {epoch} 轮第 {index} 批损失非有限值 ({loss.item()})，"
                    f"学习率 {config.learning_rate}，批内类型 {sorted({e.query_type.value for e in batch})}"
                )
            loss.backward()
            optimizer.step()
            total += loss.item() * len(batch)

        epoch_loss = total / len(examples)
        loss_curve.append(epoch_loss)
        logger.info("epoch %d loss %.6f", epoch, epoch_loss)

        if config.patience is not None:
            if epoch_loss < best:
                best, stale = epoch_loss, 0
            else:
                stale += 1
                if stale >= config.patience:
                    logger.info("连续 %d 轮未改善，提前停止", stale)
                    break

    model.eval()
    if loss_curve_path:
        write_loss_curve(loss_curve, loss_curve_path)
    if checkpoint_path:
        save_checkpoint(
            model,
            checkpoint_path,
            logic=config.logic,
            entity_labels=graph.entities.labels,
            relation_labels=graph.relations.labels,
        )
        logger.info("检查点已保存: %s", checkpoint_path)
    return TrainResult(model=model, loss_curve=loss_curve, epochs_run=len(loss_curve), num_examples=len(examples))
