"""
训练与评估：混合类型批训练、过滤排名指标与变体矩阵
"""

from .config import TrainConfig
from .evaluator import (
    EvalReport, InspectionBlock, evaluate, evaluate_scores, inspect_program, model_score_fn, oracle_score_fn,
    register_answers,
)
from .metrics import query_metrics, rank_filtered, rank_unfiltered
from .trainer import TrainResult, build_examples, train, write_loss_curve
from .variants import VariantRegistry, build_train_config

__all__ = [
    'TrainConfig', 'EvalReport', 'InspectionBlock', 'evaluate', 'evaluate_scores', 'inspect_program',
    'model_score_fn', 'oracle_score_fn', 'register_answers', 'query_metrics', 'rank_filtered', 'rank_unfiltered',
    'TrainResult', 'build_examples', 'train', 'write_loss_curve', 'VariantRegistry', 'build_train_config',
]
