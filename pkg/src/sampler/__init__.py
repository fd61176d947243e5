"""
查询采样：反向游走实例化与数据集生成
"""

from .sampler import GroundedQuery, QuerySampler, derive_seed, ground_answers, sample_query
from .dataset import DatasetManifest, generate_dataset, load_manifest, load_queries

__all__ = [
    'GroundedQuery', 'QuerySampler', 'derive_seed', 'ground_answers', 'sample_query',
    'DatasetManifest', 'generate_dataset', 'load_manifest', 'load_queries',
]
