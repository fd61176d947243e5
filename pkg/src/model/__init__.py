"""
神经编码器：模糊空间嵌入、双重异构 Transformer 投影与批量步骤执行
"""

from .batching import BatchResult, batch_loss, execute_program_sequential, gradients, run_step_program
from .checkpoint import LoadedCheckpoint, load_checkpoint, save_checkpoint
from .config import AblationFlags, EncoderConfig
from .edges import NUM_EDGE_TYPES, EdgeType, edge_type, edge_type_matrix
from .encoder import HeterogeneousEncoder
from .nqe import EncoderInput, NQEModel

__all__ = [
    'BatchResult', 'batch_loss', 'execute_program_sequential', 'gradients', 'run_step_program',
    'LoadedCheckpoint', 'load_checkpoint', 'save_checkpoint',
    'AblationFlags', 'EncoderConfig',
    'NUM_EDGE_TYPES', 'EdgeType', 'edge_type', 'edge_type_matrix',
    'HeterogeneousEncoder', 'EncoderInput', 'NQEModel',
]
