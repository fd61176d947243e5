"""
模糊向量逻辑：乘积、Gödel、Łukasiewicz 三个 t-范数族及逻辑无关消融
"""

from typing import Sequence, Union

import torch

from .base import FuzzyLogic, LogicKind, stack_inputs
from .factory import LOGIC_BLIND, LogicFactory
from .godel import GodelLogic
from .lukasiewicz import LukasiewiczLogic
from .mean import MeanLogic
from .product import ProductLogic


def conj(kind: Union[str, LogicKind], inputs: Sequence[torch.Tensor]) -> torch.Tensor:
    return LogicFactory.get_logic(kind).conj(inputs)


def disj(kind: Union[str, LogicKind], inputs: Sequence[torch.Tensor]) -> torch.Tensor:
    return LogicFactory.get_logic(kind).disj(inputs)


def neg(q: torch.Tensor) -> torch.Tensor:
    return 1.0 - q


__all__ = [
    'FuzzyLogic', 'LogicKind', 'LogicFactory', 'LOGIC_BLIND', 'stack_inputs',
    'ProductLogic', 'GodelLogic', 'LukasiewiczLogic', 'MeanLogic',
    'conj', 'disj', 'neg',
]
