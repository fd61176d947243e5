from abc import ABC, abstractmethod
from enum import Enum
from typing import Sequence

import torch

from ..utils.exceptions import DimensionMismatchError, LogicArityError


class LogicKind(str, Enum):
    """t-范数族"""
    PRODUCT = "product"
    GODEL = "godel"
    LUKASIEWICZ = "lukasiewicz"


def stack_inputs(inputs: Sequence[torch.Tensor]) -> torch.Tensor:
    """校验 m >= 2 且各输入形状一致，沿第0维堆叠"""
    if len(inputs) < 2:
        raise LogicArityError(f"逻辑运算至少需要2个输入，得到 {len(inputs)}")
    shape = inputs[0].shape
    for tensor in inputs[1:]:
        if tensor.shape != shape:
            raise DimensionMismatchError(f"输入维度不一致: {tuple(shape)} vs {tuple(tensor.shape)}")
    return torch.stack(tuple(inputs), dim=0)


class FuzzyLogic(ABC):
    """模糊向量逻辑运算基类：输入均为 [0,1] 内的同形张量"""

    name: str = ""

    @abstractmethod
    def conj(self, inputs: Sequence[torch.Tensor]) -> torch.Tensor:
        """m 元合取"""
        pass

    @abstractmethod
    def disj(self, inputs: Sequence[torch.Tensor]) -> torch.Tensor:
        """m 元析取"""
        pass

    def neg(self, q: torch.Tensor) -> torch.Tensor:
        """否定 N(q) = 1 - q"""
        return 1.0 - q
