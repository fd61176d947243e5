from typing import Sequence

import torch

from .base import FuzzyLogic, stack_inputs
from .factory import LogicFactory


@LogicFactory.register("product")
class ProductLogic(FuzzyLogic):
    """乘积逻辑：合取为逐元素乘积，析取为容斥展开的闭式 1 - prod(1 - q)"""

    def conj(self, inputs: Sequence[torch.Tensor]) -> torch.Tensor:
        return torch.prod(stack_inputs(inputs), dim=0)

    def disj(self, inputs: Sequence[torch.Tensor]) -> torch.Tensor:
        return 1.0 - torch.prod(1.0 - stack_inputs(inputs), dim=0)
