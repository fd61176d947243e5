from typing import Sequence

import torch

from .base import FuzzyLogic, stack_inputs
from .factory import LogicFactory


@LogicFactory.register("godel")
class GodelLogic(FuzzyLogic):
    """Gödel 逻辑：逐元素 min / max

    逐个折叠并只在严格更优时替换，平局时梯度流向下标最小的输入。
    """

    def conj(self, inputs: Sequence[torch.Tensor]) -> torch.Tensor:
        stacked = stack_inputs(inputs)
        result = stacked[0]
        for candidate in stacked[1:]:
            result = torch.where(candidate < result, candidate, result)
        return result

    def disj(self, inputs: Sequence[torch.Tensor]) -> torch.Tensor:
        stacked = stack_inputs(inputs)
        result = stacked[0]
        for candidate in stacked[1:]:
            result = torch.where(candidate > result, candidate, result)
        return result
