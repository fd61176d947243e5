from typing import Sequence

import torch

from .base import FuzzyLogic, stack_inputs
from .factory import LogicFactory


@LogicFactory.register("lukasiewicz")
class LukasiewiczLogic(FuzzyLogic):
    """Łukasiewicz 逻辑：max(0, a+b-1) 与 min(1, a+b) 的左折叠"""

    def conj(self, inputs: Sequence[torch.Tensor]) -> torch.Tensor:
        stacked = stack_inputs(inputs)
        result = stacked[0]
        for candidate in stacked[1:]:
            result = torch.clamp(result + candidate - 1.0, min=0.0)
        return result

    def disj(self, inputs: Sequence[torch.Tensor]) -> torch.Tensor:
        stacked = stack_inputs(inputs)
        result = stacked[0]
        for candidate in stacked[1:]:
            result = torch.clamp(result + candidate, max=1.0)
        return result
