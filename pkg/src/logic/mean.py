from typing import Sequence

import torch

from .base import FuzzyLogic, stack_inputs
from .factory import LOGIC_BLIND, LogicFactory


@LogicFactory.register(LOGIC_BLIND)
class MeanLogic(FuzzyLogic):
    """逻辑无关消融：合取与析取都取算术平均，否定仍为 1 - q"""

    def conj(self, inputs: Sequence[torch.Tensor]) -> torch.Tensor:
        return torch.mean(stack_inputs(inputs), dim=0)

    def disj(self, inputs: Sequence[torch.Tensor]) -> torch.Tensor:
        return torch.mean(stack_inputs(inputs), dim=0)
