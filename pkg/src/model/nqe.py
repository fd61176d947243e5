"""NQE 模型：模糊空间嵌入、投影算子、相似度与损失"""

from typing import Dict, List, Optional, Sequence

import torch
import torch.nn as nn
from pydantic import BaseModel, ConfigDict, model_validator

from ..graph.facts import sequence_index
from ..query.compiler import AnchorSlot, MaskSlot, ProjectionSpec, RegisterSlot
from ..utils.exceptions import ModelInputError, TargetOutOfRangeError
from .config import AblationFlags, EncoderConfig
from .encoder import HeterogeneousEncoder

DTYPE = torch.float64


class EncoderInput(BaseModel):
    """投影算子的输入序列 (2n-1, d) 与掩码的实体位置（1起始）"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    tokens: torch.Tensor
    mask_position: int

    @model_validator(mode='after')
    def _check(self):
        if self.tokens.dim() != 2:
            raise ModelInputError("tokens 必须是 (2n-1, d) 的二维张量")
        length = self.tokens.shape[0]
        if length < 3 or length % 2 == 0:
            raise ModelInputError(f"序列长度必须为不小于3的奇数: {length}")
        if not 1 <= self.mask_position <= (length + 1) // 2:
            raise ModelInputError(f"掩码位置越界: {self.mask_position}")
        return self

    @property
    def arity(self) -> int:
        return (self.tokens.shape[0] + 1) // 2


class NQEModel(nn.Module):
    def __init__(self, num_entities: int, num_relations: int, config: EncoderConfig = EncoderConfig(),
                 ablation: AblationFlags = AblationFlags()):
        super().__init__()
        if num_entities < 1 or num_relations < 1:
            raise ModelInputError("实体与关系数量都必须为正")
        self.config = config
        self.ablation = ablation
        self.num_entities = num_entities
        self.num_relations = num_relations
        self.entity_logits = nn.Parameter(torch.empty(num_entities, config.dim))
        self.relation_logits = nn.Parameter(torch.empty(num_relations, config.dim))
        self.mask_token = nn.Parameter(torch.empty(config.dim))
        self.encoder = HeterogeneousEncoder(config, ablation)
        for parameter in (self.entity_logits, self.relation_logits, self.mask_token):
            nn.init.normal_(parameter, std=config.init_std)
        self.to(DTYPE)

    @property
    def entity_embeddings(self) -> torch.Tensor:
        return torch.sigmoid(self.entity_logits)

    @property
    def relation_embeddings(self) -> torch.Tensor:
        return torch.sigmoid(self.relation_logits)

    def build_input(self, spec: ProjectionSpec, registers: Sequence[Optional[torch.Tensor]] = ()) -> EncoderInput:
        """把投影步骤展开为输入序列；寄存器值占据实体位置"""
        entities = self.entity_embeddings
        relations = self.relation_embeddings
        rows: List[Optional[torch.Tensor]] = [None] * (2 * spec.arity - 1)
        for i, relation in enumerate(spec.relations):
            if not 0 <= relation < self.num_relations:
                raise ModelInputError(f"关系id越界: {relation}")
            rows[2 * i + 1] = relations[relation]
        for position, slot in enumerate(spec.slots, start=1):
            index = sequence_index(position)
            if isinstance(slot, AnchorSlot):
                if not 0 <= slot.entity < self.num_entities:
                    raise ModelInputError(f"实体id越界: {slot.entity}")
                rows[index] = entities[slot.entity]
            elif isinstance(slot, RegisterSlot):
                value = registers[slot.register_id] if slot.register_id < len(registers) else None
                if value is None:
                    raise ModelInputError(f"寄存器 r{slot.register_id} 尚未写入")
                rows[index] = value
            elif isinstance(slot, MaskSlot):
                rows[index] = self.mask_token
        return EncoderInput(tokens=torch.stack(rows), mask_position=spec.mask_position)

    def encode(self, tokens: torch.Tensor, mask_positions: Sequence[int]) -> torch.Tensor:
        """批量投影：tokens (B, 2n-1, d)，mask_positions 为各行掩码的实体位置"""
        if tokens.dim() != 3 or tokens.shape[-1] != self.config.dim:
            raise ModelInputError(f"输入形状错误: {tuple(tokens.shape)}")
        if len(mask_positions) != tokens.shape[0]:
            raise ModelInputError("mask_positions 与批大小不一致")
        mask_index = torch.tensor([sequence_index(p) for p in mask_positions], dtype=torch.long)
        return self.encoder(tokens, mask_index)

    def project(self, encoder_input: EncoderInput) -> torch.Tensor:
        """单条输入的投影，结果位于 (0,1)^d"""
        return self.encode(encoder_input.tokens.unsqueeze(0), [encoder_input.mask_position])[0]

    def logits(self, q: torch.Tensor) -> torch.Tensor:
        return q @ self.entity_embeddings.T

    def similarity(self, q: torch.Tensor) -> torch.Tensor:
        """softmax(q · W_e^T)，得到实体上的概率分布"""
        if q.shape[-1] != self.config.dim:
            raise ModelInputError(f"查询向量维度应为 {self.config.dim}")
        return torch.softmax(self.logits(q), dim=-1)

    def smoothed_targets(self, target: torch.Tensor, eps: float) -> torch.Tensor:
        """目标实体取 1-ε，其余各取 ε/(|E|-1)"""
        if torch.any(target < 0) or torch.any(target >= self.num_entities):
            raise TargetOutOfRangeError(f"目标实体越界，实体数 {self.num_entities}")
        if self.num_entities == 1:
            return torch.ones(target.shape[0], 1, dtype=DTYPE)
        labels = torch.full((target.shape[0], self.num_entities), eps / (self.num_entities - 1), dtype=DTYPE)
        labels.scatter_(1, target.unsqueeze(1), 1.0 - eps)
        return labels

    def loss(self, scores: torch.Tensor, target, eps: float) -> torch.Tensor:
        """标签平滑交叉熵 -Σ y_t log S_t（逐样本）"""
        squeeze = scores.dim() == 1
        scores = scores.unsqueeze(0) if squeeze else scores
        target = torch.as_tensor(target, dtype=torch.long).reshape(-1)
        losses = -(self.smoothed_targets(target, eps) * torch.log(scores)).sum(-1)
        return losses[0] if squeeze else losses

    def loss_from_query(self, q: torch.Tensor, target: torch.Tensor, eps: float) -> torch.Tensor:
        """与 loss(similarity(q)) 相同，走 log_softmax 以保持数值稳定"""
        log_scores = torch.log_softmax(self.logits(q), dim=-1)
        return -(self.smoothed_targets(target, eps) * log_scores).sum(-1)

    def shapes(self) -> Dict[str, List[int]]:
        return {name: list(tensor.shape) for name, tensor in self.state_dict().items()}
