from typing import List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..logic import LogicKind
from ..model.config import AblationFlags, EncoderConfig
from ..query.shapes import ALL_TYPES, QueryType


class TrainConfig(BaseModel):
    """训练配置；未知字段直接拒绝"""
    model_config = ConfigDict(extra='forbid')

    # 模型结构
    dim: int = Field(32, ge=1)
    num_layers: int = Field(2, ge=1)
    num_heads: int = Field(1, ge=1)
    ffn_dim: int = Field(64, ge=1)
    dropout: float = Field(0.0, ge=0.0, lt=1.0)
    share_edge_bias: bool = False
    init_std: float = Field(0.1, gt=0.0)

    # 优化
    logic: LogicKind = LogicKind.PRODUCT
    label_smoothing: float = Field(0.1, gt=0.0, lt=1.0)
    learning_rate: float = Field(1e-3, gt=0.0)
    optimizer: Literal['adam', 'sgd'] = 'adam'
    adam_betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = Field(1e-8, gt=0.0)
    batch_size: int = Field(64, ge=1)
    epochs: int = Field(10, ge=0)
    seed: int = 0
    train_types: List[QueryType] = Field(default_factory=lambda: list(ALL_TYPES))
    patience: int | None = Field(None, ge=1)
    threads: int = Field(1, ge=1)

    ablation: AblationFlags = Field(default_factory=AblationFlags)

    @field_validator('train_types')
    @classmethod
    def _non_empty(cls, value: List[QueryType]) -> List[QueryType]:
        if not value:
            raise ValueError("train_types 不能为空")
        return value

    @model_validator(mode='after')
    def _check_heads(self):
        if self.dim % self.num_heads:
            raise ValueError(f"dim={self.dim} 不能被 num_heads={self.num_heads} 整除")
        return self

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(
            dim=self.dim,
            num_layers=self.num_layers,
            num_heads=self.num_heads,
            ffn_dim=self.ffn_dim,
            dropout=self.dropout,
            share_edge_bias=self.share_edge_bias,
            init_std=self.init_std,
        )
