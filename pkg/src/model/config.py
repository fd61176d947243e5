from pydantic import BaseModel, ConfigDict, Field, model_validator


class EncoderConfig(BaseModel):
    """编码器结构超参数"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    dim: int = Field(32, ge=1)
    num_layers: int = Field(2, ge=1)
    num_heads: int = Field(1, ge=1)
    ffn_dim: int = Field(64, ge=1)
    dropout: float = Field(0.0, ge=0.0, lt=1.0)
    share_edge_bias: bool = False
    init_std: float = Field(0.1, gt=0.0)

    @model_validator(mode='after')
    def _check_heads(self):
        if self.dim % self.num_heads:
            raise ValueError(f"dim={self.dim} 不能被 num_heads={self.num_heads} 整除")
        return self

    @property
    def head_dim(self) -> int:
        return self.dim // self.num_heads


class AblationFlags(BaseModel):
    """消融开关"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    node_h_only: bool = False
    edge_h_only: bool = False
    logic_blind: bool = False
    unparalleled: bool = False

    @model_validator(mode='after')
    def _check_exclusive(self):
        if self.node_h_only and self.edge_h_only:
            raise ValueError("node_h_only 与 edge_h_only 不能同时开启")
        return self
