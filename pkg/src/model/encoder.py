"""双重异构 Transformer 编码器：节点角色投影 + 边类型偏置"""

import math
from typing import List, Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from .config import AblationFlags, EncoderConfig
from .edges import NUM_EDGE_TYPES, edge_type_matrix, role_vector


class PositionWiseFFN(nn.Module):
    """逐位置前馈网络 d -> d_ff -> d"""

    def __init__(self, dim: int, ffn_dim: int):
        super().__init__()
        self.dense1 = nn.Linear(dim, ffn_dim)
        self.dense2 = nn.Linear(ffn_dim, dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.dense2(F.gelu(self.dense1(x)))


class AddNorm(nn.Module):
    """残差连接后接层归一化"""

    def __init__(self, dim: int, dropout: float):
        super().__init__()
        self.dropout = nn.Dropout(dropout)
        self.ln = nn.LayerNorm(dim)

    def forward(self, x: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        return self.ln(self.dropout(y) + x)


class EdgeBias(nn.Module):
    """每种边类型的 Q/K/V 偏置向量，各头共享"""

    def __init__(self, head_dim: int):
        super().__init__()
        self.query = nn.Parameter(torch.zeros(NUM_EDGE_TYPES, head_dim))
        self.key = nn.Parameter(torch.zeros(NUM_EDGE_TYPES, head_dim))
        self.value = nn.Parameter(torch.zeros(NUM_EDGE_TYPES, head_dim))


class DualHeterogeneousAttention(nn.Module):
    """m_ij = (q_i + b^Q_ij)·(k_j + b^K_ij)/sqrt(d_h)，输出 Σ_j α_ij (v_j + b^V_ij)"""

    def __init__(self, config: EncoderConfig):
        super().__init__()
        self.num_heads = config.num_heads
        self.head_dim = config.head_dim
        # 下标0为实体角色，1为关系角色；各头的投影按列拼接
        self.w_query = nn.Parameter(torch.empty(2, config.dim, config.dim))
        self.w_key = nn.Parameter(torch.empty(2, config.dim, config.dim))
        self.w_value = nn.Parameter(torch.empty(2, config.dim, config.dim))
        self.dropout = nn.Dropout(config.dropout)
        self.attention_weights: Optional[torch.Tensor] = None

    def _split_heads(self, x: torch.Tensor) -> torch.Tensor:
        batch, length, _ = x.shape
        return x.view(batch, length, self.num_heads, self.head_dim).transpose(1, 2)

    def forward(self, x: torch.Tensor, roles: torch.Tensor, edges: torch.Tensor, bias: EdgeBias) -> torch.Tensor:
        query = self._split_heads(torch.einsum('bld,lde->ble', x, self.w_query[roles]))
        key = self._split_heads(torch.einsum('bld,lde->ble', x, self.w_key[roles]))
        value = self._split_heads(torch.einsum('bld,lde->ble', x, self.w_value[roles]))

        # (L, L, d_h)
        bias_q, bias_k, bias_v = bias.query[edges], bias.key[edges], bias.value[edges]
        logits = ((query.unsqueeze(3) + bias_q) * (key.unsqueeze(2) + bias_k)).sum(-1)
        weights = torch.softmax(logits / math.sqrt(self.head_dim), dim=-1)
        self.attention_weights = weights.detach()
        weights = self.dropout(weights)

        out = (weights.unsqueeze(-1) * (value.unsqueeze(2) + bias_v)).sum(3)
        batch, _, length, _ = out.shape
        return out.transpose(1, 2).reshape(batch, length, self.num_heads * self.head_dim)


class EncoderLayer(nn.Module):
    def __init__(self, config: EncoderConfig):
        super().__init__()
        self.attention = DualHeterogeneousAttention(config)
        self.addnorm1 = AddNorm(config.dim, config.dropout)
        self.ffn = PositionWiseFFN(config.dim, config.ffn_dim)
        self.addnorm2 = AddNorm(config.dim, config.dropout)

    def forward(self, x, roles, edges, bias: EdgeBias):
        y = self.addnorm1(x, self.attention(x, roles, edges, bias))
        return self.addnorm2(y, self.ffn(y))


class HeterogeneousEncoder(nn.Module):
    """K 层编码器；输出为掩码位置的表示经 MLP、LayerNorm 与 sigmoid 得到的模糊向量"""

    def __init__(self, config: EncoderConfig, ablation: AblationFlags = AblationFlags()):
        super().__init__()
        self.config = config
        self.ablation = ablation
        self.layers = nn.ModuleList(EncoderLayer(config) for _ in range(config.num_layers))
        num_biases = 1 if config.share_edge_bias else config.num_layers
        self.edge_biases = nn.ModuleList(EdgeBias(config.head_dim) for _ in range(num_biases))
        self.head = nn.Sequential(nn.Linear(config.dim, config.dim), nn.GELU(), nn.Linear(config.dim, config.dim))
        self.head_norm = nn.LayerNorm(config.dim)
        self.reset_parameters()

    def reset_parameters(self):
        std = self.config.init_std
        for layer in self.layers:
            for weight in (layer.attention.w_query, layer.attention.w_key, layer.attention.w_value):
                nn.init.normal_(weight, std=std)
        for bias in self.edge_biases:
            for parameter in (bias.query, bias.key, bias.value):
                if self.ablation.node_h_only:
                    nn.init.zeros_(parameter)
                    parameter.requires_grad_(False)
                else:
                    nn.init.normal_(parameter, std=std)

    def bias_for(self, layer_index: int) -> EdgeBias:
        return self.edge_biases[0 if self.config.share_edge_bias else layer_index]

    def forward(self, tokens: torch.Tensor, mask_index: torch.Tensor) -> torch.Tensor:
        """tokens: (B, 2n-1, d)；mask_index: (B,) 掩码所在的序列下标"""
        length = tokens.shape[1]
        arity = (length + 1) // 2
        roles = role_vector(arity).to(tokens.device)
        if self.ablation.edge_h_only:
            roles = torch.zeros_like(roles)
        edges = edge_type_matrix(arity).to(tokens.device)

        x = tokens
        for index, layer in enumerate(self.layers):
            x = layer(x, roles, edges, self.bias_for(index))
        masked = x[torch.arange(x.shape[0], device=x.device), mask_index]
        return torch.sigmoid(self.head_norm(self.head(masked)))

    def attention_maps(self) -> List[torch.Tensor]:
        """最近一次前向中各层的注意力权重 (B, h, L, L)"""
        return [layer.attention.attention_weights for layer in self.layers]
