import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from .exceptions import ConfigError


class Settings(BaseSettings):
    """应用配置类"""
    seed: int = Field(0, description="默认随机种子")
    threads: int = Field(1, ge=1, description="计算线程数，1为可复现模式")
    log_level: str = Field('INFO')
    log_file: Optional[str] = Field(None)

    model_config = SettingsConfigDict(
        env_prefix='NQE_',
        env_file='.env',
        env_file_encoding='utf-8',
        extra='ignore',
    )


def get_settings() -> Settings:
    """读取环境变量配置（每次调用重新读取，方便测试覆盖）"""
    return Settings()


class ModelSection(BaseModel):
    """[model] 配置段"""
    model_config = ConfigDict(extra='forbid')

    dim: Optional[int] = None
    num_layers: Optional[int] = None
    num_heads: Optional[int] = None
    ffn_dim: Optional[int] = None
    dropout: Optional[float] = None
    share_edge_bias: Optional[bool] = None


class TrainSection(BaseModel):
    """[train] 配置段"""
    model_config = ConfigDict(extra='forbid')

    variant: Optional[str] = None
    logic: Optional[str] = None
    label_smoothing: Optional[float] = None
    learning_rate: Optional[float] = None
    optimizer: Optional[str] = None
    adam_betas: Optional[tuple[float, float]] = None
    adam_eps: Optional[float] = None
    batch_size: Optional[int] = None
    epochs: Optional[int] = None
    seed: Optional[int] = None
    train_types: Optional[list[str]] = None
    patience: Optional[int] = None
    init_std: Optional[float] = None


class AblationSection(BaseModel):
    """[ablation] 配置段"""
    model_config = ConfigDict(extra='forbid')

    node_h_only: Optional[bool] = None
    edge_h_only: Optional[bool] = None
    logic_blind: Optional[bool] = None
    unparalleled: Optional[bool] = None


class PathsSection(BaseModel):
    """[paths] 配置段"""
    model_config = ConfigDict(extra='forbid')

    store: Optional[str] = None
    data: Optional[str] = None
    checkpoint: Optional[str] = None
    loss_curve: Optional[str] = None
    report: Optional[str] = None


class RunConfig(BaseModel):
    """运行配置（TOML文件），未知键直接拒绝"""
    model_config = ConfigDict(extra='forbid')

    model: ModelSection = Field(default_factory=ModelSection)
    train: TrainSection = Field(default_factory=TrainSection)
    ablation: AblationSection = Field(default_factory=AblationSection)
    paths: PathsSection = Field(default_factory=PathsSection)

    def train_overrides(self) -> Dict[str, Any]:
        """展开为 TrainConfig 的字段覆盖（不含 variant）"""
        values: Dict[str, Any] = {}
        values.update(self.model.model_dump(exclude_none=True))
        values.update(self.train.model_dump(exclude_none=True, exclude={'variant'}))
        ablation = self.ablation.model_dump(exclude_none=True)
        if ablation:
            values['ablation'] = ablation
        return values


def load_run_config(path: Optional[str]) -> RunConfig:
    """加载TOML运行配置"""
    if path is None:
        return RunConfig()
    if not os.path.exists(path):
        raise ConfigError(f"配置文件不存在: {path}")
    try:
        with open(path, 'rb') as f:
            raw = tomllib.load(f)
        return RunConfig.model_validate(raw)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"配置文件解析失败: {e}")
    except ValidationError as e:
        raise ConfigError(f"配置文件无效: {e}")


def ensure_directories(*paths: str):
    """确保输出目录存在"""
    for path in paths:
        if path:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
