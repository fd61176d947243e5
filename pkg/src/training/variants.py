"""命名的模型变体：以 TrainConfig 字段覆盖的形式登记"""

from typing import Any, Callable, Dict, List

from ..model.config import AblationFlags
from .config import TrainConfig


class VariantRegistry:
    """变体注册表"""

    _variants: Dict[str, Callable[[], Dict[str, Any]]] = {}

    @classmethod
    def register(cls, name: str):
        """注册变体"""
        def decorator(builder: Callable[[], Dict[str, Any]]):
            cls._variants[name] = builder
            return builder
        return decorator

    @classmethod
    def get_overrides(cls, name: str) -> Dict[str, Any]:
        if name not in cls._variants:
            raise ValueError(f"未知的变体: {name}，可选: {', '.join(cls._variants)}")
        return cls._variants[name]()

    @classmethod
    def get_available_variants(cls) -> List[str]:
        return list(cls._variants.keys())


@VariantRegistry.register("NQE")
def _full() -> Dict[str, Any]:
    return {}


@VariantRegistry.register("NQE-1p")
def _one_hop() -> Dict[str, Any]:
    return {"train_types": ["1p"]}


@VariantRegistry.register("NodeH-only")
def _node_h_only() -> Dict[str, Any]:
    return {"ablation": {"node_h_only": True}}


@VariantRegistry.register("EdgeH-only")
def _edge_h_only() -> Dict[str, Any]:
    return {"ablation": {"edge_h_only": True}}


@VariantRegistry.register("Logic-blind")
def _logic_blind() -> Dict[str, Any]:
    return {"ablation": {"logic_blind": True}}


@VariantRegistry.register("Unparalleled")
def _unparalleled() -> Dict[str, Any]:
    return {"ablation": {"unparalleled": True}}


def build_train_config(variant: str = "NQE", **overrides) -> TrainConfig:
    """变体预设 < 显式覆盖；ablation 字段逐项合并"""
    values = dict(VariantRegistry.get_overrides(variant))
    ablation = dict(values.pop("ablation", {}))
    explicit = dict(overrides)
    extra = explicit.pop("ablation", None)
    if isinstance(extra, AblationFlags):
        extra = extra.model_dump()
    ablation.update(extra or {})
    values.update(explicit)
    if ablation:
        values["ablation"] = ablation
    return TrainConfig.model_validate(values)
