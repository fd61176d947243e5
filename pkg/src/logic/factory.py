from typing import Dict, List, Type, Union

from .base import FuzzyLogic, LogicKind

LOGIC_BLIND = "mean"


class LogicFactory:
    """逻辑族工厂"""

    _logics: Dict[str, Type[FuzzyLogic]] = {}

    @classmethod
    def register(cls, name: str):
        """注册逻辑族"""
        def decorator(logic_class: Type[FuzzyLogic]):
            logic_class.name = name
            cls._logics[name] = logic_class
            return logic_class
        return decorator

    @classmethod
    def get_logic(cls, kind: Union[str, LogicKind], logic_blind: bool = False) -> FuzzyLogic:
        """获取逻辑实例；logic_blind 时以算术平均替代合取与析取"""
        name = LOGIC_BLIND if logic_blind else LogicKind(kind).value
        if name not in cls._logics:
            raise ValueError(f"未知的逻辑族: {name}")
        return cls._logics[name]()

    @classmethod
    def get_available_kinds(cls) -> List[str]:
        """获取已注册的逻辑族"""
        return list(cls._logics.keys())
