from typing import Optional


class NQEError(Exception):
    """N元查询嵌入相关的异常基类"""
    exit_code = 3


class InputError(NQEError):
    """输入或用法错误"""
    exit_code = 2


class FactFormatError(InputError):
    """事实文件格式错误"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ArityError(FactFormatError):
    """事实元数小于2"""
    pass


class QuerySyntaxError(InputError):
    """查询语法错误"""

    def __init__(self, message: str, offset: int):
        super().__init__(f"offset {offset}: {message}")
        self.offset = offset


class UnknownLabelError(InputError):
    """未知的实体或关系标签"""
    pass


class QueryValidationError(InputError):
    """查询结构校验失败"""
    pass


class MultipleTargetsError(QueryValidationError):
    """投影中目标变量数量不为1"""
    pass


class CircularQueryError(QueryValidationError):
    """查询存在循环引用"""
    pass


class ConfigError(InputError):
    """配置错误"""
    pass


class CheckpointError(InputError):
    """检查点文件缺失或损坏"""
    pass


class PatternError(NQEError):
    """事实模式中的空位不合法"""
    pass


class ShapeError(NQEError):
    """查询形状与锚点/关系数量不匹配"""
    pass


class DataError(NQEError):
    """数据或前置条件错误"""
    exit_code = 3


class ArityUnavailableError(DataError):
    """图中没有满足元数要求的事实"""
    pass


class SamplingExhaustedError(DataError):
    """采样重试次数耗尽"""
    pass


class OracleGuardError(DataError):
    """暴力求解器超出规模限制"""
    pass


class EmptyDatasetError(DataError):
    """训练数据为空"""
    pass


class LogicError(NQEError):
    """模糊逻辑算子输入错误"""
    pass


class LogicArityError(LogicError):
    """合取/析取输入少于2个"""
    pass


class DimensionMismatchError(LogicError):
    """模糊向量维度不一致"""
    pass


class ModelInputError(NQEError):
    """编码器输入形状或掩码错误"""
    pass


class TargetOutOfRangeError(NQEError):
    """目标实体超出范围"""
    pass


class NumericalDivergenceError(NQEError):
    """训练损失出现非有限值"""
    exit_code = 4
