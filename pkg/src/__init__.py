"""
NQE：超关系知识图谱上的 N 元一阶逻辑查询嵌入
"""

__version__ = "0.1.0"
