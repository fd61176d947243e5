"""
通用工具：配置、异常与日志
"""
