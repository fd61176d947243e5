"""
符号执行器：精确集合语义与暴力预言机
"""

from .symbolic import AnswerSet, execute
from .brute_force import brute_force_execute

__all__ = ['AnswerSet', 'execute', 'brute_force_execute']
