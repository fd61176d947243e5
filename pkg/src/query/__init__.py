"""
N元一阶逻辑查询：AST、解析、规范形状与步骤程序编译
"""

from .ast import (
    And, Anchor, Not, Or, Projection, Target, Var,
    anchors_of, ast_from_dict, ast_to_dict, count_bound_variables, count_operators,
    drop_negation, has_negation, projection, relations_of, validate_ast,
)
from .compiler import LogicOpKind, ProjectionSpec, Step, StepProgram, compile_query, register_nodes
from .parser import parse
from .serialize import query_record, record_ast, to_text
from .shapes import (
    ALL_TYPES, CP_TYPES, EPFO_TYPES, NEGATION_TYPES, SHAPES,
    HopLayout, QueryType, canonical_ast, default_layouts, hop_templates,
)

__all__ = [
    'And', 'Anchor', 'Not', 'Or', 'Projection', 'Target', 'Var',
    'anchors_of', 'ast_from_dict', 'ast_to_dict', 'count_bound_variables', 'count_operators',
    'drop_negation', 'has_negation', 'projection', 'relations_of', 'validate_ast',
    'LogicOpKind', 'ProjectionSpec', 'Step', 'StepProgram', 'compile_query', 'register_nodes',
    'parse', 'query_record', 'record_ast', 'to_text',
    'ALL_TYPES', 'CP_TYPES', 'EPFO_TYPES', 'NEGATION_TYPES', 'SHAPES',
    'HopLayout', 'QueryType', 'canonical_ast', 'default_layouts', 'hop_templates',
]
