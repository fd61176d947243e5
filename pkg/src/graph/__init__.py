"""
超关系知识图谱存储
"""

from .facts import HOLE, NAryFact, sequence_of, fact_from_sequence, with_hole, fill_hole
from .store import ALL_SPLITS, HyperGraph, Split, SymbolTable, eval_scope, match_pattern, normalize_scope
from .loader import LoadStats, load_facts
from .snapshot import load_graph, save_graph

__all__ = [
    'HOLE',
    'NAryFact',
    'sequence_of',
    'fact_from_sequence',
    'with_hole',
    'fill_hole',
    'ALL_SPLITS',
    'HyperGraph',
    'Split',
    'SymbolTable',
    'eval_scope',
    'match_pattern',
    'normalize_scope',
    'LoadStats',
    'load_facts',
    'load_graph',
    'save_graph',
]
