"""
Judge Module
Ternary rule judgments through a chat backend, with a persistent cache
"""

from judge.cache import JudgmentCache, judgment_key, summarize_cache
from judge.judge import judge_matrix, judge_one, judgment_request
from judge.parser import extract_final_answer, parse_judgment, parse_label

__all__ = [
    'JudgmentCache',
    'judgment_key',
    'summarize_cache',
    'judge_matrix',
    'judge_one',
    'judgment_request',
    'extract_final_answer',
    'parse_judgment',
    'parse_label',
]
