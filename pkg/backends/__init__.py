"""
Chat Backends
Remote chat models, the synthetic oracle and test doubles behind one interface
"""

from backends.base import (
    PURPOSE_GENERATION,
    PURPOSE_INFERENCE,
    PURPOSE_JUDGMENT,
    BackendCapabilities,
    ChatBackend,
    ChatRequest,
    CountingBackend,
    ModelConfig,
    ScriptedBackend,
)
from backends.factory import BackendConfig, BackendFactory
from backends.synthetic import (
    KeywordPredicate,
    SyntheticBackend,
    SyntheticJudgeSpec,
    build_planted_examples,
    keyword_rule_text,
    planted_bayes_accuracy,
    planted_generation_script,
    synthetic_judge,
)

__all__ = [
    'PURPOSE_GENERATION',
    'PURPOSE_INFERENCE',
    'PURPOSE_JUDGMENT',
    'BackendCapabilities',
    'ChatBackend',
    'ChatRequest',
    'CountingBackend',
    'ModelConfig',
    'ScriptedBackend',
    'BackendConfig',
    'BackendFactory',
    'KeywordPredicate',
    'SyntheticBackend',
    'SyntheticJudgeSpec',
    'build_planted_examples',
    'keyword_rule_text',
    'planted_bayes_accuracy',
    'planted_generation_script',
    'synthetic_judge',
]
