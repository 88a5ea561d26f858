"""
Genesis Module
Prompt templates and rule generation
"""

from genesis.generator import (
    GenerationRequest,
    GenerationResult,
    generate_rules,
    generation_prompt,
    numbered_list,
    parse_numbered_list,
    render_observations,
    run_generation,
)
from genesis.templates import PromptTemplate, TemplateSet, load_template_set

__all__ = [
    'GenerationRequest',
    'GenerationResult',
    'generate_rules',
    'generation_prompt',
    'numbered_list',
    'parse_numbered_list',
    'render_observations',
    'run_generation',
    'PromptTemplate',
    'TemplateSet',
    'load_template_set',
]
