"""
Prompt Templates
Versioned ${placeholder} templates loaded from YAML template sets
"""

import logging
from pathlib import Path
from string import Template
from typing import Dict, FrozenSet, Mapping, Sequence, Union

import yaml
from cachetools import LRUCache, cached
from cachetools.keys import hashkey
from pydantic import BaseModel, ConfigDict, model_validator

from core.errors import TemplateError
from core.types import Example

logger = logging.getLogger(__name__)

OBSERVATION = "observation"
GENERATION = "generation"
REFINEMENT = "refinement"
JUDGMENT = "judgment"
INFER_RULES = "infer_rules"
INFER_WEIGHTS = "infer_weights"
INFER_WEIGHTS_PREDICTION = "infer_weights_prediction"

REQUIRED_TEMPLATES = (
    OBSERVATION,
    GENERATION,
    REFINEMENT,
    JUDGMENT,
    INFER_RULES,
    INFER_WEIGHTS,
    INFER_WEIGHTS_PREDICTION,
)


def example_binding(example: Example, field_names: Sequence[str]) -> Dict[str, str]:
    """
    Template binding for an example's fields

    Raises:
        TemplateError: If the example lacks one of `field_names`
    """
    binding = {}
    for name in field_names:
        if name not in example.fields:
            raise TemplateError(f"example {example.id} has no field {name!r}")
        binding[name] = example.fields[name]
    return binding


def placeholders_in(text: str) -> FrozenSet[str]:
    """Names of every ${name} / $name placeholder in `text`"""
    names = set()
    for match in Template.pattern.finditer(text):
        name = match.group('named') or match.group('braced')
        if name:
            names.add(name)
        elif match.group('invalid') is not None:
            snippet = text[match.start():match.start() + 20]
            raise TemplateError(f"Invalid placeholder near position {match.start()}: {snippet!r}")
    return frozenset(names)


class PromptTemplate(BaseModel):
    """
    One prompt: optional system text and a user text with named placeholders

    Every placeholder used in either text must be listed in `placeholders`.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    version: str
    system: str = ""
    user: str
    placeholders: FrozenSet[str] = frozenset()

    @model_validator(mode='after')
    def _placeholders_declared(self) -> 'PromptTemplate':
        used = placeholders_in(self.system) | placeholders_in(self.user)
        undeclared = used - self.placeholders
        if undeclared:
            raise ValueError(
                f"template {self.name!r} uses undeclared placeholders: {sorted(undeclared)}"
            )
        return self

    def render(self, binding: Mapping[str, object]) -> Dict[str, str]:
        """
        Render both texts

        Returns:
            {'system': ..., 'user': ...}

        Raises:
            TemplateError: If the binding misses a placeholder the texts use
        """
        used = placeholders_in(self.system) | placeholders_in(self.user)
        missing = sorted(used - set(binding))
        if missing:
            raise TemplateError(f"template {self.name!r} is missing bindings for {missing}")
        values = {k: str(binding[k]) for k in used}
        return {
            'system': Template(self.system).substitute(values),
            'user': Template(self.user).substitute(values),
        }

    def render_user(self, binding: Mapping[str, object]) -> str:
        return self.render(binding)['user']


class TemplateSet(BaseModel):
    """All prompts of one task, sharing a version string"""

    model_config = ConfigDict(frozen=True)

    name: str
    version: str
    templates: Dict[str, PromptTemplate]

    @model_validator(mode='after')
    def _complete(self) -> 'TemplateSet':
        missing = [key for key in REQUIRED_TEMPLATES if key not in self.templates]
        if missing:
            raise ValueError(f"template set {self.name!r} lacks templates: {missing}")
        return self

    def get(self, key: str) -> PromptTemplate:
        try:
            return self.templates[key]
        except KeyError:
            raise TemplateError(f"template set {self.name!r} has no template {key!r}") from None

    def versions(self) -> Dict[str, str]:
        """Template name -> version, for run directories and cache keys"""
        return {key: t.version for key, t in sorted(self.templates.items())}

    @classmethod
    def from_mapping(cls, raw: Mapping) -> 'TemplateSet':
        """Build from the parsed YAML layout (name, version, templates: {key: {...}})"""
        version = str(raw.get('version', '1'))
        templates = {}
        for key, body in (raw.get('templates') or {}).items():
            body = dict(body or {})
            templates[key] = PromptTemplate(
                name=key,
                version=str(body.get('version', version)),
                system=body.get('system', '') or '',
                user=body.get('user', '') or '',
                placeholders=frozenset(body.get('placeholders') or ()),
            )
        return cls(name=str(raw.get('name', 'unnamed')), version=version, templates=templates)


_TEMPLATE_CACHE: LRUCache = LRUCache(maxsize=16)


@cached(_TEMPLATE_CACHE, key=lambda path, mtime: hashkey(path, mtime))
def _load_template_file(path: str, mtime: float) -> TemplateSet:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise TemplateError(f"Cannot read template set {path}: {e}") from e
    try:
        template_set = TemplateSet.from_mapping(raw)
    except ValueError as e:
        raise TemplateError(f"Invalid template set {path}: {e}") from e
    logger.info(f"Loaded template set {template_set.name} v{template_set.version} from {path}")
    return template_set


def load_template_set(path: Union[str, Path]) -> TemplateSet:
    """
    Load a template set, reusing the parsed result while the file is unchanged

    Raises:
        TemplateError: If the file is missing, unreadable or incomplete
    """
    resolved = Path(path).resolve()
    if not resolved.is_file():
        raise TemplateError(f"Template set not found: {path}")
    return _load_template_file(str(resolved), resolved.stat().st_mtime)
