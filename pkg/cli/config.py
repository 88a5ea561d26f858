"""
Run Configuration
YAML run configuration validated into pydantic models
"""

import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from backends.factory import BackendConfig, BackendType
from core.errors import ConfigError
from dataset.loader import DatasetManifest
from dataset.splits import DEFAULT_SPLIT_SIZES
from evaluation.strategies import StrategyKind
from loop.rlie import CombinerConfig, LoopConfig

logger = logging.getLogger(__name__)

DEFAULT_STRATEGIES = tuple(kind.value for kind in StrategyKind)


class DatasetSection(BaseModel):
    """Where the examples, their lexicon and their prompt templates live"""

    model_config = ConfigDict(frozen=True)

    path: str
    manifest: DatasetManifest
    templates: str = "templates/generic.yaml"
    split_sizes: Tuple[int, int, int] = DEFAULT_SPLIT_SIZES
    splits_file: Optional[str] = None

    @field_validator('split_sizes')
    @classmethod
    def _positive_sizes(cls, value: Tuple[int, int, int]) -> Tuple[int, int, int]:
        if any(s < 1 for s in value):
            raise ValueError(f"split sizes must be positive, got {value}")
        return value


class EvaluationSection(BaseModel):
    model_config = ConfigDict(frozen=True)

    strategies: Tuple[str, ...] = DEFAULT_STRATEGIES

    @field_validator('strategies')
    @classmethod
    def _known_strategies(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        if not value:
            raise ValueError("at least one strategy is required")
        return tuple(StrategyKind.parse(name).value for name in value)

    def kinds(self) -> List[StrategyKind]:
        return [StrategyKind(name) for name in self.strategies]


class LoggingSection(BaseModel):
    model_config = ConfigDict(frozen=True)

    level: str = "INFO"
    file: Optional[str] = None
    max_bytes: int = 10485760
    backup_count: int = 5
    json_format: bool = True

    @field_validator('level')
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            raise ValueError(f"unknown log level {value!r}")
        return level


class RunConfig(BaseModel):
    """
    Complete configuration of a run

    Only `dataset` is required; every hyperparameter has a default. API keys
    never appear here, only the name of the environment variable holding them.
    """

    model_config = ConfigDict(frozen=True)

    run_id: str = "rlie"
    dataset: DatasetSection
    backend: BackendConfig = Field(default_factory=BackendConfig)
    loop: LoopConfig = Field(default_factory=LoopConfig)
    combiner: CombinerConfig = Field(default_factory=CombinerConfig)
    evaluation: EvaluationSection = Field(default_factory=EvaluationSection)
    logging: LoggingSection = Field(default_factory=LoggingSection)
    seeds: Tuple[int, ...] = (42,)
    repeats: Optional[int] = Field(default=None, ge=1)
    output_dir: str = "runs"
    cache_path: str = "cache/judgments.jsonl"

    @field_validator('seeds')
    @classmethod
    def _has_seed(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value:
            raise ValueError("at least one seed is required")
        if len(set(value)) != len(value):
            raise ValueError(f"seeds must be distinct, got {list(value)}")
        return value

    def run_seeds(self) -> List[int]:
        """
        Seeds of the repeated runs

        `repeats` takes the first seeds of the list, continuing with consecutive
        integers after the last seed when the list is shorter.
        """
        seeds = list(self.seeds)
        count = self.repeats or len(seeds)
        while len(seeds) < count:
            seeds.append(seeds[-1] + 1)
        return seeds[:count]

    def with_seed(self, seed: int) -> 'RunConfig':
        return self.model_copy(update={'seeds': (seed,), 'repeats': 1})

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode='json'), sort_keys=False, allow_unicode=True)

    @classmethod
    def from_mapping(cls, raw: dict) -> 'RunConfig':
        try:
            return cls.model_validate(raw)
        except ValidationError as e:
            raise ConfigError(f"invalid configuration: {e}") from e

    @classmethod
    def from_yaml_text(cls, text: str) -> 'RunConfig':
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigError(f"configuration is not valid YAML: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a mapping")
        return cls.from_mapping(raw)

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> 'RunConfig':
        """
        Load a configuration file

        Raises:
            ConfigError: Missing file, invalid YAML or invalid values
        """
        try:
            with open(path, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise ConfigError(f"cannot read configuration {path}: {e}") from e
        return cls.from_yaml_text(text)

    def validate_paths(self):
        """
        Check every referenced input file exists

        Raises:
            ConfigError: Naming the first missing file
        """
        required = [
            ('dataset.path', self.dataset.path),
            ('dataset.templates', self.dataset.templates),
        ]
        if self.dataset.splits_file:
            required.append(('dataset.splits_file', self.dataset.splits_file))
        if self.backend.provider.lower() == BackendType.SYNTHETIC.value:
            if not self.backend.synthetic_spec:
                raise ConfigError("backend.synthetic_spec is required for the synthetic backend")
            required.append(('backend.synthetic_spec', self.backend.synthetic_spec))

        for key, value in required:
            if not Path(value).exists():
                raise ConfigError(f"{key} does not exist: {value}")
        logger.debug(f"✅ Configuration paths validated for run {self.run_id}")
