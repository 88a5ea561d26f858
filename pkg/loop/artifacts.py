"""
Run Artifacts
Checkpoints, run logs and the per-run directory that makes a run auditable and resumable
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from combiner.logistic import CombinerParams
from core.errors import CheckpointIntegrityError
from core.types import Rule, RuleOrigin, RuleSet, SplitBundle
from dataset.splits import save_split_manifest
from genesis.generator import GenerationResult
from genesis.templates import TemplateSet
from utils.error_tracker import ErrorTracker

logger = logging.getLogger(__name__)


def dump_json(data: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline"""
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def rule_to_dict(rule: Rule) -> Dict[str, Any]:
    return {
        'rule_id': rule.rule_id,
        'text': rule.text,
        'born_iteration': rule.born_iteration,
        'origin': rule.origin.value,
    }


def rule_from_dict(data: Dict[str, Any]) -> Rule:
    return Rule(
        rule_id=data['rule_id'],
        text=data['text'],
        born_iteration=int(data['born_iteration']),
        origin=RuleOrigin(data.get('origin', RuleOrigin.INITIAL.value)),
    )


@dataclass(frozen=True)
class Checkpoint:
    """Rule set, fitted combiner and validation scores after one iteration"""

    iteration: int
    rule_set: RuleSet
    params: CombinerParams
    val_accuracy: float
    val_macro_f1: float
    cache_stats: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if tuple(self.params.rule_ids) != tuple(self.rule_set.rule_ids):
            raise CheckpointIntegrityError(
                f"combiner rules {list(self.params.rule_ids)} are not aligned to "
                f"rule set {self.rule_set.rule_ids}"
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'iteration': self.iteration,
            'capacity': self.rule_set.capacity,
            'rules': [rule_to_dict(r) for r in self.rule_set],
            'params': self.params.to_dict(),
            'validation': {'accuracy': self.val_accuracy, 'macro_f1': self.val_macro_f1},
            'cache_stats': self.cache_stats,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Checkpoint':
        """
        Rebuild a checkpoint

        Raises:
            CheckpointIntegrityError: On missing sections or weights that do not match the rules
        """
        try:
            rules = tuple(rule_from_dict(r) for r in data['rules'])
            rule_set = RuleSet(rules=rules, capacity=int(data['capacity']))
            params_data = data.get('params')
            if not params_data:
                raise CheckpointIntegrityError("checkpoint has no combiner params")
            params = CombinerParams.from_dict(params_data).aligned_to(rule_set.rule_ids)
            validation = data.get('validation') or {}
            return cls(
                iteration=int(data['iteration']),
                rule_set=rule_set,
                params=params,
                val_accuracy=float(validation.get('accuracy', float('nan'))),
                val_macro_f1=float(validation.get('macro_f1', float('nan'))),
                cache_stats=dict(data.get('cache_stats') or {}),
            )
        except CheckpointIntegrityError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise CheckpointIntegrityError(f"invalid checkpoint: {e}") from e

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'Checkpoint':
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise CheckpointIntegrityError(f"cannot read checkpoint {path}: {e}") from e
        return cls.from_dict(data)


@dataclass
class RunLog:
    """Append-only per-iteration record of a run"""

    records: List[Dict[str, Any]] = field(default_factory=list)
    stop_reason: Optional[str] = None
    best_iteration: Optional[int] = None

    def append(self, record: Dict[str, Any]):
        expected = len(self.records) + 1
        if record.get('iteration') != expected:
            raise ValueError(f"run log expects iteration {expected}, got {record.get('iteration')}")
        self.records.append(dict(record))

    def __len__(self) -> int:
        return len(self.records)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'iterations': self.records,
            'stop_reason': self.stop_reason,
            'best_iteration': self.best_iteration,
        }

    def to_json(self) -> str:
        return dump_json(self.to_dict())


class RunDirectory:
    """
    Layout of one run: `<root>/<run_id>_seed<seed>/`

    config.yaml, splits.json, templates.json, generated/iter_XX.json,
    checkpoints/iter_XX.json, best_checkpoint.json, run_log.json, errors.json
    """

    def __init__(self, root: Union[str, Path], run_id: str, seed: int):
        self.path = Path(root) / f"{run_id}_seed{seed}"
        self.run_id = run_id
        self.seed = seed
        (self.path / 'generated').mkdir(parents=True, exist_ok=True)
        (self.path / 'checkpoints').mkdir(parents=True, exist_ok=True)

    def _write(self, relative: str, text: str) -> Path:
        target = self.path / relative
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, 'w', encoding='utf-8') as f:
            f.write(text)
        return target

    def write_config(self, config_yaml: str) -> Path:
        return self._write('config.yaml', config_yaml)

    def write_splits(self, bundle: SplitBundle, requested_sizes: Sequence[int]) -> Path:
        target = self.path / 'splits.json'
        save_split_manifest(bundle, target, requested_sizes)
        return target

    def write_templates(self, templates: TemplateSet) -> Path:
        return self._write('templates.json', dump_json({
            'name': templates.name,
            'version': templates.version,
            'templates': templates.versions(),
        }))

    def write_generation(self, iteration: int, result: GenerationResult) -> Path:
        return self._write(f'generated/iter_{iteration:02d}.json', dump_json({
            'iteration': iteration,
            'mode': result.request.context.get('mode'),
            'raw_response': result.raw,
            'rules': [rule_to_dict(r) for r in result.rules],
        }))

    def write_checkpoint(self, checkpoint: Checkpoint) -> Path:
        return self._write(
            f'checkpoints/iter_{checkpoint.iteration:02d}.json', dump_json(checkpoint.to_dict())
        )

    @property
    def best_checkpoint_path(self) -> Path:
        return self.path / 'best_checkpoint.json'

    def write_best(self, checkpoint: Checkpoint) -> Path:
        return self._write(self.best_checkpoint_path.name, dump_json(checkpoint.to_dict()))

    def write_run_log(self, run_log: RunLog) -> Path:
        return self._write('run_log.json', run_log.to_json())

    def write_errors(self, tracker: ErrorTracker) -> Path:
        target = self.path / 'errors.json'
        tracker.export_errors(target)
        return target

    def write_json(self, relative: str, data: Any) -> Path:
        return self._write(relative, dump_json(data))
