"""
Tests for the run configuration and the CLI commands
"""

import io
import json
import logging
import pytest
import sys
import os
from pathlib import Path

import yaml

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from backends.base import PURPOSE_INFERENCE, PURPOSE_JUDGMENT, CountingBackend
from backends.synthetic import SyntheticBackend, SyntheticJudgeSpec
from cli.commands import cmd_evaluate, cmd_inspect_cache, cmd_make_splits, cmd_run
from cli.config import RunConfig
from cli.main import main
from core.errors import ConfigError
from core.types import Judgment
from dataset.loader import load_jsonl, write_jsonl
from dataset.splits import load_split_manifest
from judge.cache import JudgmentCache
from tests.conftest import GENERIC_TEMPLATES, planted_spec


def _config_mapping(tmp_path, dataset_path, spec_path):
    return {
        'run_id': 'cli',
        'dataset': {
            'path': str(dataset_path),
            'manifest': {'name': 'planted'},
            'templates': str(GENERIC_TEMPLATES),
            'split_sizes': [200, 200, 300],
        },
        'backend': {'provider': 'synthetic', 'synthetic_spec': str(spec_path)},
        'loop': {'max_iterations': 2},
        'combiner': {'lambdas': [0.01, 0.1], 'alphas': [0.0, 0.5], 'folds': 3,
                     'tol': 1e-6, 'max_iter': 2000},
        'seeds': [1, 2, 3],
        'output_dir': str(tmp_path / 'runs'),
        'cache_path': str(tmp_path / 'cache' / 'judgments.jsonl'),
        'logging': {'level': 'WARNING', 'json_format': False},
    }


@pytest.fixture
def workspace(tmp_path, planted_examples):
    dataset_path = tmp_path / 'planted.jsonl'
    write_jsonl(dataset_path, planted_examples)
    spec_path = tmp_path / 'judge_spec.yaml'
    spec_path.write_text(yaml.safe_dump(planted_spec().model_dump(mode='json')))

    mapping = _config_mapping(tmp_path, dataset_path, spec_path)
    config_path = tmp_path / 'config.yaml'
    config_path.write_text(yaml.safe_dump(mapping))
    return RunConfig.from_mapping(mapping), config_path


class _Builder:
    """Synthetic backend factory recording how many backends it built"""

    def __init__(self):
        self.built = []

    def __call__(self, config, manifest):
        backend = CountingBackend(
            SyntheticBackend(SyntheticJudgeSpec.from_yaml(config.backend.synthetic_spec),
                             manifest)
        )
        self.built.append(backend)
        return backend


class _OffFormatInference:
    """Backend wrapper answering every fifth inference request without a final answer"""

    def __init__(self, inner):
        self.inner = inner
        self.capabilities = inner.capabilities
        self.inference_calls = 0

    async def complete(self, request):
        if request.purpose == PURPOSE_INFERENCE:
            self.inference_calls += 1
            if self.inference_calls % 5 == 0:
                return "It depends."
        return await self.inner.complete(request)

    async def aclose(self):
        await self.inner.aclose()


class TestRunConfig:
    """YAML configuration"""

    def test_yaml_round_trip(self, workspace):
        """Test YAML round trip"""
        config, _ = workspace
        assert RunConfig.from_yaml_text(config.to_yaml()) == config

    def test_defaults(self, workspace):
        """Test defaults"""
        config, _ = workspace
        assert config.loop.capacity == 10
        assert config.loop.hard_k == 20
        assert config.loop.coverage_gamma == 0.2
        assert config.evaluation.strategies[0] == 'linear_only'

    def test_missing_dataset_section(self):
        """Test missing dataset section"""
        with pytest.raises(ConfigError):
            RunConfig.from_mapping({'run_id': 'x'})

    def test_duplicate_seeds(self, workspace):
        """Test duplicate seeds"""
        config, _ = workspace
        raw = config.model_dump(mode='json')
        raw['seeds'] = [1, 1]
        with pytest.raises(ConfigError):
            RunConfig.from_mapping(raw)

    def test_strategy_codes_normalized(self, workspace):
        """Test strategy codes normalized"""
        config, _ = workspace
        raw = config.model_dump(mode='json')
        raw['evaluation'] = {'strategies': ['E1', 'e4']}
        parsed = RunConfig.from_mapping(raw)
        assert parsed.evaluation.strategies == ('linear_only', 'llm_rules_weights_prediction')

    def test_repeats_extend_seeds(self, workspace):
        """Test repeats extend seeds"""
        config, _ = workspace
        assert config.model_copy(update={'seeds': (5,), 'repeats': 3}).run_seeds() == [5, 6, 7]
        assert config.with_seed(9).run_seeds() == [9]

    def test_missing_file(self, tmp_path):
        """Test missing file"""
        with pytest.raises(ConfigError):
            RunConfig.from_yaml(tmp_path / 'none.yaml')


class TestRunCommand:
    """run and its dry-run mode"""

    async def test_missing_dataset_fails_before_backend(self, workspace, tmp_path):
        """Test missing dataset fails before backend"""
        config, _ = workspace
        broken = config.model_copy(update={
            'dataset': config.dataset.model_copy(update={'path': str(tmp_path / 'gone.jsonl')})
        })
        builder = _Builder()
        with pytest.raises(ConfigError, match="dataset.path"):
            await cmd_run(broken, backend_builder=builder, stdout=io.StringIO())
        assert builder.built == []

    def test_missing_dataset_exit_code(self, workspace, tmp_path, capsys):
        """Test missing dataset exit code"""
        _, config_path = workspace
        raw = yaml.safe_load(config_path.read_text())
        raw['dataset']['path'] = str(tmp_path / 'gone.jsonl')
        config_path.write_text(yaml.safe_dump(raw))

        assert main(['run', '--config', str(config_path)]) == 2
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error['error'] == 'ConfigError'

    def test_malformed_example_exit_code(self, workspace, tmp_path, capsys):
        """Test that a blank example id ends in a structured error, not a traceback"""
        _, config_path = workspace
        broken = tmp_path / 'broken.jsonl'
        broken.write_text(json.dumps({'id': '', 'fields': {'text': 'a'}, 'label': 1}) + "\n")
        raw = yaml.safe_load(config_path.read_text())
        raw['dataset']['path'] = str(broken)
        config_path.write_text(yaml.safe_dump(raw))

        assert main(['run', '--config', str(config_path)]) == 1
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error['error'] == 'DatasetParseError'
        assert error['message'].startswith('line 1:')

    def test_unknown_strategy_exit_code(self, workspace, capsys):
        """Test unknown strategy exit code"""
        _, config_path = workspace
        assert main(['run', '--config', str(config_path), '--strategy', 'E9']) == 2
        assert 'E9' in capsys.readouterr().err

    async def test_dry_run_renders_every_prompt(self, workspace):
        """Test dry run renders every prompt"""
        config, _ = workspace
        builder = _Builder()
        out = io.StringIO()
        assert await cmd_run(config, dry_run=True, backend_builder=builder, stdout=out) == 0
        assert builder.built == []

        prompts = (Path(config.output_dir) / 'dry_run_prompts.txt').read_text()
        for title in ('generation', 'judgment', 'E2 llm_rules', 'E3 llm_rules_weights',
                      'E4 llm_rules_weights_prediction'):
            assert f"===== {title} / user =====" in prompts
        assert 'dry_run_prompts.txt' in out.getvalue()

    def test_dry_run_from_main(self, workspace, mocker, capsys):
        """Test dry run from main"""
        _, config_path = workspace
        create = mocker.patch('cli.commands.BackendFactory.create_backend')
        assert main(['run', '--config', str(config_path), '--dry-run']) == 0
        create.assert_not_called()
        assert 'Prompts written to' in capsys.readouterr().out

    async def test_off_format_inference_is_reported(self, workspace, caplog):
        """Test that a seed with off-format E2-E4 answers logs how many there were"""
        config, _ = workspace
        single = config.model_copy(update={
            'seeds': (1,), 'loop': config.loop.model_copy(update={'max_iterations': 1}),
        })
        builder = _Builder()

        def wrapped(run_config, manifest):
            return _OffFormatInference(builder(run_config, manifest))

        with caplog.at_level(logging.WARNING, logger='cli.commands'):
            assert await cmd_run(single, backend_builder=wrapped, stdout=io.StringIO()) == 0
        assert any('inference answers were off-format' in r.getMessage()
                   for r in caplog.records)

        run_report = Path(config.output_dir) / 'cli_seed1' / 'eval_report.json'
        report = json.loads(run_report.read_text())
        coverage = {r['strategy']: r['parse_coverage'] for r in report['runs']}
        assert coverage['linear_only'] == 1.0
        assert coverage['llm_rules'] < 1.0

    async def test_three_seeds_then_evaluate(self, workspace):
        """Test three seeds then evaluate"""
        config, _ = workspace
        builder = _Builder()
        out = io.StringIO()
        assert await cmd_run(config, backend_builder=builder, stdout=out) == 0

        root = Path(config.output_dir)
        for seed in (1, 2, 3):
            run_dir = root / f"cli_seed{seed}"
            for name in ('best_checkpoint.json', 'run_log.json', 'splits.json', 'config.yaml',
                         'eval_report.json', 'backend_calls.json'):
                assert (run_dir / name).exists()

        report = json.loads((root / 'cli_eval_report.json').read_text())
        assert set(report['aggregate']) == {
            'linear_only', 'llm_rules', 'llm_rules_weights', 'llm_rules_weights_prediction'
        }
        assert report['aggregate']['linear_only']['accuracy']['n'] == 3
        assert 'E1 Linear-only' in out.getvalue()

        seed_one = next(r for r in report['runs']
                        if r['strategy'] == 'linear_only' and r['seed'] == 1)
        checkpoint = root / 'cli_seed1' / 'best_checkpoint.json'
        evaluator = _Builder()
        assert await cmd_evaluate(checkpoint, 'E1', config.with_seed(1),
                                  backend_builder=evaluator, stdout=io.StringIO()) == 0
        # the test judgments were cached by the run
        assert evaluator.built[0].counts[PURPOSE_JUDGMENT] == 0
        assert evaluator.built[0].calls == 0

        evaluated = json.loads((root / 'cli_seed1' / 'eval_linear_only_report.json').read_text())
        assert evaluated['runs'][0]['accuracy'] == seed_one['accuracy']


class TestEvaluateCommand:
    """evaluate with bad inputs"""

    def test_unknown_strategy(self, workspace, tmp_path, capsys):
        """Test unknown strategy"""
        _, config_path = workspace
        code = main(['evaluate', str(tmp_path / 'ckpt.json'), '--config', str(config_path),
                     '--strategy', 'E9'])
        assert code == 2
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error['error'] == 'UsageError'
        assert 'E1/linear_only' in error['message']

    def test_unreadable_checkpoint(self, workspace, tmp_path, capsys):
        """Test unreadable checkpoint"""
        _, config_path = workspace
        bad = tmp_path / 'ckpt.json'
        bad.write_text('{"rules": []}')
        code = main(['evaluate', str(bad), '--config', str(config_path), '--strategy', 'E1'])
        assert code == 1
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error['error'] == 'CheckpointIntegrityError'


class TestInspectCache:
    """Cache summaries"""

    def test_missing_cache(self, tmp_path):
        """Test missing cache"""
        out = io.StringIO()
        assert cmd_inspect_cache(tmp_path / 'none.jsonl', stdout=out) == 0
        assert out.getvalue().startswith('0 entries')

    def test_entries_and_corrupt_line(self, tmp_path):
        """Test entries and corrupt line"""
        path = tmp_path / 'judgments.jsonl'
        with JudgmentCache(path) as cache:
            for i in range(6):
                cache.put(f"k{i}", Judgment.POSITIVE if i % 2 else Judgment.ABSTAIN,
                          rule_text='Rule A', example_id=f"e{i}")
            cache.get('k1')

        out = io.StringIO()
        cmd_inspect_cache(path, stdout=out)
        text = out.getvalue()
        assert text.startswith('6 entries')
        assert 'coverage 0.500 over 6 judged: Rule A' in text
        assert 'hit rate' in text

        with open(path, 'a') as f:
            f.write('{"key": "k9", "judgment"\n')
        out = io.StringIO()
        cmd_inspect_cache(path, stdout=out)
        assert 'corrupt line 7' in out.getvalue()

    def test_main_dispatch(self, tmp_path, capsys):
        """Test main dispatch"""
        assert main(['inspect-cache', str(tmp_path / 'none.jsonl')]) == 0
        assert '0 entries' in capsys.readouterr().out


class TestMakeSplits:
    """Seeded split manifests"""

    def test_manifest_reloads(self, workspace, tmp_path):
        """Test manifest reloads"""
        config, _ = workspace
        target = tmp_path / 'splits' / 'seed4.json'
        out = io.StringIO()
        assert cmd_make_splits(config, seed=4, output=target, stdout=out) == 0
        bundle = load_split_manifest(target, load_jsonl(config.dataset.path))
        assert bundle.sizes() == (200, 200, 300)
        assert str(target) in out.getvalue()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
